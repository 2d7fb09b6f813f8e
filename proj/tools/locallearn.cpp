#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "locallearn/experiment.hpp"
#include "locallearn/io.hpp"
#include "locallearn/kernels.hpp"
#include "locallearn/metrics.hpp"
#include "locallearn/pipeline.hpp"
#include "locallearn/rng.hpp"
#include "locallearn/synth.hpp"
#include "locallearn/tuner.hpp"

namespace fs = std::filesystem;
using namespace locallearn;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

DatasetFormat parse_format(const std::string& s) {
    if (s == "vector") return DatasetFormat::VectorRows;
    if (s == "paired") return DatasetFormat::PairedPosts;
    throw UsageError("unknown --format '" + s + "' (expected vector or paired)");
}

std::vector<Mode> parse_modes(const std::string& list) {
    std::vector<Mode> modes;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            modes.push_back(parse_mode(item));
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    if (modes.empty()) throw UsageError("--modes names no modes");
    return modes;
}

void set_width(int width) {
    if (width < 1) throw UsageError("--parallel must be at least 1");
    omp_set_num_threads(width);
}

struct Annotation {
    std::string label;
    double seconds;
};

// "<label> <seconds>" per line; '#' starts a comment.
std::vector<Annotation> read_annotations(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<Annotation> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Annotation a;
        if (!(ls >> a.label)) continue;
        if (!(ls >> a.seconds)) throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected '<label> <seconds>'");
        out.push_back(a);
    }
    return out;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    SynthSpec spec;
    std::string out;
};

int cmd_synth(const SynthArgs& a) {
    const auto data = make_synthetic(a.spec);
    save_dataset(a.out, data);
    std::cout << "wrote " << data.size() << " instances (d=" << data.dim() << ", classes=" << data.n_classes()
              << ") to " << a.out << "\n";
    return 0;
}

struct BenchArgs {
    std::string data;
    std::string format = "vector";
    std::string modes = "SVM,KNN,DE_SVM,DE_KNN,KMeans_SVM,KMeans_KNN,KMeans_DE_SVM,KMeans_DE_KNN";
    int folds = 10;
    int repeats = 10;
    std::uint64_t seed = 1;
    int parallel = available_threads();
    std::string out = "bench_out";
    std::string annotations;
    bool quiet = false;
};

int cmd_bench(const BenchArgs& a) {
    const auto modes = parse_modes(a.modes);
    set_width(a.parallel);
    std::vector<Annotation> notes;
    if (!a.annotations.empty()) notes = read_annotations(a.annotations);
    const auto data = load_dataset(a.data, parse_format(a.format));

    ExperimentSettings settings;
    settings.folds = a.folds;
    settings.repeats = a.repeats;
    settings.seed = a.seed;
    if (!a.quiet) {
        settings.progress = [](const std::string& mode, int r, int f) {
            std::cerr << "fit mode=" << mode << " repeat=" << r << " fold=" << f << "\n";
        };
    }

    std::vector<PipelineConfig> sequential;
    for (auto m : modes) {
        PipelineConfig c;
        c.mode = m;
        c.parallel_width = 1;
        sequential.push_back(c);
    }
    auto reports = run_experiment(data, sequential, settings);
    rank_reports(reports, a.seed);

    if (a.parallel > 1) {
        std::vector<PipelineConfig> parallel;
        std::vector<std::size_t> where;
        for (std::size_t i = 0; i < modes.size(); ++i) {
            if (!is_local(modes[i])) continue;
            PipelineConfig c = sequential[i];
            c.parallel_width = a.parallel;
            parallel.push_back(c);
            where.push_back(i);
        }
        if (!parallel.empty()) {
            const auto par = run_experiment(data, parallel, settings);
            for (std::size_t j = 0; j < par.size(); ++j) reports[where[j]].mean_parallel_seconds = par[j].mean_train_seconds;
        }
    }

    std::string timing = format_timing_table(reports);
    std::string plot = format_plot_data(reports);
    if (!notes.empty()) {
        timing += "# annotations: published reference values, not measured here\n";
        for (const auto& n : notes) {
            timing += n.label + "\t" + format_double(n.seconds) + "\t-\tannotation\n";
            plot += nlohmann::json{{"mode", n.label}, {"seconds", n.seconds}, {"annotation", true}}.dump() + "\n";
        }
    }

    const fs::path out(a.out);
    fs::create_directories(out);
    atomic_write(out / "metrics.tsv", format_metrics_table(reports));
    atomic_write(out / "report.tsv", format_report_table(reports));
    atomic_write(out / "timing.tsv", timing);
    atomic_write(out / "ranks.tsv", format_ranks_table(reports));
    std::string tables = format_class_table(reports, Measure::F1) + "\n" + format_class_table(reports, Measure::Precision) +
                        "\n" + format_class_table(reports, Measure::Recall);
    atomic_write(out / "table.txt", tables);
    atomic_write(out / "report.json", format_report_json(reports));
    atomic_write(out / "plot.jsonl", plot);

    std::cout << format_class_table(reports, Measure::F1) << "\n" << timing;
    return 0;
}

struct TuneArgs {
    std::string data;
    std::string format = "vector";
    std::string learner = "svm";
    std::uint64_t seed = 1;
    DeSettings de;
    std::string out;
};

int cmd_tune(const TuneArgs& a) {
    LearnerKind kind;
    if (a.learner == "svm") kind = LearnerKind::Svm;
    else if (a.learner == "knn") kind = LearnerKind::Knn;
    else throw UsageError("unknown --learner '" + a.learner + "' (expected svm or knn)");
    const auto data = load_dataset(a.data, parse_format(a.format));
    const auto result = tune_learner(data, kind, a.de, derive_seed(a.seed, {seed_tag::tune_split}));
    if (!result.warning.empty()) std::cerr << "warning: " << result.warning << "\n";
    if (result.search) {
        for (const auto& t : result.search->trace) {
            std::cout << "trace generation=" << t.generation << " best_f1=" << format_double(t.best_score)
                      << " lives=" << t.lives << "\n";
        }
        std::cout << "evaluations=" << result.search->evaluations << "\n";
    }
    const std::string summary = "config " + describe(result.config) + "\ntuning_f1=" + format_double(result.tuning_f1) +
                                "\ndefault_f1=" + format_double(result.default_f1) + "\n";
    std::cout << summary;
    if (!a.out.empty()) atomic_write(a.out, summary);
    return 0;
}

struct FitArgs {
    std::string data;
    std::string format = "vector";
    std::string mode = "KMeans_DE_SVM";
    std::uint64_t seed = 1;
    int parallel = available_threads();
    int k = 0;
    int k_min = 3;
    int k_max = 16;
    int nrefs = 3;
    bool classical_gap = false;
    std::optional<int> n_neighbors;
    std::optional<std::string> weights;
    std::optional<double> C;
    std::optional<std::string> kernel;
    std::optional<double> gamma;
    std::optional<double> coef0;
    std::string out;
};

// Learner overrides for the untuned modes.
std::optional<LearnerConfig> learner_override(const FitArgs& a, Mode mode) {
    const bool knn_flags = a.n_neighbors || a.weights;
    const bool svm_flags = a.C || a.kernel || a.gamma || a.coef0;
    if (!knn_flags && !svm_flags) return std::nullopt;
    if (is_tuned(mode)) throw UsageError("learner flags apply only to untuned modes");
    try {
        if (learner_of(mode) == LearnerKind::Knn) {
            if (svm_flags) throw UsageError("SVM flags given for a KNN mode");
            KnnConfig c;
            if (a.n_neighbors) c.n_neighbors = *a.n_neighbors;
            if (a.weights) c.weights = parse_knn_weights(*a.weights);
            return c;
        }
        if (knn_flags) throw UsageError("KNN flags given for an SVM mode");
        SvmConfig c;
        if (a.C) c.C = *a.C;
        if (a.kernel) c.kernel = parse_kernel(*a.kernel);
        if (a.gamma) c.gamma = *a.gamma;
        if (a.coef0) c.coef0 = *a.coef0;
        return c;
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

int cmd_fit(const FitArgs& a) {
    PipelineConfig cfg;
    try {
        cfg.mode = parse_mode(a.mode);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    set_width(a.parallel);
    cfg.parallel_width = a.parallel;
    cfg.seed = a.seed;
    if (a.k > 0) cfg.forced_k = a.k;
    cfg.gap.k_min = a.k_min;
    cfg.gap.k_max = a.k_max;
    cfg.gap.nrefs = a.nrefs;
    if (a.classical_gap) cfg.gap.formula = GapFormula::Classical;
    cfg.learner = learner_override(a, cfg.mode);

    const auto data = load_dataset(a.data, parse_format(a.format));
    const auto model = fit_pipeline(data, cfg);
    for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";
    save_pipeline(model, a.out);
    std::cout << "mode=" << mode_name(model.mode) << " models=" << model.cluster_count()
              << " train_seconds=" << format_double(model.timing.total_seconds) << "\n";
    for (std::size_t c = 0; c < model.models.size(); ++c)
        std::cout << "model " << c << " size=" << model.cluster_sizes[c] << " " << describe(model.configs[c]) << "\n";
    return 0;
}

struct PredictArgs {
    std::string model;
    std::string data;
    std::string format = "vector";
    std::string out;
};

int cmd_predict(const PredictArgs& a) {
    const auto model = load_pipeline(a.model);
    const auto data = load_dataset(a.data, parse_format(a.format));
    const auto predicted = predict_pipeline(model, data);
    std::string text = "id,predicted\n";
    for (std::size_t i = 0; i < data.size(); ++i) text += data.id(i) + "," + std::to_string(predicted[i]) + "\n";
    if (!a.out.empty()) atomic_write(a.out, text);
    else std::cout << text;

    if (data.n_classes() == model.n_classes) {
        const auto m = metrics(confusion(data.labels(), predicted, model.n_classes));
        std::size_t hits = 0;
        for (std::size_t i = 0; i < data.size(); ++i) hits += predicted[i] == data.label(i);
        std::cerr << "accuracy=" << format_double(static_cast<double>(hits) / static_cast<double>(data.size()))
                  << " macro_f1=" << format_double(m.macro.f1) << "\n";
    }
    return 0;
}

struct GapArgs {
    std::string data;
    std::string format = "vector";
    int k_min = 3;
    int k_max = 16;
    int nrefs = 3;
    std::uint64_t seed = 1;
    bool classical = false;
};

int cmd_gap(const GapArgs& a) {
    const auto data = load_dataset(a.data, parse_format(a.format));
    GapOptions opts;
    if (a.classical) opts.formula = GapFormula::Classical;
    const auto r = gap_statistic(data.matrix(), a.k_min, a.k_max, a.nrefs, a.seed, opts);
    for (const auto& rec : r.records)
        std::cout << "k=" << rec.k << " gap=" << format_double(rec.gap) << "\n";
    std::cout << "chosen_k=" << r.chosen_k << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"locallearn: cluster, tune and train local classifiers; benchmark them against global ones"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "write a synthetic Gaussian-blob dataset");
    s->add_option("--n", synth.spec.n, "instances")->capture_default_str();
    s->add_option("--d", synth.spec.d, "dimension")->capture_default_str();
    s->add_option("--classes", synth.spec.classes)->capture_default_str();
    s->add_option("--blobs", synth.spec.blobs)->capture_default_str();
    s->add_option("--sigma", synth.spec.sigma, "noise norm")->capture_default_str();
    s->add_option("--seed", synth.spec.seed)->capture_default_str();
    s->add_option("--out", synth.out)->required();

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "cross-validate modes and report metrics, ranks and timings");
    b->add_option("--data", bench.data)->required()->check(CLI::ExistingFile);
    b->add_option("--format", bench.format, "vector or paired")->capture_default_str();
    b->add_option("--modes", bench.modes, "comma-separated modes")->capture_default_str();
    b->add_option("--folds", bench.folds)->capture_default_str()->check(CLI::PositiveNumber);
    b->add_option("--repeats", bench.repeats)->capture_default_str()->check(CLI::PositiveNumber);
    b->add_option("--seed", bench.seed)->capture_default_str();
    b->add_option("--parallel", bench.parallel, "worker width for local training")->capture_default_str();
    b->add_option("--out", bench.out, "output directory")->capture_default_str();
    b->add_option("--annotations", bench.annotations, "file of '<label> <seconds>' reference timings")
        ->check(CLI::ExistingFile);
    b->add_flag("--quiet", bench.quiet, "no per-fold progress");

    TuneArgs tune;
    auto* t = app.add_subcommand("tune", "tune one learner by differential evolution");
    t->add_option("--data", tune.data)->required()->check(CLI::ExistingFile);
    t->add_option("--format", tune.format)->capture_default_str();
    t->add_option("--learner", tune.learner, "svm or knn")->capture_default_str();
    t->add_option("--seed", tune.seed)->capture_default_str();
    t->add_option("--de-n", tune.de.n)->capture_default_str();
    t->add_option("--de-cf", tune.de.cf)->capture_default_str();
    t->add_option("--de-f", tune.de.f)->capture_default_str();
    t->add_option("--de-lives", tune.de.lives)->capture_default_str();
    t->add_option("--out", tune.out, "write the chosen config here");

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "fit a pipeline and save it to a directory");
    f->add_option("--data", fit.data)->required()->check(CLI::ExistingFile);
    f->add_option("--format", fit.format)->capture_default_str();
    f->add_option("--mode", fit.mode)->capture_default_str();
    f->add_option("--seed", fit.seed)->capture_default_str();
    f->add_option("--parallel", fit.parallel)->capture_default_str();
    f->add_option("--k", fit.k, "fixed cluster count (skips GAP)");
    f->add_option("--k-min", fit.k_min)->capture_default_str();
    f->add_option("--k-max", fit.k_max, "exclusive")->capture_default_str();
    f->add_option("--nrefs", fit.nrefs)->capture_default_str();
    f->add_flag("--classical-gap", fit.classical_gap, "log(ref) - log(data) gap");
    f->add_option("--n-neighbors", fit.n_neighbors, "KNN modes");
    f->add_option("--weights", fit.weights, "KNN modes: uniform or distance");
    f->add_option("--C", fit.C, "SVM modes");
    f->add_option("--kernel", fit.kernel, "SVM modes: linear, poly, rbf or sigmoid");
    f->add_option("--gamma", fit.gamma, "SVM modes");
    f->add_option("--coef0", fit.coef0, "SVM modes");
    f->add_option("--out", fit.out)->required();

    PredictArgs predict;
    auto* p = app.add_subcommand("predict", "predict with a saved pipeline");
    p->add_option("--model", predict.model)->required()->check(CLI::ExistingDirectory);
    p->add_option("--data", predict.data)->required()->check(CLI::ExistingFile);
    p->add_option("--format", predict.format)->capture_default_str();
    p->add_option("--out", predict.out, "predictions file (stdout if omitted)");

    GapArgs gap;
    auto* g = app.add_subcommand("gap", "print the GAP statistic for a k range");
    g->add_option("--data", gap.data)->required()->check(CLI::ExistingFile);
    g->add_option("--format", gap.format)->capture_default_str();
    g->add_option("--k-min", gap.k_min)->capture_default_str();
    g->add_option("--k-max", gap.k_max, "exclusive")->capture_default_str();
    g->add_option("--nrefs", gap.nrefs)->capture_default_str();
    g->add_option("--seed", gap.seed)->capture_default_str();
    g->add_flag("--classical", gap.classical);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*s) return cmd_synth(synth);
        if (*b) return cmd_bench(bench);
        if (*t) return cmd_tune(tune);
        if (*f) return cmd_fit(fit);
        if (*p) return cmd_predict(predict);
        if (*g) return cmd_gap(gap);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
