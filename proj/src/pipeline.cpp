#include "locallearn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "locallearn/io.hpp"
#include "locallearn/rng.hpp"

namespace locallearn {

namespace {

struct ModeInfo {
    Mode mode;
    const char* name;
    bool local;
    bool tuned;
    LearnerKind learner;
};

constexpr ModeInfo kModes[] = {
    {Mode::Svm, "SVM", false, false, LearnerKind::Svm},
    {Mode::Knn, "KNN", false, false, LearnerKind::Knn},
    {Mode::DeSvm, "DE_SVM", false, true, LearnerKind::Svm},
    {Mode::DeKnn, "DE_KNN", false, true, LearnerKind::Knn},
    {Mode::KMeansSvm, "KMeans_SVM", true, false, LearnerKind::Svm},
    {Mode::KMeansKnn, "KMeans_KNN", true, false, LearnerKind::Knn},
    {Mode::KMeansDeSvm, "KMeans_DE_SVM", true, true, LearnerKind::Svm},
    {Mode::KMeansDeKnn, "KMeans_DE_KNN", true, true, LearnerKind::Knn},
};

const ModeInfo& info(Mode m) {
    for (const auto& i : kModes)
        if (i.mode == m) return i;
    throw Error("unknown mode");
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Label majority_label(const VectorDataset& data) {
    const auto counts = data.class_counts();
    Label best = 1;
    for (Label c = 2; c <= data.n_classes(); ++c)
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
    return best;
}

struct ClusterFit {
    std::optional<TrainedModel> model;
    LearnerConfig config;
    double tuning_f1 = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;
    std::vector<std::string> warnings;
};

ClusterFit fit_one(const VectorDataset& part, const PipelineConfig& cfg, Label fallback, std::uint64_t seed,
                   Exec exec) {
    const auto t0 = Clock::now();
    const LearnerKind kind = learner_of(cfg.mode);
    ClusterFit out;
    out.config = cfg.learner && !is_tuned(cfg.mode) ? *cfg.learner : default_config(kind);
    if (part.empty()) {
        out.model.emplace(ConstantModel{fallback, part.dim(), part.n_classes()});
    } else if (part.present_classes() < 2) {
        out.model.emplace(ConstantModel{part.label(0), part.dim(), part.n_classes()});
    } else {
        if (is_tuned(cfg.mode)) {
            if (part.size() >= cfg.min_tune_size) {
                auto tr = tune_learner(part, kind, cfg.de, seed, exec);
                out.config = tr.config;
                if (tr.degenerate) out.warnings.push_back(tr.warning);
                else out.tuning_f1 = tr.tuning_f1;
            } else {
                out.warnings.push_back("cluster of " + std::to_string(part.size()) +
                                       " instances is below the tuning threshold; using defaults");
            }
        }
        out.model.emplace(fit_learner(part, out.config, exec));
        for (auto& w : out.model->warnings) out.warnings.push_back(w);
    }
    out.seconds = seconds_since(t0);
    return out;
}

}  // namespace

std::string mode_name(Mode m) { return info(m).name; }

Mode parse_mode(const std::string& name) {
    for (const auto& i : kModes)
        if (name == i.name) return i.mode;
    throw Error("unknown mode '" + name + "'");
}

const std::vector<Mode>& all_modes() {
    static const std::vector<Mode> modes = [] {
        std::vector<Mode> v;
        for (const auto& i : kModes) v.push_back(i.mode);
        return v;
    }();
    return modes;
}

bool is_local(Mode m) { return info(m).local; }
bool is_tuned(Mode m) { return info(m).tuned; }
LearnerKind learner_of(Mode m) { return info(m).learner; }

double Timing::component_sum() const {
    return gap_seconds + kmeans_seconds + std::accumulate(cluster_seconds.begin(), cluster_seconds.end(), 0.0);
}

LocalModel fit_pipeline(const VectorDataset& train, const PipelineConfig& config) {
    if (train.empty()) throw Error("fit_pipeline: empty training set");
    if (config.parallel_width < 1) throw Error("fit_pipeline: parallel width must be at least 1");
    if (config.learner && kind_of(*config.learner) != learner_of(config.mode))
        throw Error("fit_pipeline: learner config does not match mode " + mode_name(config.mode));
    const auto t_start = Clock::now();
    const bool parallel = config.parallel_width > 1;
    const Exec exec = parallel ? Exec::Parallel : Exec::Serial;
    const Label fallback = majority_label(train);

    LocalModel out;
    out.mode = config.mode;
    out.dim = train.dim();
    out.n_classes = train.n_classes();

    std::vector<VectorDataset> parts;
    if (!is_local(config.mode)) {
        parts.push_back(train);
    } else {
        KMeansOptions km = config.kmeans;
        km.exec = exec;
        int k = 0;
        if (config.forced_k) {
            k = *config.forced_k;
        } else {
            const auto t0 = Clock::now();
            const int n = static_cast<int>(train.size());
            const int k_max = std::min(config.gap.k_max, n + 1);
            if (config.gap.k_min >= k_max) {
                k = std::clamp(config.gap.k_min, 1, n);
                out.warnings.push_back("too few instances for the GAP range; using k=" + std::to_string(k));
            } else {
                GapOptions go;
                go.formula = config.gap.formula;
                go.kmeans = km;
                go.parallel = parallel;
                out.gap = gap_statistic(train.matrix(), config.gap.k_min, k_max, config.gap.nrefs,
                                        derive_seed(config.seed, {seed_tag::gap}), go);
                k = out.gap->chosen_k;
            }
            out.timing.gap_seconds = seconds_since(t0);
        }
        const auto t0 = Clock::now();
        out.clusters = kmeans_fit(train.matrix(), k, derive_seed(config.seed, {seed_tag::kmeans}), km);
        out.timing.kmeans_seconds = seconds_since(t0);

        std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < train.size(); ++i)
            members[static_cast<std::size_t>(out.clusters->assignments[i])].push_back(i);
        for (const auto& m : members) parts.push_back(train.subset(m));
    }

    const auto count = static_cast<std::ptrdiff_t>(parts.size());
    std::vector<ClusterFit> fits(parts.size());
    std::vector<std::exception_ptr> errors(parts.size());
    // largest clusters first so the dynamic schedule balances
    std::vector<std::size_t> order(parts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return parts[a].size() > parts[b].size(); });

#pragma omp parallel for schedule(dynamic, 1) num_threads(config.parallel_width) if (parallel && count > 1)
    for (std::ptrdiff_t t = 0; t < count; ++t) {
        const std::size_t c = order[static_cast<std::size_t>(t)];
        try {
            fits[c] = fit_one(parts[c], config, fallback,
                              derive_seed(config.seed, {seed_tag::cluster, static_cast<std::uint64_t>(c)}), exec);
        } catch (...) {
            errors[c] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (std::size_t c = 0; c < parts.size(); ++c) {
        out.models.push_back(std::move(*fits[c].model));
        out.configs.push_back(fits[c].config);
        out.cluster_sizes.push_back(parts[c].size());
        out.tuning_f1.push_back(fits[c].tuning_f1);
        out.timing.cluster_seconds.push_back(fits[c].seconds);
        for (auto& w : fits[c].warnings)
            out.warnings.push_back(is_local(config.mode) ? "cluster " + std::to_string(c) + ": " + w : w);
    }
    out.timing.total_seconds = seconds_since(t_start);
    return out;
}

int route(const LocalModel& model, std::span<const double> x) {
    if (x.size() != model.dim) {
        throw DimensionError("predict: point has dimension " + std::to_string(x.size()) + ", pipeline expects " +
                             std::to_string(model.dim));
    }
    return model.clusters ? assign_nearest(*model.clusters, x) : 0;
}

std::vector<Label> predict_pipeline(const LocalModel& model, MatrixView test, Exec exec) {
    if (test.rows > 0 && test.cols != model.dim) {
        throw DimensionError("predict: test data has dimension " + std::to_string(test.cols) + ", pipeline expects " +
                             std::to_string(model.dim));
    }
    std::vector<Label> out(test.rows);
    const auto n = static_cast<std::ptrdiff_t>(test.rows);
#pragma omp parallel for schedule(dynamic, 16) if (exec == Exec::Parallel && n > 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto row = test.row(static_cast<std::size_t>(i));
        out[static_cast<std::size_t>(i)] = model.models[static_cast<std::size_t>(route(model, row))].predict(row);
    }
    return out;
}

std::vector<Label> predict_pipeline(const LocalModel& model, const VectorDataset& test, Exec exec) {
    return predict_pipeline(model, test.matrix(), exec);
}

// ---------------------------------------------------------------------------

void save_pipeline(const LocalModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream man;
    man << "mode=" << mode_name(model.mode) << "\n";
    man << "dim=" << model.dim << "\n";
    man << "classes=" << model.n_classes << "\n";
    man << "models=" << model.models.size() << "\n";
    man << "gap_seconds=" << format_double(model.timing.gap_seconds) << "\n";
    man << "kmeans_seconds=" << format_double(model.timing.kmeans_seconds) << "\n";
    man << "total_seconds=" << format_double(model.timing.total_seconds) << "\n";
    if (model.gap) {
        for (const auto& r : model.gap->records) man << "gap k=" << r.k << " gap=" << format_double(r.gap) << "\n";
        man << "gap_chosen_k=" << model.gap->chosen_k << "\n";
    }
    for (std::size_t c = 0; c < model.models.size(); ++c) {
        man << "cluster " << c << " size=" << model.cluster_sizes[c]
            << " seconds=" << format_double(model.timing.cluster_seconds[c])
            << " tuning_f1=" << format_double(model.tuning_f1[c]) << " config: " << describe(model.configs[c]) << "\n";
    }
    for (std::size_t c = 0; c < model.models.size(); ++c)
        atomic_write(dir / ("model_" + std::to_string(c) + ".txt"), format_model(model.models[c]));
    if (model.clusters) atomic_write(dir / "clusters.txt", format_cluster_model(*model.clusters));
    // manifest last: its presence marks a complete directory
    atomic_write(dir / "manifest.txt", man.str());
}

LocalModel load_pipeline(const std::filesystem::path& dir) {
    std::istringstream man(read_file(dir / "manifest.txt"));
    LocalModel m;
    std::size_t count = 0;
    std::string line;
    while (std::getline(man, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos || line.rfind("cluster ", 0) == 0 || line.rfind("gap ", 0) == 0) continue;
        const auto key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "mode") m.mode = parse_mode(val);
        else if (key == "dim") m.dim = std::stoul(val);
        else if (key == "classes") m.n_classes = std::stoi(val);
        else if (key == "models") count = std::stoul(val);
    }
    if (count == 0 || m.dim == 0) throw ParseError("pipeline manifest is missing mode/dim/models");
    for (std::size_t c = 0; c < count; ++c) {
        m.models.push_back(parse_model(read_file(dir / ("model_" + std::to_string(c) + ".txt"))));
        const auto& tm = m.models.back();
        if (tm.kind() == TrainedModel::Kind::Svm) m.configs.emplace_back(tm.as<SvmModel>().config());
        else if (tm.kind() == TrainedModel::Kind::Knn) m.configs.emplace_back(tm.as<KnnModel>().config());
        else m.configs.push_back(default_config(learner_of(m.mode)));
        m.cluster_sizes.push_back(0);
        m.tuning_f1.push_back(std::numeric_limits<double>::quiet_NaN());
        m.timing.cluster_seconds.push_back(0.0);
    }
    if (is_local(m.mode)) {
        m.clusters = parse_cluster_model(read_file(dir / "clusters.txt"));
        if (static_cast<std::size_t>(m.clusters->k) != count)
            throw ParseError("pipeline: cluster count does not match model count");
    }
    return m;
}

}  // namespace locallearn
