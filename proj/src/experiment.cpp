#include "locallearn/experiment.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "locallearn/io.hpp"
#include "locallearn/rng.hpp"
#include "locallearn/stats.hpp"

namespace locallearn {

std::vector<std::string> class_names_for(const VectorDataset& data) {
    std::vector<std::string> names;
    for (int c = 1; c <= data.n_classes(); ++c) {
        const auto idx = static_cast<std::size_t>(c - 1);
        if (idx < data.label_names().size())
            names.push_back(data.label_names()[idx]);
        else if (data.n_classes() == 4)
            names.emplace_back(link_type_name(static_cast<LinkType>(c)));
        else
            names.push_back("class " + std::to_string(c));
    }
    return names;
}

std::vector<EvalReport> run_experiment(const VectorDataset& data, const std::vector<PipelineConfig>& modes,
                                       const ExperimentSettings& settings) {
    if (modes.empty()) throw Error("run_experiment: no modes");
    const auto splits = stratified_folds(data, settings.folds, settings.repeats, settings.seed);
    const auto names = class_names_for(data);

    std::vector<EvalReport> reports;
    for (const auto& base : modes) {
        EvalReport rep;
        rep.mode = mode_name(base.mode);
        rep.n_classes = data.n_classes();
        rep.class_names = names;
        for (const auto& split : splits) {
            const auto train = data.subset(split.train);
            const auto test = data.subset(split.test);
            PipelineConfig cfg = base;
            cfg.seed = derive_seed(settings.seed, {seed_tag::split, static_cast<std::uint64_t>(split.repeat),
                                                   static_cast<std::uint64_t>(split.fold)});
            const auto model = fit_pipeline(train, cfg);
            const auto predicted = predict_pipeline(model, test);

            FoldRecord rec;
            rec.repeat = split.repeat;
            rec.fold = split.fold;
            rec.cm = confusion(test.labels(), predicted, data.n_classes());
            rec.metrics = metrics(rec.cm);
            rec.train_seconds = model.timing.total_seconds;
            rec.models = model.cluster_count();
            rep.folds.push_back(std::move(rec));
            if (settings.progress) settings.progress(rep.mode, split.repeat, split.fold);
        }

        const auto nf = static_cast<double>(rep.folds.size());
        rep.mean_per_class.assign(static_cast<std::size_t>(rep.n_classes), ClassMetrics{});
        for (const auto& f : rep.folds) {
            for (std::size_t c = 0; c < rep.mean_per_class.size(); ++c) {
                rep.mean_per_class[c].precision += f.metrics.per_class[c].precision / nf;
                rep.mean_per_class[c].recall += f.metrics.per_class[c].recall / nf;
                rep.mean_per_class[c].f1 += f.metrics.per_class[c].f1 / nf;
            }
            rep.mean_macro.precision += f.metrics.macro.precision / nf;
            rep.mean_macro.recall += f.metrics.macro.recall / nf;
            rep.mean_macro.f1 += f.metrics.macro.f1 / nf;
            rep.mean_train_seconds += f.train_seconds / nf;
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

void rank_reports(std::vector<EvalReport>& reports, std::uint64_t seed) {
    std::vector<Treatment> treatments;
    for (const auto& r : reports) {
        Treatment t{r.mode, {}};
        for (const auto& f : r.folds) t.scores.push_back(f.metrics.macro.f1);
        treatments.push_back(std::move(t));
    }
    const auto ranked = scott_knott(treatments, derive_seed(seed, {seed_tag::bootstrap}));
    for (std::size_t i = 0; i < reports.size(); ++i) reports[i].rank = ranked[i].rank;
}

namespace {

double pick(const ClassMetrics& m, Measure measure) {
    switch (measure) {
        case Measure::Precision: return m.precision;
        case Measure::Recall: return m.recall;
        case Measure::F1: return m.f1;
    }
    return 0.0;
}

const char* measure_name(Measure m) {
    switch (m) {
        case Measure::Precision: return "Precision";
        case Measure::Recall: return "Recall";
        case Measure::F1: return "F1 Score";
    }
    return "";
}

long percent(double v) { return std::lround(v * 100.0); }

void check_same_classes(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw Error("report: no results");
    for (const auto& r : reports)
        if (r.n_classes != reports.front().n_classes) throw Error("report: modes disagree on class count");
}

}  // namespace

std::string format_class_table(const std::vector<EvalReport>& reports, Measure measure) {
    check_same_classes(reports);
    std::size_t label_width = std::string("Overall").size();
    for (const auto& n : reports.front().class_names) label_width = std::max(label_width, n.size());
    std::vector<std::size_t> widths;
    for (const auto& r : reports) widths.push_back(std::max<std::size_t>(r.mode.size(), 3));

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(label_width)) << "Class" << "  " << measure_name(measure)
        << " Mean\n";
    out << std::setw(static_cast<int>(label_width)) << "" << std::right;
    for (std::size_t j = 0; j < reports.size(); ++j) out << "  " << std::setw(static_cast<int>(widths[j])) << reports[j].mode;
    out << "\n";
    auto row = [&](const std::string& label, auto&& value) {
        out << std::left << std::setw(static_cast<int>(label_width)) << label << std::right;
        for (std::size_t j = 0; j < reports.size(); ++j)
            out << "  " << std::setw(static_cast<int>(widths[j])) << percent(value(reports[j]));
        out << "\n";
    };
    const auto& names = reports.front().class_names;
    for (std::size_t c = 0; c < names.size(); ++c)
        row(names[c], [&](const EvalReport& r) { return pick(r.mean_per_class[c], measure); });
    row("Overall", [&](const EvalReport& r) { return pick(r.mean_macro, measure); });
    return out.str();
}

namespace {

std::string metrics_rows(const std::vector<EvalReport>& reports, bool with_time) {
    check_same_classes(reports);
    std::ostringstream out;
    out << "mode\tclass\tprecision\trecall\tf1\trank";
    if (with_time) out << "\ttrain_seconds";
    out << "\n";
    for (const auto& r : reports) {
        auto line = [&](const std::string& cls, const ClassMetrics& m) {
            out << r.mode << "\t" << cls << "\t" << format_double(m.precision) << "\t" << format_double(m.recall)
                << "\t" << format_double(m.f1) << "\t" << r.rank;
            if (with_time) out << "\t" << format_double(r.mean_train_seconds);
            out << "\n";
        };
        for (std::size_t c = 0; c < r.class_names.size(); ++c) line(r.class_names[c], r.mean_per_class[c]);
        line("Overall", r.mean_macro);
    }
    return out.str();
}

}  // namespace

std::string format_metrics_table(const std::vector<EvalReport>& reports) { return metrics_rows(reports, false); }
std::string format_report_table(const std::vector<EvalReport>& reports) { return metrics_rows(reports, true); }

std::string format_timing_table(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << "mode\tsequential_seconds\tparallel_seconds\n";
    for (const auto& r : reports) {
        out << r.mode << "\t" << format_double(r.mean_train_seconds) << "\t"
            << (r.mean_parallel_seconds >= 0 ? format_double(r.mean_parallel_seconds) : "-") << "\n";
    }
    return out.str();
}

std::string format_ranks_table(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    out << "mode\trank\tmedian_f1\tmean_f1\n";
    for (const auto& r : reports) {
        std::vector<double> f1;
        for (const auto& f : r.folds) f1.push_back(f.metrics.macro.f1);
        out << r.mode << "\t" << r.rank << "\t" << format_double(median(f1)) << "\t" << format_double(mean(f1))
            << "\n";
    }
    return out.str();
}

namespace {

nlohmann::json to_json(const ClassMetrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

}  // namespace

std::string format_report_json(const std::vector<EvalReport>& reports) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json j;
        j["mode"] = r.mode;
        j["rank"] = r.rank;
        j["train_seconds"] = r.mean_train_seconds;
        if (r.mean_parallel_seconds >= 0) j["parallel_train_seconds"] = r.mean_parallel_seconds;
        j["overall"] = to_json(r.mean_macro);
        nlohmann::json classes = nlohmann::json::array();
        for (std::size_t c = 0; c < r.class_names.size(); ++c) {
            auto cj = to_json(r.mean_per_class[c]);
            cj["class"] = r.class_names[c];
            classes.push_back(std::move(cj));
        }
        j["classes"] = std::move(classes);
        nlohmann::json folds = nlohmann::json::array();
        for (const auto& f : r.folds) {
            nlohmann::json cm = nlohmann::json::array();
            for (Label a = 1; a <= f.cm.n_classes(); ++a) {
                nlohmann::json rowj = nlohmann::json::array();
                for (Label p = 1; p <= f.cm.n_classes(); ++p) rowj.push_back(f.cm.at(a, p));
                cm.push_back(std::move(rowj));
            }
            folds.push_back({{"repeat", f.repeat},
                             {"fold", f.fold},
                             {"macro", to_json(f.metrics.macro)},
                             {"train_seconds", f.train_seconds},
                             {"models", f.models},
                             {"confusion", std::move(cm)}});
        }
        j["folds"] = std::move(folds);
        doc.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

std::string format_plot_data(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    for (const auto& r : reports) {
        nlohmann::json j{{"mode", r.mode}, {"seconds", r.mean_train_seconds}, {"f1", r.mean_macro.f1}};
        if (r.mean_parallel_seconds >= 0) j["parallel_seconds"] = r.mean_parallel_seconds;
        out << j.dump() << "\n";
    }
    return out.str();
}

}  // namespace locallearn
