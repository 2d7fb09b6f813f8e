#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "locallearn/dataset.hpp"
#include "locallearn/metrics.hpp"
#include "locallearn/pipeline.hpp"

namespace locallearn {

struct FoldRecord {
    int repeat = 0;
    int fold = 0;
    ConfusionMatrix cm{1};
    Metrics metrics;
    double train_seconds = 0.0;
    int models = 0;  // cluster count, 1 for global modes
};

struct EvalReport {
    std::string mode;
    int n_classes = 0;
    std::vector<std::string> class_names;
    std::vector<FoldRecord> folds;
    std::vector<ClassMetrics> mean_per_class;
    ClassMetrics mean_macro;
    double mean_train_seconds = 0.0;
    /// Mean training time with per-cluster parallelism; negative when not measured.
    double mean_parallel_seconds = -1.0;
    int rank = 0;
};

struct ExperimentSettings {
    int folds = 10;
    int repeats = 10;
    std::uint64_t seed = 1;
    /// Called after every fitted fold with (mode, repeat, fold).
    std::function<void(const std::string&, int, int)> progress;
};

/// Cross-validates every pipeline config on the same stratified splits. Each
/// split's pipeline seed derives from the experiment seed, so all modes see
/// identical folds and component seeds. Folds run one after another so the
/// recorded training times are not disturbed by each other.
std::vector<EvalReport> run_experiment(const VectorDataset& data, const std::vector<PipelineConfig>& modes,
                                       const ExperimentSettings& settings);

/// Scott-Knott ranks on per-fold macro F1.
void rank_reports(std::vector<EvalReport>& reports, std::uint64_t seed);

/// Display names for class ids 1..n: the dataset's own names if present, the
/// link types for 4 classes, otherwise "class <id>".
std::vector<std::string> class_names_for(const VectorDataset& data);

enum class Measure { Precision, Recall, F1 };

/// One row per class plus an Overall row; one column per mode; values x100, rounded.
std::string format_class_table(const std::vector<EvalReport>& reports, Measure measure = Measure::F1);
/// Tab-separated mode, class, precision, recall, f1, rank (no timing; reproducible).
std::string format_metrics_table(const std::vector<EvalReport>& reports);
/// Tab-separated mode, class, precision, recall, f1, rank, train_seconds.
std::string format_report_table(const std::vector<EvalReport>& reports);
/// Tab-separated mode, sequential seconds, parallel seconds.
std::string format_timing_table(const std::vector<EvalReport>& reports);
std::string format_ranks_table(const std::vector<EvalReport>& reports);
/// JSON document with everything in the reports, including per-fold records.
std::string format_report_json(const std::vector<EvalReport>& reports);
/// One JSON object per line: mode, seconds, f1 (and parallel_seconds when measured).
std::string format_plot_data(const std::vector<EvalReport>& reports);

}  // namespace locallearn
