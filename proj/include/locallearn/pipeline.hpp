#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "locallearn/classifiers.hpp"
#include "locallearn/clustering.hpp"
#include "locallearn/dataset.hpp"
#include "locallearn/tuner.hpp"

namespace locallearn {

/// Learner combinations: optional clustering, optional DE tuning, SVM or KNN.
enum class Mode { Svm, Knn, DeSvm, DeKnn, KMeansSvm, KMeansKnn, KMeansDeSvm, KMeansDeKnn };

std::string mode_name(Mode m);  // "SVM", "DE_SVM", "KMeans_DE_KNN", ...
Mode parse_mode(const std::string& name);
const std::vector<Mode>& all_modes();
bool is_local(Mode m);
bool is_tuned(Mode m);
LearnerKind learner_of(Mode m);

struct GapSettings {
    int k_min = 3;
    int k_max = 16;  // exclusive: searches 3..15
    int nrefs = 3;
    GapFormula formula = GapFormula::DispersionDifference;
};

struct PipelineConfig {
    Mode mode = Mode::KMeansDeSvm;
    GapSettings gap{};
    /// Skip the GAP search and cluster with this k.
    std::optional<int> forced_k;
    DeSettings de{};
    /// Learner config for the untuned modes; the learner's defaults when unset.
    std::optional<LearnerConfig> learner;
    KMeansOptions kmeans{};
    std::uint64_t seed = 1;
    /// 1 = everything sequential; >1 = per-cluster work and kernels on that many threads.
    int parallel_width = 1;
    /// Clusters smaller than this skip tuning and use the default config.
    std::size_t min_tune_size = 10;
};

struct Timing {
    double gap_seconds = 0.0;
    double kmeans_seconds = 0.0;
    std::vector<double> cluster_seconds;
    double total_seconds = 0.0;

    double component_sum() const;
};

/// A fitted pipeline: for global modes a single model with no cluster router.
struct LocalModel {
    Mode mode = Mode::Svm;
    std::size_t dim = 0;
    int n_classes = 0;
    std::optional<ClusterModel> clusters;
    std::optional<GapResult> gap;
    std::vector<TrainedModel> models;  // one per cluster (one in total for global modes)
    std::vector<LearnerConfig> configs;
    std::vector<std::size_t> cluster_sizes;
    std::vector<double> tuning_f1;  // NaN where no tuning ran
    Timing timing;
    std::vector<std::string> warnings;

    int cluster_count() const { return static_cast<int>(models.size()); }
};

/// Clusters the training data (GAP-chosen k unless forced), then fits one learner
/// per cluster, tuned by DE in the DE_ modes. Global modes fit one learner on all
/// data. Wall-clock training time covers every step.
LocalModel fit_pipeline(const VectorDataset& train, const PipelineConfig& config);

/// Index of the model that handles `x`.
int route(const LocalModel& model, std::span<const double> x);
std::vector<Label> predict_pipeline(const LocalModel& model, MatrixView test, Exec exec = Exec::Parallel);
std::vector<Label> predict_pipeline(const LocalModel& model, const VectorDataset& test, Exec exec = Exec::Parallel);

/// Writes manifest.txt, clusters.txt (local modes) and model_<i>.txt into `dir`.
void save_pipeline(const LocalModel& model, const std::filesystem::path& dir);
LocalModel load_pipeline(const std::filesystem::path& dir);

}  // namespace locallearn
