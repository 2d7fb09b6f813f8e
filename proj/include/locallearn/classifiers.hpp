#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "locallearn/common.hpp"
#include "locallearn/dataset.hpp"
#include "locallearn/kernels.hpp"

namespace locallearn {

// ---------------------------------------------------------------------------
// Configurations: exactly the tunable surface of the two learners.

enum class KnnWeights { Uniform, Distance };

std::string knn_weights_name(KnnWeights w);
KnnWeights parse_knn_weights(const std::string& name);

struct KnnConfig {
    int n_neighbors = 5;
    KnnWeights weights = KnnWeights::Uniform;

    bool operator==(const KnnConfig&) const = default;
};

struct SvmConfig {
    double C = 1.0;
    KernelType kernel = KernelType::Rbf;
    /// Unset means 1 / n_features.
    std::optional<double> gamma;
    double coef0 = 0.0;

    bool operator==(const SvmConfig&) const = default;
};

using LearnerConfig = std::variant<SvmConfig, KnnConfig>;

enum class LearnerKind { Svm, Knn };

LearnerConfig default_config(LearnerKind kind);
LearnerKind kind_of(const LearnerConfig& c);
std::string describe(const LearnerConfig& c);
std::string describe(const KnnConfig& c);
std::string describe(const SvmConfig& c);

// ---------------------------------------------------------------------------
// KNN

class KnnModel {
public:
    KnnModel(const VectorDataset& train, KnnConfig config, Exec exec);

    Label predict(std::span<const double> x) const;
    /// Indices of the k nearest training points, nearest first, ties by index.
    std::vector<std::size_t> neighbors(std::span<const double> x) const;

    const KnnConfig& config() const { return config_; }
    /// n_neighbors actually used (clamped to the training size).
    int effective_k() const { return effective_k_; }
    bool clamped() const { return effective_k_ != config_.n_neighbors; }
    std::size_t dim() const { return train_.cols(); }
    int n_classes() const { return n_classes_; }
    const Matrix& points() const { return train_; }
    const std::vector<Label>& labels() const { return labels_; }

    KnnModel(Matrix points, std::vector<Label> labels, int n_classes, KnnConfig config, Exec exec);

private:
    Matrix train_;
    std::vector<Label> labels_;
    int n_classes_ = 0;
    KnnConfig config_;
    int effective_k_ = 0;
    Exec exec_;
};

// ---------------------------------------------------------------------------
// SVM

struct SmoOptions {
    /// Stop once the maximal KKT violation falls below this.
    double tol = 1e-3;
    /// Hard iteration cap; a negative value means 10 * n^2.
    long long max_iter = -1;
    std::size_t cache_bytes = std::size_t{256} << 20;
    /// Record the dual objective after every iteration (testing aid).
    bool record_objective = false;
    Exec exec = Exec::Parallel;
};

struct SmoSolution {
    std::vector<double> alpha;
    double rho = 0.0;
    long long iterations = 0;
    bool converged = false;
    /// Dual objective sum(alpha) - 1/2 alpha' Q alpha after each iteration.
    std::vector<double> objective_trace;
};

/// Two-class soft-margin dual solved by SMO with second-order working-set selection.
/// `y` holds +1 / -1. Throws when a kernel value is not finite.
SmoSolution smo_solve(MatrixView x, std::span<const double> y, const KernelParams& kernel, double C,
                      const SmoOptions& opts = {});

/// dual objective of alpha, computed from scratch
double svm_dual_objective(MatrixView x, std::span<const double> y, const KernelParams& kernel,
                          std::span<const double> alpha);

struct BinaryMachine {
    Label positive = 0;  // decision > 0
    Label negative = 0;
    std::vector<std::size_t> sv;  // rows of SvmModel::support_vectors()
    std::vector<double> coef;     // alpha_i * y_i
    double rho = 0.0;
    long long iterations = 0;
    bool converged = true;
};

class SvmModel {
public:
    SvmModel(SvmConfig config, KernelParams kernel, Matrix support_vectors, std::vector<BinaryMachine> machines,
             int n_classes, Exec exec);

    Label predict(std::span<const double> x) const;
    /// One decision value per class pair, in machines() order.
    std::vector<double> decision_values(std::span<const double> x) const;

    const SvmConfig& config() const { return config_; }
    const KernelParams& kernel() const { return kernel_; }
    const Matrix& support_vectors() const { return sv_; }
    const std::vector<BinaryMachine>& machines() const { return machines_; }
    std::size_t dim() const { return sv_.cols(); }
    int n_classes() const { return n_classes_; }

private:
    SvmConfig config_;
    KernelParams kernel_;
    Matrix sv_;
    std::vector<double> sv_norms_;
    std::vector<BinaryMachine> machines_;
    int n_classes_ = 0;
    Exec exec_;
};

/// Majority vote over pairwise winners, ties to the smallest class id.
Label vote(std::span<const Label> winners, int n_classes);

KernelParams resolve_kernel(const SvmConfig& c, std::size_t dim);

// ---------------------------------------------------------------------------

struct ConstantModel {
    Label label = 1;
    std::size_t dim = 0;
    int n_classes = 2;
};

/// A fitted classifier: KNN store, one-vs-one SVM, or a constant for degenerate data.
class TrainedModel {
public:
    enum class Kind { Knn, Svm, Constant };

    explicit TrainedModel(KnnModel m) : impl_(std::move(m)) {}
    explicit TrainedModel(SvmModel m) : impl_(std::move(m)) {}
    explicit TrainedModel(ConstantModel m) : impl_(m) {}

    Kind kind() const;
    std::size_t dim() const;
    int n_classes() const;
    Label predict(std::span<const double> x) const;
    std::vector<Label> predict(MatrixView rows, Exec exec = Exec::Parallel) const;

    template <typename T>
    const T& as() const { return std::get<T>(impl_); }

    std::vector<std::string> warnings;

private:
    std::variant<KnnModel, SvmModel, ConstantModel> impl_;
};

TrainedModel knn_fit(const VectorDataset& train, const KnnConfig& config, Exec exec = Exec::Parallel);
Label knn_predict(const TrainedModel& model, std::span<const double> x);

/// One-vs-one SVM over the classes present in `train`; a single present class
/// yields a constant model.
TrainedModel svm_fit(const VectorDataset& train, const SvmConfig& config, const SmoOptions& opts = {});
Label svm_predict(const TrainedModel& model, std::span<const double> x);

/// Fits whichever learner the config names.
TrainedModel fit_learner(const VectorDataset& train, const LearnerConfig& config, Exec exec = Exec::Parallel);

std::string format_model(const TrainedModel& m);
TrainedModel parse_model(const std::string& text);

}  // namespace locallearn
