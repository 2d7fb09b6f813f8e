#include <algorithm>
#include <cmath>
#include <numeric>

#include "locallearn/classifiers.hpp"

namespace locallearn {

std::string knn_weights_name(KnnWeights w) { return w == KnnWeights::Uniform ? "uniform" : "distance"; }

KnnWeights parse_knn_weights(const std::string& name) {
    if (name == "uniform") return KnnWeights::Uniform;
    if (name == "distance") return KnnWeights::Distance;
    throw Error("unknown knn weights '" + name + "'");
}

KnnModel::KnnModel(Matrix points, std::vector<Label> labels, int n_classes, KnnConfig config, Exec exec)
    : train_(std::move(points)), labels_(std::move(labels)), n_classes_(n_classes), config_(config), exec_(exec) {
    if (train_.rows() == 0) throw Error("knn: empty training set");
    if (config_.n_neighbors < 1) throw Error("knn: n_neighbors must be at least 1");
    effective_k_ = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config_.n_neighbors), train_.rows()));
}

KnnModel::KnnModel(const VectorDataset& train, KnnConfig config, Exec exec)
    : KnnModel(Matrix(std::vector<double>(train.matrix().values.begin(), train.matrix().values.end()), train.size(),
                      train.dim()),
               train.labels(), train.n_classes(), config, exec) {}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw DimensionError("knn: query has dimension " + std::to_string(x.size()) + ", model has " +
                             std::to_string(dim()));
    }
    std::vector<double> d2(train_.rows());
    kernels::squared_distances(exec_, train_, x, d2);
    std::vector<std::size_t> idx(train_.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto k = static_cast<std::size_t>(effective_k_);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) { return d2[a] < d2[b] || (d2[a] == d2[b] && a < b); });
    idx.resize(k);
    return idx;
}

Label KnnModel::predict(std::span<const double> x) const {
    const auto nn = neighbors(x);
    std::vector<double> score(static_cast<std::size_t>(n_classes_) + 1, 0.0);

    if (config_.weights == KnnWeights::Uniform) {
        for (auto i : nn) score[static_cast<std::size_t>(labels_[i])] += 1.0;
    } else {
        // an exact match outweighs any finite inverse distance
        bool exact = false;
        for (auto i : nn) {
            if (squared_distance(train_.row(i), x) == 0.0) {
                score[static_cast<std::size_t>(labels_[i])] += 1.0;
                exact = true;
            }
        }
        if (!exact) {
            for (auto i : nn)
                score[static_cast<std::size_t>(labels_[i])] += 1.0 / std::sqrt(squared_distance(train_.row(i), x));
        }
    }
    Label best = 1;
    for (Label c = 2; c <= n_classes_; ++c)
        if (score[static_cast<std::size_t>(c)] > score[static_cast<std::size_t>(best)]) best = c;
    return best;
}

TrainedModel knn_fit(const VectorDataset& train, const KnnConfig& config, Exec exec) {
    if (train.empty()) throw Error("knn_fit: empty training set");
    TrainedModel m{KnnModel(train, config, exec)};
    const auto& knn = m.as<KnnModel>();
    if (knn.clamped()) {
        m.warnings.push_back("knn: n_neighbors=" + std::to_string(config.n_neighbors) + " clamped to training size " +
                             std::to_string(knn.effective_k()));
    }
    return m;
}

Label knn_predict(const TrainedModel& model, std::span<const double> x) {
    if (model.kind() != TrainedModel::Kind::Knn) throw Error("knn_predict: model is not a KNN model");
    return model.predict(x);
}

}  // namespace locallearn
