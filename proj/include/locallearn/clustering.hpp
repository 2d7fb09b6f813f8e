#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "locallearn/common.hpp"

namespace locallearn {

struct KMeansOptions {
    int max_iter = 300;
    /// Convergence threshold on the summed squared centroid shift, relative to the
    /// mean per-feature variance of the data.
    double tol = 1e-4;
    Exec exec = Exec::Parallel;
};

/// Result of a KMeans fit; also serves as the router for unseen points.
struct ClusterModel {
    int k = 0;
    std::size_t dim = 0;
    Matrix centroids;              // k x dim
    std::vector<int> assignments;  // per training point, in [0,k)
    double inertia = 0.0;
    int iterations = 0;
    /// Inertia after every assignment step; non-increasing.
    std::vector<double> inertia_trace;

    std::span<const double> centroid(int c) const { return centroids.row(static_cast<std::size_t>(c)); }
    std::vector<std::size_t> cluster_sizes() const;
};

/// Lloyd iterations from a k-means++ seeding. Empty clusters are reseeded to the
/// point farthest from its assigned centroid.
ClusterModel kmeans_fit(MatrixView points, int k, std::uint64_t seed, const KMeansOptions& opts = {});

/// k-means++ seeding alone: the first centre is a uniformly drawn point, each later
/// one is drawn with probability proportional to its squared distance from the
/// nearest centre chosen so far. Returns the chosen row indices.
std::vector<std::size_t> kmeanspp_seed_indices(MatrixView points, int k, std::uint64_t seed);

/// Index of the nearest centroid (Euclidean), ties to the lowest index.
int assign_nearest(const ClusterModel& model, std::span<const double> point);

enum class GapFormula {
    /// gap(k) = log(mean reference inertia - data inertia), choose argmax.
    DispersionDifference,
    /// gap(k) = mean log reference inertia - log data inertia, choose the smallest k
    /// with gap(k) >= gap(k+1) - s(k+1), falling back to argmax.
    Classical,
};

struct GapOptions {
    GapFormula formula = GapFormula::DispersionDifference;
    KMeansOptions kmeans{};
    /// Fit the per-k problems concurrently.
    bool parallel = true;
};

struct GapRecord {
    int k = 0;
    double gap = 0.0;  // -inf when undefined
    double ref_inertia = 0.0;
    double data_inertia = 0.0;
    double sk = 0.0;  // simulation error, classical formula only
};

struct GapResult {
    std::vector<GapRecord> records;
    int chosen_k = 0;
};

/// Scans k over [k_min, k_max). Reference datasets are drawn uniformly inside the
/// per-feature bounding box of the data and have the same number of rows.
GapResult gap_statistic(MatrixView data, int k_min, int k_max, int nrefs, std::uint64_t seed,
                        const GapOptions& opts = {});

/// Uniform sample inside the per-feature [min,max] box of `data`.
Matrix uniform_reference(MatrixView data, std::uint64_t seed);

std::string format_cluster_model(const ClusterModel& m);
ClusterModel parse_cluster_model(const std::string& text);

}  // namespace locallearn
