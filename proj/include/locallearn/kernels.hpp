#pragma once

// Data-parallel inner loops shared by KMeans, KNN and the SVM solver.
//
// Each kernel exists twice: a plain serial loop in `serial::` kept as the reference,
// and an OpenMP version in `parallel::`. Both compute every output element with the
// same arithmetic in the same order, so their results are bit-identical; the tests
// and the benchmark target rely on that.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "locallearn/common.hpp"

namespace locallearn {

enum class KernelType { Linear, Poly, Rbf, Sigmoid };

std::string kernel_name(KernelType k);
KernelType parse_kernel(const std::string& name);

struct KernelParams {
    KernelType type = KernelType::Rbf;
    double gamma = 1.0;
    double coef0 = 0.0;
    int degree = 3;
};

/// K(a,b). For rbf the squared norms are passed in so rows can reuse them.
inline double kernel_from_dot(const KernelParams& p, double ab, double aa, double bb);
double kernel_value(const KernelParams& p, std::span<const double> a, std::span<const double> b);

namespace kernels {

/// Below this many rows the parallel kernels run serially.
inline constexpr std::size_t parallel_threshold = 512;

namespace serial {
void squared_norms(MatrixView points, std::span<double> out);
void squared_distances(MatrixView points, std::span<const double> query, std::span<double> out);
/// Nearest centroid per point (ties to the lowest index) and its squared distance.
void assign_nearest(MatrixView points, MatrixView centroids, std::span<int> labels, std::span<double> dists);
void kernel_row(const KernelParams& p, MatrixView points, std::span<const double> norms,
                std::span<const double> query, double query_norm, std::span<double> out);
}  // namespace serial

namespace parallel {
void squared_norms(MatrixView points, std::span<double> out);
void squared_distances(MatrixView points, std::span<const double> query, std::span<double> out);
void assign_nearest(MatrixView points, MatrixView centroids, std::span<int> labels, std::span<double> dists);
void kernel_row(const KernelParams& p, MatrixView points, std::span<const double> norms,
                std::span<const double> query, double query_norm, std::span<double> out);
}  // namespace parallel

// Policy dispatch.
void squared_norms(Exec e, MatrixView points, std::span<double> out);
void squared_distances(Exec e, MatrixView points, std::span<const double> query, std::span<double> out);
void assign_nearest(Exec e, MatrixView points, MatrixView centroids, std::span<int> labels, std::span<double> dists);
void kernel_row(Exec e, const KernelParams& p, MatrixView points, std::span<const double> norms,
                std::span<const double> query, double query_norm, std::span<double> out);

}  // namespace kernels

/// Number of worker threads available to OpenMP (1 when built without it).
int available_threads();

inline double kernel_from_dot(const KernelParams& p, double ab, double aa, double bb) {
    switch (p.type) {
        case KernelType::Linear: return ab;
        case KernelType::Poly: {
            const double base = p.gamma * ab + p.coef0;
            double r = 1.0;
            for (int i = 0; i < p.degree; ++i) r *= base;
            return r;
        }
        case KernelType::Rbf: {
            const double d2 = aa + bb - 2.0 * ab;
            return std::exp(-p.gamma * (d2 > 0.0 ? d2 : 0.0));
        }
        case KernelType::Sigmoid: return std::tanh(p.gamma * ab + p.coef0);
    }
    return 0.0;
}

}  // namespace locallearn
