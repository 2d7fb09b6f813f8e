#include "locallearn/kernels.hpp"

#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace locallearn {

std::string kernel_name(KernelType k) {
    switch (k) {
        case KernelType::Linear: return "linear";
        case KernelType::Poly: return "poly";
        case KernelType::Rbf: return "rbf";
        case KernelType::Sigmoid: return "sigmoid";
    }
    return "?";
}

KernelType parse_kernel(const std::string& name) {
    if (name == "linear") return KernelType::Linear;
    if (name == "poly") return KernelType::Poly;
    if (name == "rbf") return KernelType::Rbf;
    if (name == "sigmoid") return KernelType::Sigmoid;
    throw Error("unknown kernel '" + name + "'");
}

double kernel_value(const KernelParams& p, std::span<const double> a, std::span<const double> b) {
    if (p.type == KernelType::Rbf) return kernel_from_dot(p, dot(a, b), dot(a, a), dot(b, b));
    return kernel_from_dot(p, dot(a, b), 0.0, 0.0);
}

int available_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace kernels {

namespace {

inline int nearest_of(std::span<const double> x, MatrixView centroids, double& best) {
    int arg = 0;
    best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows; ++c) {
        const double d = squared_distance(x, centroids.row(c));
        if (d < best) {
            best = d;
            arg = static_cast<int>(c);
        }
    }
    return arg;
}

inline double kernel_entry(const KernelParams& p, MatrixView points, std::span<const double> norms,
                           std::span<const double> query, double query_norm, std::size_t i) {
    return kernel_from_dot(p, dot(points.row(i), query), norms.empty() ? 0.0 : norms[i], query_norm);
}

// Only split work when we are not already inside a parallel region (per-cluster
// workers run these kernels serially) and the loop is long enough to pay off.
inline bool go_parallel(std::size_t n) {
#ifdef _OPENMP
    return n >= parallel_threshold && !omp_in_parallel();
#else
    (void)n;
    return false;
#endif
}

}  // namespace

namespace serial {

void squared_norms(MatrixView points, std::span<double> out) {
    for (std::size_t i = 0; i < points.rows; ++i) out[i] = dot(points.row(i), points.row(i));
}

void squared_distances(MatrixView points, std::span<const double> query, std::span<double> out) {
    for (std::size_t i = 0; i < points.rows; ++i) out[i] = squared_distance(points.row(i), query);
}

void assign_nearest(MatrixView points, MatrixView centroids, std::span<int> labels, std::span<double> dists) {
    for (std::size_t i = 0; i < points.rows; ++i) labels[i] = nearest_of(points.row(i), centroids, dists[i]);
}

void kernel_row(const KernelParams& p, MatrixView points, std::span<const double> norms,
                std::span<const double> query, double query_norm, std::span<double> out) {
    for (std::size_t i = 0; i < points.rows; ++i) out[i] = kernel_entry(p, points, norms, query, query_norm, i);
}

}  // namespace serial

namespace parallel {

void squared_norms(MatrixView points, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(points.rows);
#pragma omp parallel for schedule(static) if (go_parallel(points.rows))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto r = points.row(static_cast<std::size_t>(i));
        out[static_cast<std::size_t>(i)] = dot(r, r);
    }
}

void squared_distances(MatrixView points, std::span<const double> query, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(points.rows);
#pragma omp parallel for schedule(static) if (go_parallel(points.rows))
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = squared_distance(points.row(static_cast<std::size_t>(i)), query);
}

void assign_nearest(MatrixView points, MatrixView centroids, std::span<int> labels, std::span<double> dists) {
    const auto n = static_cast<std::ptrdiff_t>(points.rows);
#pragma omp parallel for schedule(static) if (go_parallel(points.rows))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        labels[u] = nearest_of(points.row(u), centroids, dists[u]);
    }
}

void kernel_row(const KernelParams& p, MatrixView points, std::span<const double> norms,
                std::span<const double> query, double query_norm, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(points.rows);
#pragma omp parallel for schedule(static) if (go_parallel(points.rows))
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = kernel_entry(p, points, norms, query, query_norm, static_cast<std::size_t>(i));
}

}  // namespace parallel

void squared_norms(Exec e, MatrixView points, std::span<double> out) {
    e == Exec::Parallel ? parallel::squared_norms(points, out) : serial::squared_norms(points, out);
}

void squared_distances(Exec e, MatrixView points, std::span<const double> query, std::span<double> out) {
    e == Exec::Parallel ? parallel::squared_distances(points, query, out)
                        : serial::squared_distances(points, query, out);
}

void assign_nearest(Exec e, MatrixView points, MatrixView centroids, std::span<int> labels, std::span<double> dists) {
    e == Exec::Parallel ? parallel::assign_nearest(points, centroids, labels, dists)
                        : serial::assign_nearest(points, centroids, labels, dists);
}

void kernel_row(Exec e, const KernelParams& p, MatrixView points, std::span<const double> norms,
                std::span<const double> query, double query_norm, std::span<double> out) {
    e == Exec::Parallel ? parallel::kernel_row(p, points, norms, query, query_norm, out)
                        : serial::kernel_row(p, points, norms, query, query_norm, out);
}

}  // namespace kernels
}  // namespace locallearn
