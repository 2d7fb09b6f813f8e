#include "locallearn/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "locallearn/io.hpp"
#include "locallearn/kernels.hpp"
#include "locallearn/rng.hpp"

namespace locallearn {

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
    return sizes;
}

namespace {

double mean_feature_variance(MatrixView points) {
    const std::size_t n = points.rows, d = points.cols;
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = points.row(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = points.row(i);
        for (std::size_t j = 0; j < d; ++j) var += (r[j] - mean[j]) * (r[j] - mean[j]);
    }
    return var / static_cast<double>(n * d);
}

double sum(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

std::vector<std::size_t> seed_indices(MatrixView points, int k, std::uint64_t seed, Exec exec) {
    const std::size_t n = points.rows;
    Rng rng(seed);
    std::vector<std::size_t> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    chosen.push_back(uniform_index(rng, n));

    std::vector<double> closest(n), fresh(n);
    kernels::squared_distances(exec, points, points.row(chosen[0]), closest);
    while (chosen.size() < static_cast<std::size_t>(k)) {
        const double total = sum(closest);
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (closest[i] <= 0.0) continue;
                cum += closest[i];
                pick = i;
                if (cum > target) break;
            }
        }
        if (pick == n) pick = uniform_index(rng, n);  // every point already coincides with a centre
        chosen.push_back(pick);
        kernels::squared_distances(exec, points, points.row(pick), fresh);
        for (std::size_t i = 0; i < n; ++i) closest[i] = std::min(closest[i], fresh[i]);
    }
    return chosen;
}

void check_fit_args(MatrixView points, int k) {
    if (points.rows == 0) throw Error("kmeans: empty dataset");
    if (k < 1) throw Error("kmeans: k must be at least 1");
    if (static_cast<std::size_t>(k) > points.rows) {
        throw Error("kmeans: k=" + std::to_string(k) + " exceeds the number of points (" +
                    std::to_string(points.rows) + ")");
    }
}

}  // namespace

std::vector<std::size_t> kmeanspp_seed_indices(MatrixView points, int k, std::uint64_t seed) {
    check_fit_args(points, k);
    return seed_indices(points, k, seed, Exec::Serial);
}

ClusterModel kmeans_fit(MatrixView points, int k, std::uint64_t seed, const KMeansOptions& opts) {
    check_fit_args(points, k);
    const std::size_t n = points.rows, d = points.cols, kk = static_cast<std::size_t>(k);
    const double tol_abs = opts.tol * mean_feature_variance(points);

    ClusterModel m;
    m.k = k;
    m.dim = d;
    m.centroids = Matrix(kk, d);
    for (std::size_t c = 0; auto idx : seed_indices(points, k, seed, opts.exec)) {
        auto src = points.row(idx);
        std::copy(src.begin(), src.end(), m.centroids.row(c++).begin());
    }

    m.assignments.assign(n, 0);
    std::vector<double> dists(n);
    kernels::assign_nearest(opts.exec, points, m.centroids, m.assignments, dists);
    m.inertia = sum(dists);
    m.inertia_trace.push_back(m.inertia);

    Matrix next(kk, d);
    std::vector<std::size_t> counts(kk);
    for (int it = 1; it <= opts.max_iter; ++it) {
        std::fill(next.values().begin(), next.values().end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(m.assignments[i]);
            auto r = points.row(i);
            auto acc = next.row(c);
            for (std::size_t j = 0; j < d; ++j) acc[j] += r[j];
            ++counts[c];
        }
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] == 0) continue;
            for (auto& v : next.row(c)) v /= static_cast<double>(counts[c]);
        }
        // empty clusters take the point currently worst served by its centroid
        for (std::size_t c = 0; c < kk; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (dists[i] > dists[far]) far = i;
            auto src = points.row(far);
            std::copy(src.begin(), src.end(), next.row(c).begin());
            dists[far] = -1.0;
        }

        double shift = 0.0;
        for (std::size_t c = 0; c < kk; ++c) shift += squared_distance(next.row(c), m.centroids.row(c));
        std::swap(m.centroids, next);

        kernels::assign_nearest(opts.exec, points, m.centroids, m.assignments, dists);
        m.inertia = sum(dists);
        m.inertia_trace.push_back(m.inertia);
        m.iterations = it;

        auto sizes = m.cluster_sizes();
        const bool any_empty = std::find(sizes.begin(), sizes.end(), 0) != sizes.end();
        if (shift <= tol_abs && !any_empty) break;
    }
    return m;
}

int assign_nearest(const ClusterModel& model, std::span<const double> point) {
    if (point.size() != model.dim) {
        throw DimensionError("assign_nearest: point has dimension " + std::to_string(point.size()) + ", model has " +
                             std::to_string(model.dim));
    }
    int arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < model.k; ++c) {
        const double dd = squared_distance(point, model.centroid(c));
        if (dd < best) {
            best = dd;
            arg = c;
        }
    }
    return arg;
}

Matrix uniform_reference(MatrixView data, std::uint64_t seed) {
    const std::size_t n = data.rows, d = data.cols;
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        auto r = data.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], r[j]);
            hi[j] = std::max(hi[j], r[j]);
        }
    }
    Rng rng(seed);
    Matrix ref(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) ref(i, j) = lo[j] + (hi[j] - lo[j]) * uniform01(rng);
    return ref;
}

GapResult gap_statistic(MatrixView data, int k_min, int k_max, int nrefs, std::uint64_t seed,
                        const GapOptions& opts) {
    if (k_min < 1) throw Error("gap_statistic: k_min must be at least 1");
    if (k_max <= k_min) throw Error("gap_statistic: k_max must exceed k_min");
    if (nrefs < 1) throw Error("gap_statistic: nrefs must be at least 1");
    if (static_cast<std::size_t>(k_max - 1) > data.rows) {
        throw Error("gap_statistic: k up to " + std::to_string(k_max - 1) + " needs at least that many points");
    }

    const int count = k_max - k_min;
    GapResult result;
    result.records.resize(static_cast<std::size_t>(count));
    std::vector<std::vector<double>> ref_logs(static_cast<std::size_t>(count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));

    KMeansOptions km = opts.kmeans;
    if (!opts.parallel) km.exec = Exec::Serial;

#pragma omp parallel for schedule(dynamic, 1) if (opts.parallel)
    for (int idx = 0; idx < count; ++idx) {
        const auto u = static_cast<std::size_t>(idx);
        try {
            const int k = k_min + idx;
            const auto ku = static_cast<std::uint64_t>(k);
            double ref_sum = 0.0;
            for (int i = 0; i < nrefs; ++i) {
                const auto iu = static_cast<std::uint64_t>(i);
                Matrix ref = uniform_reference(data, derive_seed(seed, {seed_tag::gap, ku, iu}));
                const double inertia = kmeans_fit(ref, k, derive_seed(seed, {seed_tag::kmeans, ku, iu}), km).inertia;
                ref_sum += inertia;
                ref_logs[u].push_back(std::log(inertia));
            }
            const double data_inertia =
                kmeans_fit(data, k, derive_seed(seed, {seed_tag::kmeans, ku, static_cast<std::uint64_t>(nrefs)}), km)
                    .inertia;
            GapRecord& rec = result.records[u];
            rec.k = k;
            rec.ref_inertia = ref_sum / nrefs;
            rec.data_inertia = data_inertia;
            if (opts.formula == GapFormula::DispersionDifference) {
                const double diff = rec.ref_inertia - data_inertia;
                rec.gap = diff > 0.0 ? std::log(diff) : -std::numeric_limits<double>::infinity();
            } else {
                double mean_log = 0.0;
                for (double l : ref_logs[u]) mean_log += l;
                mean_log /= nrefs;
                double var = 0.0;
                for (double l : ref_logs[u]) var += (l - mean_log) * (l - mean_log);
                rec.sk = std::sqrt(var / nrefs) * std::sqrt(1.0 + 1.0 / nrefs);
                rec.gap = data_inertia > 0.0 ? mean_log - std::log(data_inertia)
                                             : std::numeric_limits<double>::infinity();
            }
        } catch (...) {
            errors[u] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    int best = -1;
    for (int i = 0; i < count; ++i) {
        const double g = result.records[static_cast<std::size_t>(i)].gap;
        if (g == -std::numeric_limits<double>::infinity()) continue;
        if (best < 0 || g > result.records[static_cast<std::size_t>(best)].gap) best = i;
    }
    if (best < 0) throw Error("gap_statistic: gap undefined for every k (data dispersion never below reference)");

    if (opts.formula == GapFormula::Classical) {
        for (int i = 0; i + 1 < count; ++i) {
            const auto& a = result.records[static_cast<std::size_t>(i)];
            const auto& b = result.records[static_cast<std::size_t>(i + 1)];
            if (a.gap >= b.gap - b.sk) {
                best = i;
                break;
            }
        }
    }
    result.chosen_k = result.records[static_cast<std::size_t>(best)].k;
    return result;
}

std::string format_cluster_model(const ClusterModel& m) {
    std::string out = "kmeans k=" + std::to_string(m.k) + " dim=" + std::to_string(m.dim) +
                      " inertia=" + format_double(m.inertia) + " iterations=" + std::to_string(m.iterations) + "\n";
    for (int c = 0; c < m.k; ++c) {
        bool first = true;
        for (double v : m.centroid(c)) {
            if (!first) out += ' ';
            out += format_double(v);
            first = false;
        }
        out += '\n';
    }
    return out;
}

ClusterModel parse_cluster_model(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    in >> tag;
    if (tag != "kmeans") throw ParseError("cluster model: expected 'kmeans' header");
    ClusterModel m;
    std::string tok;
    for (int i = 0; i < 4 && in >> tok; ++i) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError("cluster model: bad header field '" + tok + "'");
        auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "k") m.k = std::stoi(val);
        else if (key == "dim") m.dim = std::stoul(val);
        else if (key == "inertia") m.inertia = std::stod(val);
        else if (key == "iterations") m.iterations = std::stoi(val);
    }
    if (m.k < 1 || m.dim < 1) throw ParseError("cluster model: k and dim must be positive");
    m.centroids = Matrix(static_cast<std::size_t>(m.k), m.dim);
    for (auto& v : m.centroids.values()) {
        if (!(in >> tok)) throw ParseError("cluster model: truncated centroid rows");
        v = std::stod(tok);
    }
    return m;
}

}  // namespace locallearn
