#include "locallearn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "locallearn/common.hpp"
#include "locallearn/rng.hpp"

namespace locallearn {

double cliffs_delta(std::span<const double> xs, std::span<const double> ys) {
    if (xs.empty() || ys.empty()) throw Error("cliffs_delta: empty sample");
    std::vector<double> sorted(ys.begin(), ys.end());
    std::sort(sorted.begin(), sorted.end());
    long long more = 0, less = 0;
    for (double x : xs) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x);
        const auto hi = std::upper_bound(lo, sorted.end(), x);
        more += lo - sorted.begin();
        less += sorted.end() - hi;
    }
    return static_cast<double>(more - less) / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

double median(std::span<const double> xs) {
    if (xs.empty()) throw Error("median: empty sample");
    std::vector<double> v(xs.begin(), xs.end());
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(std::span<const double> xs) {
    if (xs.empty()) throw Error("mean: empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

namespace {

double variance(std::span<const double> xs, double mu) {
    if (xs.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return s / static_cast<double>(xs.size() - 1);
}

double welch_t(std::span<const double> xs, std::span<const double> ys) {
    const double mx = mean(xs), my = mean(ys);
    const double se2 = variance(xs, mx) / static_cast<double>(xs.size()) + variance(ys, my) / static_cast<double>(ys.size());
    const double diff = mx - my;
    if (se2 <= 0.0) {
        if (diff == 0.0) return 0.0;
        return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return diff / std::sqrt(se2);
}

std::vector<double> concat(const std::vector<std::vector<double>>& groups, std::size_t lo, std::size_t hi) {
    std::vector<double> out;
    for (std::size_t i = lo; i < hi; ++i) out.insert(out.end(), groups[i].begin(), groups[i].end());
    return out;
}

}  // namespace

bool bootstrap_different(std::span<const double> xs, std::span<const double> ys, std::uint64_t seed,
                         const ScottKnottOptions& opts) {
    if (xs.empty() || ys.empty()) throw Error("bootstrap: empty sample");
    if (opts.resamples < 1) throw Error("bootstrap: resamples must be positive");
    const double observed = std::abs(welch_t(xs, ys));
    if (observed == 0.0) return false;

    const double mx = mean(xs), my = mean(ys);
    const double pooled = (mx * static_cast<double>(xs.size()) + my * static_cast<double>(ys.size())) /
                          static_cast<double>(xs.size() + ys.size());
    std::vector<double> sx(xs.size()), sy(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sx[i] = xs[i] - mx + pooled;
    for (std::size_t i = 0; i < ys.size(); ++i) sy[i] = ys[i] - my + pooled;

    Rng rng(seed);
    std::vector<double> bx(xs.size()), by(ys.size());
    int extreme = 0;
    for (int b = 0; b < opts.resamples; ++b) {
        for (auto& v : bx) v = sx[uniform_index(rng, sx.size())];
        for (auto& v : by) v = sy[uniform_index(rng, sy.size())];
        if (std::abs(welch_t(bx, by)) >= observed) ++extreme;
    }
    return static_cast<double>(extreme) / static_cast<double>(opts.resamples) < opts.alpha;
}

std::size_t best_split(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw Error("best_split: need at least two groups");
    const auto all = concat(groups, 0, groups.size());
    const double mu = mean(all);
    const auto n = static_cast<double>(all.size());
    std::size_t best = 1;
    double best_gain = -1.0;
    for (std::size_t cut = 1; cut < groups.size(); ++cut) {
        const auto left = concat(groups, 0, cut);
        const auto right = concat(groups, cut, groups.size());
        const double ml = mean(left), mr = mean(right);
        const double gain = static_cast<double>(left.size()) / n * (ml - mu) * (ml - mu) +
                            static_cast<double>(right.size()) / n * (mr - mu) * (mr - mu);
        if (gain > best_gain) {
            best_gain = gain;
            best = cut;
        }
    }
    return best;
}

std::vector<RankedTreatment> scott_knott(const std::vector<Treatment>& treatments, std::uint64_t seed,
                                         const ScottKnottOptions& opts) {
    std::vector<RankedTreatment> out(treatments.size());
    for (std::size_t i = 0; i < treatments.size(); ++i) {
        if (treatments[i].scores.empty()) throw Error("scott_knott: treatment '" + treatments[i].name + "' has no scores");
        out[i].name = treatments[i].name;
        out[i].median = median(treatments[i].scores);
        out[i].mean = mean(treatments[i].scores);
    }
    std::vector<std::size_t> order(treatments.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double sign = opts.higher_is_better ? 1.0 : -1.0;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ma = sign * out[a].median, mb = sign * out[b].median;
        if (ma != mb) return ma > mb;
        const double ea = sign * out[a].mean, eb = sign * out[b].mean;
        if (ea != eb) return ea > eb;
        return out[a].name < out[b].name;
    });

    std::vector<std::vector<double>> groups;
    for (auto i : order) groups.push_back(treatments[i].scores);

    int next_rank = 1;
    // recursion over [lo, hi) in best-first order; leaves are numbered left to right
    auto recurse = [&](auto&& self, std::size_t lo, std::size_t hi) -> void {
        if (hi - lo >= 2) {
            const std::vector<std::vector<double>> part(groups.begin() + static_cast<std::ptrdiff_t>(lo),
                                                        groups.begin() + static_cast<std::ptrdiff_t>(hi));
            const std::size_t cut = lo + best_split(part);
            const auto left = concat(groups, lo, cut);
            const auto right = concat(groups, cut, hi);
            const bool large = std::abs(cliffs_delta(left, right)) >= opts.small_effect;
            if (large && bootstrap_different(left, right, derive_seed(seed, {seed_tag::bootstrap, lo, cut, hi}), opts)) {
                self(self, lo, cut);
                self(self, cut, hi);
                return;
            }
        }
        for (std::size_t i = lo; i < hi; ++i) out[order[i]].rank = next_rank;
        ++next_rank;
    };
    if (!order.empty()) recurse(recurse, 0, order.size());
    return out;
}

}  // namespace locallearn
