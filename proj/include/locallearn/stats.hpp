#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace locallearn {

/// (#{x > y} - #{x < y}) / (|xs| |ys|) over all pairs.
double cliffs_delta(std::span<const double> xs, std::span<const double> ys);

double median(std::span<const double> xs);
double mean(std::span<const double> xs);

struct Treatment {
    std::string name;
    std::vector<double> scores;
};

struct ScottKnottOptions {
    int resamples = 512;
    double alpha = 0.05;
    double small_effect = 0.147;
    bool higher_is_better = true;
};

/// Bootstrap test that two samples have different means: both samples are shifted
/// onto the pooled mean, resampled with replacement, and the Welch t statistic of
/// each resample is compared with the observed one.
bool bootstrap_different(std::span<const double> xs, std::span<const double> ys, std::uint64_t seed,
                         const ScottKnottOptions& opts = {});

/// Cut position in [1, groups.size()) maximizing the between-part expected-value
/// change over the pooled scores. Groups are taken in the given order.
std::size_t best_split(const std::vector<std::vector<double>>& groups);

struct RankedTreatment {
    std::string name;
    int rank = 0;  // 1 = best
    double median = 0.0;
    double mean = 0.0;
};

/// Scott-Knott ranking. Treatments are ordered best first by median (then mean,
/// then name) and split recursively; a split stands only when the bootstrap test
/// and Cliff's delta both separate the halves. Output follows input order.
std::vector<RankedTreatment> scott_knott(const std::vector<Treatment>& treatments, std::uint64_t seed,
                                         const ScottKnottOptions& opts = {});

}  // namespace locallearn
