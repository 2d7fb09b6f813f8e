#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locallearn/classifiers.hpp"
#include "locallearn/dataset.hpp"

namespace locallearn {

enum class ParamKind { Continuous, Integer, Categorical };

struct ParamSpec {
    std::string name;
    ParamKind kind = ParamKind::Continuous;
    double lo = 0.0;  // numeric range; unused for categorical
    double hi = 0.0;
    std::vector<std::string> categories;
};

struct ParamSpace {
    std::vector<ParamSpec> params;
    std::size_t size() const { return params.size(); }
};

/// C in [1,50], kernel in {linear,poly,rbf,sigmoid}, gamma in [0,1], coef0 in [0,1].
ParamSpace svm_space();
/// n_neighbors in [2,10], weights in {uniform,distance}.
ParamSpace knn_space();
ParamSpace space_for(LearnerKind kind);

/// Maps an encoding to parameter values: continuous slots are clamped to their
/// range, integer slots rounded then clamped, categorical slots floored to a
/// category index and clamped. Total for any finite input.
std::vector<double> decode(const ParamSpace& space, std::span<const double> encoding);
/// Clamps an encoding into the box that decode maps onto the space without clipping.
std::vector<double> clamp_encoding(const ParamSpace& space, std::span<const double> encoding);

LearnerConfig config_from_values(LearnerKind kind, std::span<const double> values);
LearnerConfig decode_config(LearnerKind kind, std::span<const double> encoding);
/// Encoding that decodes to the learner's default config (gamma = 1/dim for SVM).
std::vector<double> default_encoding(LearnerKind kind, std::size_t dim);

struct DeSettings {
    int n = 10;        // frontier size
    double cf = 0.3;   // crossover probability
    double f = 0.75;   // differential weight
    int lives = 60;

    void validate() const;
};

struct Candidate {
    std::vector<double> encoding;
    std::vector<double> values;  // decoded
    double score = 0.0;
};

struct DeTraceRecord {
    int generation = 0;
    double best_score = 0.0;
    int lives = 0;
};

struct DeResult {
    Candidate best;
    std::vector<Candidate> initial_frontier;
    long long evaluations = 0;
    int generations = 0;
    std::vector<DeTraceRecord> trace;
};

using Objective = std::function<double(const Candidate&)>;

/// Differential evolution maximizing `objective`. Every generation walks the
/// frontier once: each slot's trial copies the incumbent and, with probability cf
/// per attribute, extrapolates x + f (z - y) from three other members. A trial
/// replaces its incumbent only when strictly better. One life is spent per
/// generation and each strict improvement of the global best earns one back.
///
/// `seeded` encodings fill the first frontier slots; the rest are uniform draws.
DeResult de_optimize(const ParamSpace& space, const Objective& objective, const DeSettings& settings,
                     std::uint64_t seed, const std::vector<std::vector<double>>& seeded = {});

struct TuneResult {
    LearnerConfig config;
    double tuning_f1 = 0.0;
    double default_f1 = 0.0;
    bool degenerate = false;
    std::string warning;
    std::optional<DeResult> search;
};

/// Tunes a learner on a stratified 90/10 split of `train`: models are fit on the
/// 90% part and scored by macro F1 on the 10% part. The default config is always
/// part of the initial frontier. A split that leaves either part empty or the fit
/// part with one class returns the default config with a warning.
TuneResult tune_learner(const VectorDataset& train, LearnerKind kind, const DeSettings& settings,
                        std::uint64_t split_seed, Exec exec = Exec::Parallel);

/// Macro F1 on `tune` of the given config fit on `fit`. Errors during fitting score 0.
double tuning_score(const VectorDataset& fit, const VectorDataset& tune, const LearnerConfig& config, Exec exec);

}  // namespace locallearn
