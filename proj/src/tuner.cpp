#include "locallearn/tuner.hpp"

#include <algorithm>
#include <cmath>

#include "locallearn/metrics.hpp"
#include "locallearn/rng.hpp"

namespace locallearn {

ParamSpace svm_space() {
    return {{
        {"C", ParamKind::Continuous, 1.0, 50.0, {}},
        {"kernel", ParamKind::Categorical, 0, 0, {"linear", "poly", "rbf", "sigmoid"}},
        {"gamma", ParamKind::Continuous, 0.0, 1.0, {}},
        {"coef0", ParamKind::Continuous, 0.0, 1.0, {}},
    }};
}

ParamSpace knn_space() {
    return {{
        {"n_neighbors", ParamKind::Integer, 2.0, 10.0, {}},
        {"weights", ParamKind::Categorical, 0, 0, {"uniform", "distance"}},
    }};
}

ParamSpace space_for(LearnerKind kind) { return kind == LearnerKind::Svm ? svm_space() : knn_space(); }

namespace {

// Half-open box [lo, hi) of encodings for one slot.
std::pair<double, double> encoding_box(const ParamSpec& p) {
    switch (p.kind) {
        case ParamKind::Continuous: return {p.lo, p.hi};
        case ParamKind::Integer: return {p.lo, p.hi};
        case ParamKind::Categorical: return {0.0, static_cast<double>(p.categories.size())};
    }
    return {0, 0};
}

void check_length(const ParamSpace& space, std::span<const double> encoding) {
    if (encoding.size() != space.size()) {
        throw Error("encoding has " + std::to_string(encoding.size()) + " slots, space has " +
                    std::to_string(space.size()));
    }
}

}  // namespace

std::vector<double> decode(const ParamSpace& space, std::span<const double> encoding) {
    check_length(space, encoding);
    std::vector<double> out(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& p = space.params[i];
        const double e = encoding[i];
        switch (p.kind) {
            case ParamKind::Continuous: out[i] = std::clamp(e, p.lo, p.hi); break;
            case ParamKind::Integer: out[i] = std::clamp(std::round(e), p.lo, p.hi); break;
            case ParamKind::Categorical: {
                const double last = static_cast<double>(p.categories.size() - 1);
                out[i] = std::clamp(std::floor(e), 0.0, last);
                break;
            }
        }
    }
    return out;
}

std::vector<double> clamp_encoding(const ParamSpace& space, std::span<const double> encoding) {
    check_length(space, encoding);
    std::vector<double> out(encoding.begin(), encoding.end());
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& p = space.params[i];
        auto [lo, hi] = encoding_box(p);
        if (p.kind == ParamKind::Categorical) hi = std::nextafter(hi, lo);
        out[i] = std::clamp(out[i], lo, hi);
    }
    return out;
}

LearnerConfig config_from_values(LearnerKind kind, std::span<const double> values) {
    if (kind == LearnerKind::Svm) {
        if (values.size() != 4) throw Error("svm config needs 4 values");
        SvmConfig c;
        c.C = values[0];
        c.kernel = static_cast<KernelType>(static_cast<int>(values[1]));
        c.gamma = values[2];
        c.coef0 = values[3];
        return c;
    }
    if (values.size() != 2) throw Error("knn config needs 2 values");
    KnnConfig c;
    c.n_neighbors = static_cast<int>(values[0]);
    c.weights = static_cast<int>(values[1]) == 0 ? KnnWeights::Uniform : KnnWeights::Distance;
    return c;
}

LearnerConfig decode_config(LearnerKind kind, std::span<const double> encoding) {
    return config_from_values(kind, decode(space_for(kind), encoding));
}

std::vector<double> default_encoding(LearnerKind kind, std::size_t dim) {
    if (kind == LearnerKind::Svm) {
        const SvmConfig d;
        // category slots sit mid-interval so decode lands on them exactly
        return {d.C, static_cast<double>(static_cast<int>(d.kernel)) + 0.5, 1.0 / static_cast<double>(dim), d.coef0};
    }
    const KnnConfig d;
    return {static_cast<double>(d.n_neighbors), d.weights == KnnWeights::Uniform ? 0.5 : 1.5};
}

void DeSettings::validate() const {
    if (n < 4) throw Error("de: frontier size must be at least 4 (three distinct donors per slot)");
    if (!(cf >= 0.0 && cf <= 1.0)) throw Error("de: cf must lie in [0,1]");
    if (!(f > 0.0)) throw Error("de: f must be positive");
    if (lives < 1) throw Error("de: lives must be at least 1");
}

DeResult de_optimize(const ParamSpace& space, const Objective& objective, const DeSettings& settings,
                     std::uint64_t seed, const std::vector<std::vector<double>>& seeded) {
    settings.validate();
    if (space.size() == 0) throw Error("de: empty parameter space");
    Rng rng(seed);
    DeResult result;

    auto evaluate = [&](std::vector<double> enc) {
        Candidate c;
        c.encoding = clamp_encoding(space, enc);
        c.values = decode(space, c.encoding);
        c.score = objective(c);
        ++result.evaluations;
        return c;
    };

    const auto n = static_cast<std::size_t>(settings.n);
    std::vector<Candidate> frontier;
    frontier.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        if (s < seeded.size()) {
            frontier.push_back(evaluate(seeded[s]));
            continue;
        }
        std::vector<double> enc(space.size());
        for (std::size_t j = 0; j < space.size(); ++j) {
            const auto [lo, hi] = encoding_box(space.params[j]);
            enc[j] = lo + (hi - lo) * uniform01(rng);
        }
        frontier.push_back(evaluate(std::move(enc)));
    }
    result.initial_frontier = frontier;

    std::size_t best_idx = 0;
    for (std::size_t s = 1; s < n; ++s)
        if (frontier[s].score > frontier[best_idx].score) best_idx = s;
    result.best = frontier[best_idx];

    int lives = settings.lives;
    result.trace.push_back({0, result.best.score, lives});
    while (lives-- > 0) {
        ++result.generations;
        std::vector<Candidate> next;
        next.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Candidate& old = frontier[i];
            std::size_t pick[3];
            for (int t = 0; t < 3; ++t) {
                std::size_t c;
                do {
                    c = static_cast<std::size_t>(uniform_index(rng, n));
                } while (c == i || (t > 0 && c == pick[0]) || (t > 1 && c == pick[1]));
                pick[t] = c;
            }
            const auto& x = frontier[pick[0]].encoding;
            const auto& y = frontier[pick[1]].encoding;
            const auto& z = frontier[pick[2]].encoding;
            std::vector<double> trial = old.encoding;
            for (std::size_t j = 0; j < trial.size(); ++j)
                if (uniform01(rng) < settings.cf) trial[j] = x[j] + settings.f * (z[j] - y[j]);

            Candidate cand = evaluate(std::move(trial));
            next.push_back(cand.score > old.score ? std::move(cand) : old);
            if (next.back().score > result.best.score) {
                result.best = next.back();
                ++lives;
            }
        }
        frontier = std::move(next);
        result.trace.push_back({result.generations, result.best.score, lives});
    }
    return result;
}

double tuning_score(const VectorDataset& fit, const VectorDataset& tune, const LearnerConfig& config, Exec exec) {
    try {
        const auto model = fit_learner(fit, config, exec);
        const auto predicted = model.predict(tune.matrix(), exec);
        return macro_f1_present(tune.labels(), predicted);
    } catch (const Error&) {
        return 0.0;
    }
}

TuneResult tune_learner(const VectorDataset& train, LearnerKind kind, const DeSettings& settings,
                        std::uint64_t split_seed, Exec exec) {
    settings.validate();
    TuneResult out;
    out.config = default_config(kind);
    if (train.present_classes() < 2) {
        out.degenerate = true;
        out.warning = "tune: training data has a single class; using defaults";
        return out;
    }
    auto [fit_idx, tune_idx] = stratified_holdout(train, 10, split_seed);
    if (fit_idx.empty() || tune_idx.empty()) {
        out.degenerate = true;
        out.warning = "tune: " + std::to_string(train.size()) + " instances leave an empty 90/10 part; using defaults";
        return out;
    }
    const auto fit = train.subset(fit_idx);
    const auto tune = train.subset(tune_idx);
    if (fit.present_classes() < 2) {
        out.degenerate = true;
        out.warning = "tune: the 90% part has a single class; using defaults";
        return out;
    }

    const auto space = space_for(kind);
    Objective objective = [&](const Candidate& c) {
        return tuning_score(fit, tune, config_from_values(kind, c.values), exec);
    };
    auto de = de_optimize(space, objective, settings, derive_seed(split_seed, {seed_tag::de}),
                          {default_encoding(kind, train.dim())});
    out.config = config_from_values(kind, de.best.values);
    out.tuning_f1 = de.best.score;
    out.default_f1 = de.initial_frontier.front().score;
    out.search = std::move(de);
    return out;
}

}  // namespace locallearn
