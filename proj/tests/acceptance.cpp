// Acceptance checks. Run with a criterion id (1a, 1b, 2 ... 8) or with no
// argument for all of them. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "locallearn/classifiers.hpp"
#include "locallearn/clustering.hpp"
#include "locallearn/experiment.hpp"
#include "locallearn/metrics.hpp"
#include "locallearn/pipeline.hpp"
#include "locallearn/rng.hpp"
#include "locallearn/stats.hpp"
#include "locallearn/synth.hpp"
#include "locallearn/tuner.hpp"

using namespace locallearn;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double macro_f1(const std::vector<Label>& actual, const std::vector<Label>& predicted, int n) {
    return metrics(confusion(actual, predicted, n)).macro.f1;
}

// 8000 instances split 6400 / 1600, the shape of the original training and test sets.
struct SpeedupData {
    VectorDataset train, test;
};

SpeedupData speedup_data() {
    SynthSpec spec;
    spec.n = 8000;
    spec.d = 200;
    spec.classes = 4;
    spec.blobs = 8;
    spec.seed = 1;
    const auto all = make_synthetic(spec);
    const auto [train_idx, test_idx] = stratified_holdout(all, 5, 2024);
    return {all.subset(train_idx), all.subset(test_idx)};
}

PipelineConfig pipeline(Mode m, int width) {
    PipelineConfig c;
    c.mode = m;
    c.seed = 7;
    c.parallel_width = width;
    return c;
}

Outcome criterion_1a() {
    const auto d = speedup_data();
    const auto local = fit_pipeline(d.train, pipeline(Mode::KMeansDeSvm, 1));
    const auto global = fit_pipeline(d.train, pipeline(Mode::DeSvm, 1));
    const double f_local = macro_f1(d.test.labels(), predict_pipeline(local, d.test), 4);
    const double f_global = macro_f1(d.test.labels(), predict_pipeline(global, d.test), 4);
    const double ratio = local.timing.total_seconds / global.timing.total_seconds;
    const bool fast = ratio <= 0.5;
    const bool close = std::abs(f_local - f_global) * 100.0 <= 3.0;
    return {fast && close,
            fmt("sequential KMeans_DE_SVM %.1fs (k=%d) vs DE_SVM %.1fs, ratio %.3f (need <= 0.5); "
                "macro F1 %.2f vs %.2f (need within 3 points)",
                local.timing.total_seconds, local.cluster_count(), global.timing.total_seconds, ratio,
                100 * f_local, 100 * f_global)};
}

Outcome criterion_1b() {
    const auto d = speedup_data();
    const auto seq = fit_pipeline(d.train, pipeline(Mode::KMeansDeSvm, 1));
    omp_set_num_threads(8);
    const auto par = fit_pipeline(d.train, pipeline(Mode::KMeansDeSvm, 8));
    const double ratio = par.timing.total_seconds / seq.timing.total_seconds;
    const int k = seq.cluster_count();
    std::string detail = fmt("width-8 KMeans_DE_SVM %.1fs vs sequential %.1fs, ratio %.3f (need <= 0.5), k=%d, "
                             "%d hardware threads",
                             par.timing.total_seconds, seq.timing.total_seconds, ratio, k, omp_get_num_procs());
    if (k < 8) return {false, detail + "; k < 8 so the precondition of this criterion was not met"};
    return {ratio <= 0.5, detail};
}

Outcome criterion_2() {
    int hits = 0;
    std::string ks;
    for (unsigned run = 0; run < 20; ++run) {
        std::mt19937_64 rng(1000 + run);
        std::normal_distribution<double> g(0.0, 1.0);
        // equilateral triangle with side 12: centres 12 sigma apart
        const double cx[3] = {0.0, 12.0, 6.0}, cy[3] = {0.0, 0.0, 12.0 * std::sqrt(3.0) / 2.0};
        Matrix m(300, 2);
        for (std::size_t i = 0; i < 300; ++i) {
            m(i, 0) = cx[i % 3] + g(rng);
            m(i, 1) = cy[i % 3] + g(rng);
        }
        const auto r = gap_statistic(m, 1, 8, 3, run);
        hits += r.chosen_k == 3;
        ks += std::to_string(r.chosen_k);
    }
    return {hits >= 16, fmt("k=3 chosen in %d of 20 seeded runs (need >= 16); choices %s", hits, ks.c_str())};
}

Label brute_knn(const VectorDataset& train, std::span<const double> q, int k, KnnWeights w) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < train.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) s += (train.features(i)[j] - q[j]) * (train.features(i)[j] - q[j]);
        d.emplace_back(s, i);
    }
    std::sort(d.begin(), d.end());
    std::map<Label, double> votes;
    bool exact = false;
    for (int t = 0; t < k; ++t) exact = exact || d[static_cast<std::size_t>(t)].first == 0.0;
    for (int t = 0; t < k; ++t) {
        const auto [s, i] = d[static_cast<std::size_t>(t)];
        const double v = w == KnnWeights::Uniform ? 1.0 : exact ? (s == 0.0 ? 1.0 : 0.0) : 1.0 / std::sqrt(s);
        votes[train.label(i)] += v;
    }
    Label best = 1;
    double top = -1;
    for (auto [l, v] : votes)
        if (v > top) {
            top = v;
            best = l;
        }
    return best;
}

Outcome criterion_3() {
    // KNN against the brute-force oracle
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    VectorDataset train(4, 3);
    std::vector<double> x(4);
    for (int i = 0; i < 300; ++i) {
        for (auto& v : x) v = u(rng);
        train.add("t", x, static_cast<Label>(1 + rng() % 3));
    }
    int knn_total = 0, knn_match = 0;
    for (auto w : {KnnWeights::Uniform, KnnWeights::Distance}) {
        const auto model = knn_fit(train, {5, w});
        for (int q = 0; q < 1000; ++q) {
            for (auto& v : x) v = u(rng);
            ++knn_total;
            knn_match += knn_predict(model, x) == brute_knn(train, x, 5, w);
        }
    }

    int linear_ok = 0, xor_ok = 0;
    double worst_xor = 1.0;
    for (unsigned seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 r(seed);
        std::uniform_real_distribution<double> box(-3, 3);
        VectorDataset sep(2, 2);
        while (sep.size() < 100) {
            const double a = box(r), b = box(r), s = a - 0.7 * b + 0.4;
            if (std::abs(s) < 1.0) continue;
            const std::vector<double> p{a, b};
            sep.add("s", p, s > 0 ? 1 : 2);
        }
        SvmConfig lin;
        lin.kernel = KernelType::Linear;
        const auto lm = svm_fit(sep, lin);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < sep.size(); ++i) hits += lm.predict(sep.features(i)) == sep.label(i);
        linear_ok += hits == sep.size();

        std::normal_distribution<double> jit(0.0, 0.1);
        VectorDataset xr(2, 2);
        const double cx[4] = {0, 1, 0, 1}, cy[4] = {0, 1, 1, 0};
        for (int c = 0; c < 25; ++c)
            for (int k = 0; k < 4; ++k) {
                const std::vector<double> p{cx[k] + jit(r), cy[k] + jit(r)};
                xr.add("x", p, k < 2 ? 1 : 2);
            }
        SvmConfig rbf;
        rbf.gamma = 1.0;
        const auto xm = svm_fit(xr, rbf);
        hits = 0;
        for (std::size_t i = 0; i < xr.size(); ++i) hits += xm.predict(xr.features(i)) == xr.label(i);
        const double acc = static_cast<double>(hits) / static_cast<double>(xr.size());
        worst_xor = std::min(worst_xor, acc);
        xor_ok += acc >= 0.95;
    }
    return {knn_match == knn_total && linear_ok == 10 && xor_ok == 10,
            fmt("KNN oracle agreement %d/%d; linear separable 100%% on %d/10 seeds; XOR rbf >= 95%% on %d/10 seeds "
                "(worst %.1f%%)",
                knn_match, knn_total, linear_ok, xor_ok, 100 * worst_xor)};
}

Outcome criterion_4() {
    ParamSpace space;
    for (int i = 0; i < 3; ++i) space.params.push_back({"x", ParamKind::Continuous, -5, 5, {}});
    int near = 0, elitist = 0;
    double worst = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        double max_seen = -1e300;
        Objective f = [&](const Candidate& c) {
            double s = 0;
            for (double v : c.values) s += v * v;
            max_seen = std::max(max_seen, -s);
            return -s;
        };
        const auto r = de_optimize(space, f, DeSettings{}, seed);
        double dist = 0;
        for (double v : r.best.values) dist += v * v;
        dist = std::sqrt(dist);
        worst = std::max(worst, dist);
        near += dist <= 0.1;
        double frontier = -1e300;
        for (const auto& c : r.initial_frontier) frontier = std::max(frontier, c.score);
        elitist += r.best.score >= frontier && r.best.score == max_seen;
    }
    return {near == 10 && elitist == 10,
            fmt("within 0.1 of the optimum on %d/10 seeds (worst distance %.2e); elitism exact on %d/10", near, worst,
                elitist)};
}

Outcome criterion_5() {
    int runs = 0, ok = 0;
    double margin = 1e300;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        SynthSpec spec;
        spec.n = 400;
        spec.d = 10;
        spec.blobs = 2;
        spec.sigma = 1.2;
        spec.seed = seed;
        const auto data = make_synthetic(spec);
        for (auto kind : {LearnerKind::Svm, LearnerKind::Knn}) {
            DeSettings s;
            s.lives = 10;
            const auto r = tune_learner(data, kind, s, seed);
            const auto [fit_idx, tune_idx] = stratified_holdout(data, 10, seed);
            const auto fit = data.subset(fit_idx), tune = data.subset(tune_idx);
            const double tuned = tuning_score(fit, tune, r.config, Exec::Parallel);
            const double dflt = tuning_score(fit, tune, default_config(kind), Exec::Parallel);
            ++runs;
            ok += !r.degenerate && tuned >= dflt && tuned == r.tuning_f1;
            margin = std::min(margin, tuned - dflt);
        }
    }
    return {ok == runs, fmt("tuned >= default on the tuning split in %d/%d runs (smallest margin %.4f)", ok, runs, margin)};
}

Outcome criterion_6() {
    ConfusionMatrix cm(2);
    cm.add(1, 1, 8);
    cm.add(1, 2, 2);
    cm.add(2, 1, 3);
    cm.add(2, 2, 7);
    const auto m = metrics(cm);
    const double p = 8.0 / 11.0, r = 0.8, f = 2 * p * r / (p + r);
    const bool hand = std::abs(m.per_class[0].precision - p) <= 1e-9 && std::abs(m.per_class[0].recall - r) <= 1e-9 &&
                      std::abs(m.per_class[0].f1 - f) <= 1e-9;
    ConfusionMatrix diag(4);
    for (Label c = 1; c <= 4; ++c) diag.add(c, c, 5);
    const auto dm = metrics(diag);
    bool ones = dm.macro.precision == 1.0 && dm.macro.recall == 1.0 && dm.macro.f1 == 1.0;
    for (const auto& c : dm.per_class) ones = ones && c.precision == 1.0 && c.recall == 1.0 && c.f1 == 1.0;

    EvalReport rep;
    rep.mode = "DE_SVM";
    rep.n_classes = 4;
    rep.class_names = {"Duplicate", "Direct link", "Indirect link", "Isolated"};
    rep.mean_per_class = {{0, 0, 0.92}, {0, 0, 0.91}, {0, 0, 0.98}, {0, 0, 0.93}};
    rep.mean_macro = {0, 0, 0.935};
    std::istringstream table(format_class_table({rep}));
    std::vector<std::string> rows;
    for (std::string l; std::getline(table, l);) rows.push_back(l);
    const std::vector<std::pair<std::string, std::string>> want{
        {"Duplicate", "92"}, {"Direct link", "91"}, {"Indirect link", "98"}, {"Isolated", "93"}, {"Overall", "94"}};
    bool layout = rows.size() == 7 && rows[0].rfind("Class", 0) == 0 && rows[1].find("DE_SVM") != std::string::npos;
    for (std::size_t i = 0; layout && i < want.size(); ++i) {
        const auto& row = rows[i + 2];
        layout = row.rfind(want[i].first, 0) == 0 && row.substr(row.size() - 2) == want[i].second;
    }
    return {hand && ones && layout,
            fmt("hand-computed 2x2 metrics %s; diagonal exactly 1.0 %s; per-class + Overall x100 table %s",
                hand ? "match" : "differ", ones ? "yes" : "no", layout ? "ok" : "malformed")};
}

Outcome criterion_7() {
    const std::vector<Treatment> disjoint{{"A", {0.90, 0.91, 0.92}}, {"B", {0.50, 0.51, 0.52}}};
    const std::vector<Treatment> same{{"A", {0.7, 0.8, 0.9}}, {"B", {0.7, 0.8, 0.9}}};
    bool split = true, shared = true, determ = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = scott_knott(disjoint, seed);
        const auto b = scott_knott(disjoint, seed);
        split = split && a[0].rank != a[1].rank;
        determ = determ && a[0].rank == b[0].rank && a[1].rank == b[1].rank;
        const auto s = scott_knott(same, seed);
        shared = shared && s[0].rank == s[1].rank;
    }
    std::mt19937_64 rng(7);
    int exact = 0, total = 0;
    for (int trial = 0; trial < 5000; ++trial) {
        const std::size_t m = 1 + rng() % 20, n = 1 + rng() % 20;
        std::vector<double> xs(m), ys(n);
        for (auto& v : xs) v = static_cast<double>(rng() % 9);
        for (auto& v : ys) v = static_cast<double>(rng() % 9);
        long long gt = 0, lt = 0;
        for (double x : xs)
            for (double y : ys) {
                gt += x > y;
                lt += x < y;
            }
        ++total;
        exact += cliffs_delta(xs, ys) == static_cast<double>(gt - lt) / static_cast<double>(m * n);
    }
    return {split && shared && determ && exact == total,
            fmt("disjoint samples split %s; identical share a rank %s; deterministic %s; cliffs_delta exact on %d/%d",
                split ? "yes" : "no", shared ? "yes" : "no", determ ? "yes" : "no", exact, total)};
}

Outcome criterion_8() {
    SynthSpec spec;
    spec.n = 1200;
    spec.d = 20;
    spec.sigma = 1.0;
    spec.seed = 4;
    const auto all = make_synthetic(spec);
    const auto [train_idx, test_idx] = stratified_holdout(all, 4, 5);
    const auto train = all.subset(train_idx), test = all.subset(test_idx);
    auto local = pipeline(Mode::KMeansSvm, 1);
    local.forced_k = 1;
    const auto a = predict_pipeline(fit_pipeline(train, local), test);
    const auto b = predict_pipeline(fit_pipeline(train, pipeline(Mode::Svm, 1)), test);
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
    return {same == a.size(), fmt("identical predictions on %zu/%zu test points", same, a.size())};
}

const std::vector<std::pair<std::string, std::pair<std::string, std::function<Outcome()>>>> kCriteria{
    {"1a", {"local-vs-global speedup", criterion_1a}},
    {"1b", {"parallel local training speedup", criterion_1b}},
    {"2", {"GAP selects three blobs", criterion_2}},
    {"3", {"classifier oracles", criterion_3}},
    {"4", {"DE on the sphere", criterion_4}},
    {"5", {"tuning never worse than default", criterion_5}},
    {"6", {"metrics and table layout", criterion_6}},
    {"7", {"Scott-Knott and Cliff's delta", criterion_7}},
    {"8", {"mode reduction", criterion_8}},
};

}  // namespace

int main(int argc, char** argv) {
    const std::string want = argc > 1 ? argv[1] : "";
    bool all_pass = true, found = false;
    for (const auto& [id, entry] : kCriteria) {
        if (!want.empty() && want != id) continue;
        found = true;
        Outcome o;
        try {
            o = entry.second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s criterion %s (%s): %s\n", o.pass ? "PASS" : "FAIL", id.c_str(), entry.first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && o.pass;
    }
    if (!found) {
        std::fprintf(stderr, "unknown criterion '%s'\n", want.c_str());
        return 2;
    }
    return all_pass ? 0 : 1;
}
