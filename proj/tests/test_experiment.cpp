#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "locallearn/experiment.hpp"
#include "locallearn/synth.hpp"
#include "test_util.hpp"

using namespace locallearn;

namespace {

VectorDataset separable4() { return testutil::blobs({{0, 0}, {20, 0}, {0, 20}, {20, 20}}, 15, 0.5, 3); }

std::vector<PipelineConfig> configs(std::initializer_list<Mode> modes) {
    std::vector<PipelineConfig> out;
    for (auto m : modes) {
        PipelineConfig c;
        c.mode = m;
        c.de.lives = 2;
        c.gap.k_min = 2;
        c.gap.k_max = 5;
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string l;
    while (std::getline(in, l)) out.push_back(l);
    return out;
}

}  // namespace

TEST(Experiment, KnnOnSeparableDataIsPerfect) {
    ExperimentSettings s;
    s.folds = 5;
    s.repeats = 2;
    const auto r = run_experiment(separable4(), configs({Mode::Knn}), s);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].folds.size(), 10u);
    EXPECT_NEAR(r[0].mean_macro.f1, 1.0, 1e-12);
    for (const auto& f : r[0].folds) EXPECT_EQ(f.cm.total(), 12);
}

TEST(Experiment, ModesShareSplitsAndRowCount) {
    ExperimentSettings s;
    s.folds = 3;
    s.repeats = 2;
    const auto r = run_experiment(separable4(), configs({Mode::Knn, Mode::KMeansSvm, Mode::DeKnn}), s);
    ASSERT_EQ(r.size(), 3u);
    std::size_t rows = 0;
    for (const auto& rep : r) rows += rep.folds.size();
    EXPECT_EQ(rows, 3u * 2u * 3u);
    for (std::size_t i = 0; i < r[0].folds.size(); ++i) {
        EXPECT_EQ(r[0].folds[i].repeat, r[1].folds[i].repeat);
        EXPECT_EQ(r[0].folds[i].fold, r[1].folds[i].fold);
        EXPECT_EQ(r[0].folds[i].cm.total(), r[2].folds[i].cm.total());
    }
    EXPECT_THROW(run_experiment(separable4(), {}, s), Error);
}

TEST(Experiment, MetricTablesAreReproducible) {
    ExperimentSettings s;
    s.folds = 3;
    s.repeats = 1;
    SynthSpec spec;
    spec.n = 120;
    spec.d = 5;
    spec.blobs = 3;
    spec.sigma = 1.5;
    const auto data = make_synthetic(spec);
    auto a = run_experiment(data, configs({Mode::Svm, Mode::KMeansKnn}), s);
    auto b = run_experiment(data, configs({Mode::Svm, Mode::KMeansKnn}), s);
    rank_reports(a, 1);
    rank_reports(b, 1);
    EXPECT_EQ(format_metrics_table(a), format_metrics_table(b));
    EXPECT_EQ(format_class_table(a), format_class_table(b));
}

TEST(Reports, ClassTableLayout) {
    EvalReport r;
    r.mode = "DE_SVM";
    r.n_classes = 4;
    r.class_names = {"Duplicate", "Direct link", "Indirect link", "Isolated"};
    r.mean_per_class = {{0, 0, 0.92}, {0, 0, 0.914}, {0, 0, 0.976}, {0, 0, 0.93}};
    r.mean_macro = {0, 0, 0.935};
    const auto t = lines(format_class_table({r}));
    ASSERT_EQ(t.size(), 7u);
    EXPECT_EQ(t[0].rfind("Class", 0), 0u);
    EXPECT_NE(t[1].find("DE_SVM"), std::string::npos);
    const std::vector<std::pair<std::string, std::string>> rows{
        {"Duplicate", "92"}, {"Direct link", "91"}, {"Indirect link", "98"}, {"Isolated", "93"}, {"Overall", "94"}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(t[i + 2].rfind(rows[i].first, 0), 0u) << t[i + 2];
        EXPECT_EQ(t[i + 2].substr(t[i + 2].size() - 2), rows[i].second) << t[i + 2];
    }
}

TEST(Reports, DelimitedJsonAndPlotOutputs) {
    ExperimentSettings s;
    s.folds = 2;
    s.repeats = 1;
    auto r = run_experiment(separable4(), configs({Mode::Knn, Mode::KMeansKnn}), s);
    rank_reports(r, 3);
    const auto report = lines(format_report_table(r));
    EXPECT_EQ(report[0], "mode\tclass\tprecision\trecall\tf1\trank\ttrain_seconds");
    EXPECT_EQ(report.size(), 1u + 2u * 5u);
    const auto metrics = lines(format_metrics_table(r));
    EXPECT_EQ(metrics[0], "mode\tclass\tprecision\trecall\tf1\trank");

    const auto doc = nlohmann::json::parse(format_report_json(r));
    ASSERT_EQ(doc.size(), 2u);
    EXPECT_EQ(doc[0]["mode"], "KNN");
    EXPECT_EQ(doc[1]["folds"].size(), 2u);
    EXPECT_EQ(doc[0]["classes"].size(), 4u);

    const auto plot = lines(format_plot_data(r));
    ASSERT_EQ(plot.size(), 2u);
    for (const auto& l : plot) {
        const auto j = nlohmann::json::parse(l);
        EXPECT_TRUE(j.contains("mode"));
        EXPECT_TRUE(j.contains("seconds"));
        EXPECT_TRUE(j.contains("f1"));
    }
}

TEST(Reports, ClassNames) {
    EXPECT_EQ(class_names_for(separable4())[1], "Direct link");
    EXPECT_EQ(class_names_for(testutil::random_dataset(5, 1, 3, 1))[2], "class 3");
    const auto named = parse_dataset("#dim=1 classes=2\na,dog,0\nb,cat,1\n");
    EXPECT_EQ(class_names_for(named), (std::vector<std::string>{"cat", "dog"}));
}

TEST(Synth, ShapeBalanceAndDeterminism) {
    SynthSpec spec;
    spec.n = 400;
    spec.d = 20;
    const auto a = make_synthetic(spec);
    const auto b = make_synthetic(spec);
    EXPECT_EQ(a.size(), 400u);
    EXPECT_EQ(a.dim(), 20u);
    EXPECT_EQ(format_dataset(a), format_dataset(b));
    for (int c = 1; c <= 4; ++c) EXPECT_EQ(a.class_counts()[static_cast<std::size_t>(c)], 100u);
    spec.seed = 2;
    EXPECT_NE(format_dataset(make_synthetic(spec)), format_dataset(a));
}

TEST(Synth, ZeroSigmaDuplicatesCentroids) {
    SynthSpec spec;
    spec.n = 64;
    spec.d = 3;
    spec.blobs = 2;
    spec.sigma = 0;
    const auto d = make_synthetic(spec);
    const std::size_t period = 4 * 2;
    for (std::size_t i = period; i < d.size(); ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(d.features(i)[j], d.features(i % period)[j]);
}

TEST(Synth, InvalidArguments) {
    SynthSpec spec;
    spec.n = 10;
    EXPECT_THROW(make_synthetic(spec), Error);
    spec = {};
    spec.sigma = -1;
    EXPECT_THROW(make_synthetic(spec), Error);
    spec = {};
    spec.classes = 1;
    EXPECT_THROW(make_synthetic(spec), Error);
}
