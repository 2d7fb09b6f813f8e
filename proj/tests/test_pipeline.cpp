#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>

#include "locallearn/pipeline.hpp"
#include "test_util.hpp"

using namespace locallearn;

namespace {

VectorDataset three_blobs(unsigned seed, std::size_t per_blob = 40) {
    return testutil::blobs({{0, 0, 0}, {10, 0, 0}, {0, 10, 5}}, per_blob, 0.5, seed);
}

// Four blobs, each holding two classes, so local problems are non-trivial.
VectorDataset mixed_blobs(unsigned seed) {
    const auto base = testutil::blobs({{0, 0}, {8, 0}, {0, 8}, {8, 8}}, 30, 1.0, seed);
    VectorDataset d(2, 2);
    for (std::size_t i = 0; i < base.size(); ++i) d.add(base.id(i), base.features(i), static_cast<Label>((i / 4) % 2 + 1));
    return d;
}

PipelineConfig quick(Mode m) {
    PipelineConfig c;
    c.mode = m;
    c.gap.k_min = 2;
    c.gap.k_max = 6;
    c.de.lives = 3;
    c.seed = 11;
    return c;
}

}  // namespace

TEST(Modes, NamesRoundTrip) {
    ASSERT_EQ(all_modes().size(), 8u);
    for (auto m : all_modes()) EXPECT_EQ(parse_mode(mode_name(m)), m);
    EXPECT_EQ(mode_name(Mode::KMeansDeSvm), "KMeans_DE_SVM");
    EXPECT_TRUE(is_local(Mode::KMeansKnn));
    EXPECT_FALSE(is_local(Mode::DeSvm));
    EXPECT_TRUE(is_tuned(Mode::DeKnn));
    EXPECT_EQ(learner_of(Mode::KMeansDeKnn), LearnerKind::Knn);
    EXPECT_THROW(parse_mode("CNN"), Error);
}

TEST(Pipeline, BlobPerClassIsRecoveredAndPredictedPerfectly) {
    const auto train = three_blobs(1);
    const auto test = three_blobs(2, 20);
    const auto model = fit_pipeline(train, quick(Mode::KMeansDeSvm));
    ASSERT_TRUE(model.clusters.has_value());
    EXPECT_EQ(model.cluster_count(), 3);
    const auto pred = predict_pipeline(model, test);
    for (std::size_t i = 0; i < test.size(); ++i) EXPECT_EQ(pred[i], test.label(i));
    // one class per cluster: every local model degenerates to a constant
    for (const auto& m : model.models) EXPECT_EQ(m.kind(), TrainedModel::Kind::Constant);
}

TEST(Pipeline, RoutingMatchesBruteForceNearestCentroid) {
    const auto train = three_blobs(3);
    const auto model = fit_pipeline(train, quick(Mode::KMeansKnn));
    const auto test = three_blobs(4, 30);
    const auto& c = *model.clusters;
    for (std::size_t i = 0; i < test.size(); ++i) {
        int best = 0;
        double bd = 1e300;
        for (int k = 0; k < c.k; ++k) {
            double d = 0;
            for (std::size_t j = 0; j < test.dim(); ++j)
                d += (test.features(i)[j] - c.centroid(k)[j]) * (test.features(i)[j] - c.centroid(k)[j]);
            if (d < bd) {
                bd = d;
                best = k;
            }
        }
        EXPECT_EQ(route(model, test.features(i)), best);
    }
    // blobs are far apart: points of one blob always share a cluster
    for (std::size_t i = 3; i < test.size(); ++i)
        EXPECT_EQ(route(model, test.features(i)), route(model, test.features(i % 3)));
}

TEST(Pipeline, GlobalSvmEqualsDirectFit) {
    const auto d = mixed_blobs(5);
    const auto model = fit_pipeline(d, quick(Mode::Svm));
    EXPECT_FALSE(model.clusters.has_value());
    ASSERT_EQ(model.cluster_count(), 1);
    const auto direct = svm_fit(d, SvmConfig{});
    const auto q = testutil::random_dataset(100, 2, 2, 6);
    for (std::size_t i = 0; i < q.size(); ++i) {
        EXPECT_EQ(predict_pipeline(model, q)[i], direct.predict(q.features(i)));
    }
}

class ModeReduction : public ::testing::TestWithParam<Mode> {};

TEST_P(ModeReduction, SingleClusterEqualsGlobalMode) {
    const Mode local = GetParam();
    const Mode global = local == Mode::KMeansSvm     ? Mode::Svm
                        : local == Mode::KMeansKnn   ? Mode::Knn
                        : local == Mode::KMeansDeSvm ? Mode::DeSvm
                                                     : Mode::DeKnn;
    const auto d = mixed_blobs(7);
    auto lc = quick(local);
    lc.forced_k = 1;
    const auto lm = fit_pipeline(d, lc);
    const auto gm = fit_pipeline(d, quick(global));
    const auto q = testutil::random_dataset(200, 2, 2, 8);
    EXPECT_EQ(predict_pipeline(lm, q), predict_pipeline(gm, q));
    EXPECT_EQ(describe(lm.configs[0]), describe(gm.configs[0]));
}

INSTANTIATE_TEST_SUITE_P(LocalModes, ModeReduction,
                         ::testing::Values(Mode::KMeansSvm, Mode::KMeansKnn, Mode::KMeansDeSvm, Mode::KMeansDeKnn));

TEST(Pipeline, RoutingDecomposition) {
    const auto d = mixed_blobs(9);
    auto cfg = quick(Mode::KMeansDeKnn);
    cfg.forced_k = 4;
    const auto model = fit_pipeline(d, cfg);
    const auto q = testutil::random_dataset(150, 2, 2, 10);
    const auto pred = predict_pipeline(model, q);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const int c = assign_nearest(*model.clusters, q.features(i));
        EXPECT_EQ(pred[i], model.models[static_cast<std::size_t>(c)].predict(q.features(i)));
    }
    // a point at centroid c is handled by model c
    for (int c = 0; c < model.clusters->k; ++c) EXPECT_EQ(route(model, model.clusters->centroid(c)), c);
}

TEST(Pipeline, PartitionAndTimingAdditivity) {
    const auto d = mixed_blobs(11);
    auto cfg = quick(Mode::KMeansDeSvm);
    cfg.parallel_width = 1;
    const auto model = fit_pipeline(d, cfg);
    EXPECT_EQ(std::accumulate(model.cluster_sizes.begin(), model.cluster_sizes.end(), std::size_t{0}), d.size());
    EXPECT_EQ(model.models.size(), model.cluster_sizes.size());
    const auto& t = model.timing;
    EXPECT_GE(t.gap_seconds, 0.0);
    EXPECT_GE(t.kmeans_seconds, 0.0);
    for (double s : t.cluster_seconds) EXPECT_GE(s, 0.0);
    EXPECT_GE(t.total_seconds, t.component_sum());
    EXPECT_LT(t.total_seconds - t.component_sum(), 0.05 * t.total_seconds);
}

TEST(Pipeline, SequentialAndParallelRunsBuildTheSameModel) {
    const auto d = mixed_blobs(12);
    auto seq = quick(Mode::KMeansDeSvm);
    auto par = seq;
    par.parallel_width = 4;
    const auto a = fit_pipeline(d, seq);
    const auto b = fit_pipeline(d, par);
    ASSERT_EQ(a.cluster_count(), b.cluster_count());
    for (int c = 0; c < a.cluster_count(); ++c)
        EXPECT_EQ(format_model(a.models[static_cast<std::size_t>(c)]), format_model(b.models[static_cast<std::size_t>(c)]));
}

TEST(Pipeline, SmallClustersSkipTuning) {
    const auto d = mixed_blobs(13);
    auto cfg = quick(Mode::KMeansDeKnn);
    cfg.forced_k = 4;
    cfg.min_tune_size = 1000;
    const auto model = fit_pipeline(d, cfg);
    for (const auto& c : model.configs) EXPECT_EQ(c, default_config(LearnerKind::Knn));
    EXPECT_FALSE(model.warnings.empty());
}

TEST(Pipeline, LearnerOverrideForUntunedModes) {
    const auto d = mixed_blobs(14);
    auto cfg = quick(Mode::Knn);
    cfg.learner = KnnConfig{1, KnnWeights::Uniform};
    const auto model = fit_pipeline(d, cfg);
    const auto pred = predict_pipeline(model, d);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(pred[i], d.label(i));
    cfg.learner = SvmConfig{};
    EXPECT_THROW(fit_pipeline(d, cfg), Error);
}

TEST(Pipeline, SaveLoadRoundTrip) {
    const auto d = mixed_blobs(15);
    auto cfg = quick(Mode::KMeansDeSvm);
    cfg.forced_k = 3;
    const auto model = fit_pipeline(d, cfg);
    const auto dir = std::filesystem::temp_directory_path() / "locallearn_pipeline_rt";
    std::filesystem::remove_all(dir);
    save_pipeline(model, dir);
    const auto back = load_pipeline(dir);
    EXPECT_EQ(back.mode, model.mode);
    EXPECT_EQ(back.cluster_count(), model.cluster_count());
    for (std::size_t c = 0; c < model.configs.size(); ++c) EXPECT_EQ(describe(back.configs[c]), describe(model.configs[c]));
    const auto q = testutil::random_dataset(100, 2, 2, 16);
    EXPECT_EQ(predict_pipeline(back, q), predict_pipeline(model, q));
    std::filesystem::remove_all(dir);
}

TEST(Pipeline, Errors) {
    const auto d = mixed_blobs(17);
    const auto model = fit_pipeline(d, quick(Mode::KMeansKnn));
    const auto wrong = testutil::random_dataset(3, 5, 2, 1);
    EXPECT_THROW(predict_pipeline(model, wrong), DimensionError);
    EXPECT_THROW(fit_pipeline(VectorDataset(2, 2), quick(Mode::Svm)), Error);
}

TEST(Pipeline, SingleClassTrainingGivesConstantModels) {
    const auto d = testutil::make(1, 2, {{{0}, 2}, {{1}, 2}, {{5}, 2}, {{6}, 2}});
    for (auto m : {Mode::Svm, Mode::DeKnn}) {
        const auto model = fit_pipeline(d, quick(m));
        EXPECT_EQ(model.models[0].kind(), TrainedModel::Kind::Constant);
        EXPECT_EQ(predict_pipeline(model, d), (std::vector<Label>(4, 2)));
    }
}
