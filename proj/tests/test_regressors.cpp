#include <catch2/catch_amalgamated.hpp>

#include <edgetran/regressors.hpp>
#include <edgetran/rng.hpp>
#include <edgetran/serial.hpp>

#include <cmath>
#include <limits>
#include <vector>

using namespace edgetran;

namespace {

// A smooth, strictly positive 2-D stand-in for a device cost surface.
double surface(double a, double b) {
    return 0.25 + 0.5 * a + 0.3 * b + 0.25 * a * b + 0.15 * a * a;
}

struct Surface2D {
    Matrix X;
    std::vector<double> y_norm;
    double y_max = 0.0;
};

Surface2D sample_surface(int n, std::uint64_t seed) {
    Rng rng(seed);
    Surface2D s;
    std::vector<double> raw;
    for (int i = 0; i < n; ++i) {
        const double a = rng.uniform(), b = rng.uniform();
        s.X.push_back({a, b});
        raw.push_back(surface(a, b));
    }
    auto [norm, maxv] = normalize_targets(raw);
    s.y_norm = std::move(norm);
    s.y_max = maxv;
    return s;
}

}  // namespace

TEST_CASE("linear regression recovers an exact linear law", "[regressors]") {
    Matrix X;
    std::vector<double> y;
    for (int i = 0; i < 10; ++i) {
        X.push_back({static_cast<double>(i)});
        y.push_back(2.0 * i + 1.0);
    }
    const auto model = Regressor::fit(RegressorKind::Linear, X, y);
    CHECK(model.report().val_mse < 1e-12);
    CHECK(model.report().train_mse < 1e-12);
    CHECK(model.report().n_samples == 10);

    auto [mean, sigma] = model.predict_with_uncertainty({4.5});
    CHECK(mean == Catch::Approx(10.0).margin(1e-6));
    CHECK(sigma == 0.0);  // LR cannot model uncertainty
}

TEST_CASE("decision tree predicts the constant on constant targets", "[regressors]") {
    Matrix X;
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) {
        X.push_back({static_cast<double>(i), static_cast<double>(i % 3)});
        y.push_back(0.7);
    }
    const auto model = Regressor::fit(RegressorKind::DecisionTree, X, y);
    for (double probe : {-5.0, 0.0, 7.3, 100.0}) {
        auto [mean, sigma] = model.predict_with_uncertainty({probe, probe});
        CHECK(mean == Catch::Approx(0.7).margin(1e-12));
        CHECK(sigma == 0.0);
    }
}

TEST_CASE("tree predictions are piecewise constant", "[regressors]") {
    auto s = sample_surface(120, 5);
    const auto model = Regressor::fit(RegressorKind::DecisionTree, s.X, s.y_norm);
    const auto& tree = model.trees[0];
    REQUIRE(tree.feature[0] >= 0);  // the fit actually split something

    // Perturb a probe without crossing any split threshold: prediction is
    // unchanged because the probe stays inside the same leaf cell.
    for (const auto& probe : {std::vector<double>{0.31, 0.62}, {0.87, 0.12}}) {
        const double before = model.predict(probe);
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tree.feature.size(); ++i)
            if (tree.feature[i] == 0)
                nearest = std::min(nearest, std::fabs(probe[0] - tree.threshold[i]));
        const double eps = nearest * 0.25;
        CHECK(model.predict({probe[0] + eps, probe[1]}) == before);
        CHECK(model.predict({probe[0] - eps, probe[1]}) == before);
    }
}

TEST_CASE("gbdt reaches the 0.5% threshold on the smooth 2-D surface", "[regressors]") {
    auto s = sample_surface(250, 11);  // 200 train / 50 validation after the 80/20 split
    const auto model = Regressor::fit(RegressorKind::GBDT, s.X, s.y_norm);
    INFO("val mse = " << model.report().val_mse);
    CHECK(model.report().val_mse < 0.005);
    CHECK(model.report().train_mse <= model.report().val_mse * 10.0 + 1e-9);

    SECTION("boosting training loss is non-increasing per stage") {
        const auto& trace = model.stage_train_mse;
        REQUIRE(trace.size() == 200);
        for (std::size_t m = 1; m < trace.size(); ++m)
            REQUIRE(trace[m] <= trace[m - 1] + 1e-12);
    }
}

TEST_CASE("gbdt sigma grows away from the training hull", "[regressors]") {
    // Uncertainty comes from late-stage disagreement, which carries signal
    // when stages are fit on row subsamples.
    auto s = sample_surface(250, 23);
    const auto model =
        Regressor::fit(RegressorKind::GBDT, s.X, s.y_norm, {{"subsample", 0.7}});

    std::vector<double> inside;
    for (const auto& row : s.X) inside.push_back(model.predict_with_uncertainty(row).second);
    const double med = median_of(inside);
    const double far = model.predict_with_uncertainty({3.0, 3.0}).second;
    INFO("median inside = " << med << ", far outside = " << far);
    CHECK(far > med);
    CHECK(med >= 0.0);
}

TEST_CASE("gbdt with identical trees reports zero uncertainty", "[regressors]") {
    Matrix X;
    std::vector<double> y;
    for (int i = 0; i < 30; ++i) {
        X.push_back({static_cast<double>(i)});
        y.push_back(0.5);  // every residual tree predicts exactly zero
    }
    const auto model = Regressor::fit(RegressorKind::GBDT, X, y);
    for (double probe : {0.0, 10.0, -3.0}) {
        auto [mean, sigma] = model.predict_with_uncertainty({probe});
        CHECK(mean == 0.5);
        CHECK(sigma == 0.0);
    }
}

TEST_CASE("normalize_targets divides by the maximum", "[regressors]") {
    auto [norm, maxv] = normalize_targets({1.0, 2.0, 4.0});
    CHECK(norm == std::vector<double>{0.25, 0.5, 1.0});
    CHECK(maxv == 4.0);

    auto [single, seven] = normalize_targets({7.0});
    CHECK(single == std::vector<double>{1.0});
    CHECK(seven == 7.0);

    SECTION("denormalize(normalize(y)) = y") {
        const std::vector<double> y = {0.123, 9.5, 3.14159, 0.001};
        auto [n2, m2] = normalize_targets(y);
        const auto back = denormalize_targets(n2, m2);
        for (std::size_t i = 0; i < y.size(); ++i)
            CHECK(back[i] == Catch::Approx(y[i]).epsilon(1e-12));
        for (double v : n2) {
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
        }
    }

    SECTION("non-positive or empty targets are rejected") {
        CHECK_THROWS_AS(normalize_targets({1.0, 0.0}), NormalizeError);
        CHECK_THROWS_AS(normalize_targets({1.0, -2.0}), NormalizeError);
        CHECK_THROWS_AS(normalize_targets({}), NormalizeError);
    }
}

TEST_CASE("fit validates its inputs", "[regressors]") {
    CHECK_THROWS_AS(Regressor::fit(RegressorKind::GBDT, {}, {}), FitError);
    CHECK_THROWS_AS(Regressor::fit(RegressorKind::GBDT, {{1.0}}, {1.0}), FitError);
    CHECK_THROWS_AS(Regressor::fit(RegressorKind::GBDT, {{1.0}, {2.0}}, {1.0}), FitError);
    CHECK_THROWS_AS(
        Regressor::fit(RegressorKind::GBDT, {{1.0}, {2.0, 3.0}}, {1.0, 2.0}), FitError);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Regressor::fit(RegressorKind::GBDT, {{1.0}, {nan}}, {1.0, 2.0}),
                    FitError);
    CHECK_THROWS_AS(Regressor::fit(RegressorKind::GBDT, {{1.0}, {2.0}}, {1.0, nan}),
                    FitError);
    CHECK_THROWS_AS(
        Regressor::fit(RegressorKind::GBDT, {{1.0}, {2.0}}, {1.0, 2.0}, {{"typo", 1.0}}),
        InvalidConfig);

    SECTION("unfitted models refuse to predict") {
        Regressor blank;
        CHECK_THROWS_AS(blank.predict({1.0}), StateError);
        CHECK_THROWS_AS(blank.report(), StateError);
    }

    SECTION("dimension mismatches are rejected") {
        const auto model =
            Regressor::fit(RegressorKind::Linear, {{1.0}, {2.0}, {3.0}}, {1.0, 2.0, 3.0});
        CHECK_THROWS_AS(model.predict({1.0, 2.0}), InvalidConfig);
    }
}

TEST_CASE("fits are bit-deterministic at a fixed seed", "[regressors]") {
    auto s = sample_surface(150, 31);
    for (const auto kind :
         {RegressorKind::Linear, RegressorKind::DecisionTree, RegressorKind::GBDT}) {
        const auto a = Regressor::fit(kind, s.X, s.y_norm, {{"trees", 50}});
        const auto b = Regressor::fit(kind, s.X, s.y_norm, {{"trees", 50}});
        CHECK(model_to_json(a).dump() == model_to_json(b).dump());
    }
}

TEST_CASE("models serialize to versioned structured text and back", "[regressors]") {
    auto s = sample_surface(150, 41);
    for (const auto kind :
         {RegressorKind::Linear, RegressorKind::DecisionTree, RegressorKind::GBDT}) {
        const auto model = Regressor::fit(kind, s.X, s.y_norm, {{"trees", 60}});
        const auto j = model_to_json(model);
        CHECK(j.at("schema_version").get<int>() == kModelSchemaVersion);
        const auto back = model_from_json(j);
        for (const auto& row : s.X) {
            const auto [m1, s1] = model.predict_with_uncertainty(row);
            const auto [m2, s2] = back.predict_with_uncertainty(row);
            REQUIRE(m1 == m2);  // byte-exact round-trip
            REQUIRE(s1 == s2);
        }
        CHECK(back.report().val_mse == model.report().val_mse);
    }

    SECTION("schema version changes are rejected") {
        const auto model = Regressor::fit(RegressorKind::Linear, {{1.0}, {2.0}, {3.0}},
                                          {1.0, 2.0, 3.0});
        auto j = model_to_json(model);
        j["schema_version"] = 99;
        CHECK_THROWS_AS(model_from_json(j), ScanError);
    }

    SECTION("unfitted models cannot be serialized") {
        CHECK_THROWS_AS(model_to_json(Regressor{}), StateError);
    }
}

TEST_CASE("hyperparameter defaults match the published bake-off choice",
          "[regressors]") {
    const auto h = resolve_hyper({});
    CHECK(h.trees == 200);
    CHECK(h.max_depth == 4);
    CHECK(h.shrinkage == 0.1);
    CHECK(h.min_leaf == 2);
    CHECK(h.val_fraction == 0.2);

    auto s = sample_surface(80, 51);
    const auto model =
        Regressor::fit(RegressorKind::GBDT, s.X, s.y_norm, {{"trees", 25}, {"max_depth", 2}});
    CHECK(model.trees.size() == 25);
    for (const auto& tree : model.trees)
        for (std::size_t i = 0; i < tree.feature.size(); ++i)
            if (tree.feature[i] >= 0) {
                // Depth-2 trees have at most 3 internal nodes.
                CHECK(tree.feature.size() <= 7);
            }
}
