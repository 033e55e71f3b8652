#include "ocsarc/datagen.hpp"
#include "ocsarc/error.hpp"
#include "ocsarc/multivariate.hpp"
#include "ocsarc/scores.hpp"
#include "support.hpp"

#include <doctest.h>

#include <limits>
#include <random>

using namespace ocsarc;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

TargetRegion quadrant() { return TargetRegion({0.0, 0.0}, {inf, inf}); }

// Predicts the first two feature coordinates.
std::shared_ptr<const VectorPredictor> passthrough(std::size_t dim) {
    return std::make_shared<VectorPredictor>(std::vector<std::shared_ptr<const Predictor>>{
        testing::coordinate(0, dim), testing::coordinate(1, dim)});
}

}  // namespace

TEST_CASE("region membership") {
    auto r = quadrant();
    CHECK(r.contains(std::vector<double>{0.0, 0.0}));
    CHECK_FALSE(r.contains(std::vector<double>{-0.1, 5.0}));
    CHECK_FALSE(r.interior_contains(std::vector<double>{0.0, 1.0}));
    CHECK(r.interior_contains(std::vector<double>{0.1, 1.0}));
    CHECK(region_contains(r, std::vector<double>{3.0, 4.0}));
    CHECK_THROWS_AS(r.contains(std::vector<double>{1.0}), InvalidInput);

    TargetRegion all({-inf, -inf, -inf}, {inf, inf, inf});
    CHECK(all.unbounded());
    CHECK(all.contains(std::vector<double>{1e300, -1e300, 0.0}));

    CHECK_THROWS_AS(TargetRegion({1.0}, {0.0}), InvalidInput);
    CHECK_THROWS_AS(TargetRegion({}, {}), InvalidInput);
    CHECK_THROWS_AS(TargetRegion({inf}, {inf}), InvalidInput);
}

TEST_CASE("signed margin") {
    auto r = quadrant();
    CHECK(r.signed_margin(std::vector<double>{-1.0, 2.0}) == -1.0);
    CHECK(r.signed_margin(std::vector<double>{-3.0, -4.0}) == -5.0);
    CHECK(r.signed_margin(std::vector<double>{2.0, 0.5}) == 0.5);
    TargetRegion box({0.0, 0.0}, {1.0, 4.0});
    CHECK(box.signed_margin(std::vector<double>{0.9, 2.0}) == doctest::Approx(0.1));
    TargetRegion all({-inf}, {inf});
    CHECK(all.signed_margin(std::vector<double>{12.0}) == 0.0);
}

TEST_CASE("representative point") {
    auto r = quadrant();
    CHECK(r.representative()[0] == 0.0);
    CHECK(r.representative()[1] == 0.0);
    TargetRegion upper({-inf}, {2.5});
    CHECK(upper.representative()[0] == 2.5);
    CHECK_THROWS_AS(r.set_representative({-1.0, 0.0}), InvalidInput);
    r.set_representative({0.0, 7.0});
    CHECK(r.representative()[1] == 7.0);
}

TEST_CASE("regional score evaluation") {
    RegionalScoreFunction sf(passthrough(2), 1000.0);
    auto r = quadrant();
    std::vector<double> x{-1.0, 2.0};
    CHECK(sf(r, x, std::vector<double>{1.0, 1.0}) == 1001.0);
    CHECK(sf(r, x, std::vector<double>{-1.0, 1.0}) == 1.0);

    std::vector<double> deep{5.0, 6.0};
    double v_rep = sf(r, deep, r.representative());
    CHECK(v_rep == -5.0);
    CHECK(regional_score(sf, r, deep, std::vector<double>{-2.0, 1.0}) <= sf(r, deep, std::vector<double>{1.0, 1.0}));

    TargetRegion all({-inf, -inf}, {inf, inf});
    CHECK(sf(all, x, all.representative()) == 1000.0);

    CHECK_THROWS_AS(RegionalScoreFunction(passthrough(2), 0.0), InvalidInput);
    TargetRegion line({0.0}, {inf});
    CHECK_THROWS_AS(sf(line, x, std::vector<double>{1.0}), InvalidInput);
}

TEST_CASE("regional score is regionally monotone") {
    RegionalScoreFunction sf(passthrough(3), 1000.0);
    Rng rng(41);
    std::normal_distribution<double> z(0.0, 3.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int pair = 0; pair < 1000; ++pair) {
        std::vector<double> lo{z(rng), z(rng)};
        std::vector<double> hi{lo[0] + 4 * unit(rng), lo[1] + 4 * unit(rng)};
        if (pair % 3 == 0) hi[1] = inf;
        if (pair % 5 == 0) lo[0] = -inf;
        TargetRegion region(lo, hi);
        std::vector<double> x{z(rng), z(rng), z(rng)};

        std::vector<double> inside(2), outside(2);
        for (std::size_t i = 0; i < 2; ++i) {
            double a = std::isfinite(lo[i]) ? lo[i] : hi[i] - 10.0;
            double b = std::isfinite(hi[i]) ? hi[i] : a + 10.0;
            inside[i] = a + (b - a) * unit(rng);
        }
        outside = inside;
        std::size_t coord = pair % 2;
        outside[coord] = std::isfinite(lo[coord]) ? lo[coord] - 1.0 - unit(rng) : hi[coord] + 1.0 + unit(rng);
        REQUIRE(region.contains(inside));
        REQUIRE_FALSE(region.contains(outside));
        REQUIRE(sf(region, x, outside) <= sf(region, x, inside));
    }
}

TEST_CASE("one-dimensional regional score reproduces CLIP") {
    auto mu = std::make_shared<testing::FnPredictor>(
        2, [](std::span<const double> x) { return 2.0 * x[0] - x[1]; });
    auto vp = std::make_shared<VectorPredictor>(std::vector<std::shared_ptr<const Predictor>>{mu});
    RegionalScoreFunction regional(vp, 1000.0);
    auto clip = ScoreFunction::clip(mu, 1000.0, 0.0);
    TargetRegion half({0.0}, {inf});

    Rng rng(2);
    std::normal_distribution<double> z;
    auto draw = [&](std::size_t n) {
        std::vector<std::vector<double>> xs(n);
        std::vector<double> ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = {z(rng), z(rng)};
            ys[i] = 2.0 * xs[i][0] - xs[i][1] + z(rng);
        }
        return std::pair{xs, ys};
    };
    auto [cx, cy] = draw(300);
    std::vector<double> v_reg, v_clip;
    for (std::size_t i = 0; i < cx.size(); ++i) {
        v_reg.push_back(regional(half, cx[i], std::vector<double>{cy[i]}));
        v_clip.push_back(clip(cx[i], cy[i]));
        REQUIRE(v_reg.back() == v_clip.back());
    }
    auto cal_reg = build_calibration(v_reg);
    auto cal_clip = build_calibration(v_clip);

    auto [tx, ty] = draw(200);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    OnlineBh a(0.2, GammaSequence(0.95));
    OnlineBh b(0.2, GammaSequence(0.95));
    for (std::size_t t = 0; t < tx.size(); ++t) {
        double u = unit(rng);
        auto ra = mocs_arc_step(a, cal_reg, regional, half, tx[t], u);
        auto rb = b.step(conformal_p(cal_clip, clip(tx[t], 0.0), u).p);
        REQUIRE(ra.p == rb.p);
        REQUIRE(ra.newly_selected == rb.newly_selected);
    }
    CHECK(a.selected() == b.selected());
}

TEST_CASE("boundary representative choices agree") {
    RegionalScoreFunction sf(passthrough(2), 1000.0);
    auto a = quadrant();
    auto b = quadrant();
    b.set_representative({0.0, 9.0});
    auto c = quadrant();
    c.set_representative({4.0, 0.0});
    Rng rng(6);
    std::normal_distribution<double> z;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x{z(rng), z(rng)};
        double v = sf(a, x, a.representative());
        REQUIRE(sf(b, x, b.representative()) == v);
        REQUIRE(sf(c, x, c.representative()) == v);
    }
}

TEST_CASE("mocs step selects a small first p-value") {
    RegionalScoreFunction sf(passthrough(2), 1000.0);
    auto r = quadrant();
    std::vector<double> cal_scores(2000);
    for (std::size_t i = 0; i < cal_scores.size(); ++i) cal_scores[i] = static_cast<double>(i);
    auto cal = build_calibration(cal_scores);
    OnlineBh state(0.1, GammaSequence(0.99));
    std::vector<double> x{3.0, 5.0};  // score -3 sits below every calibration score
    auto rec = mocs_arc_step(state, cal, sf, r, x, 0.5);
    CHECK(rec.p == doctest::Approx(0.5 / 2001.0));
    CHECK(rec.newly_selected == std::vector<std::size_t>{1});
}
