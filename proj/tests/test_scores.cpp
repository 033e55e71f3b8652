#include "ocsarc/error.hpp"
#include "ocsarc/scores.hpp"
#include "support.hpp"

#include <doctest.h>

#include <vector>

using namespace ocsarc;

TEST_CASE("clip score substitutes into M 1{y > c} - mu") {
    auto pos = testing::constant(0.7);
    std::vector<double> x{0.0};
    CHECK(score_clip(*pos, x, 1.2) == doctest::Approx(999.3).epsilon(1e-12));
    CHECK(score_clip(*pos, x, -1.2) == doctest::Approx(-0.7).epsilon(1e-12));
    auto neg = testing::constant(-3.5);
    CHECK(score_clip(*neg, x, 0.0) == 3.5);
    CHECK(score_clip(*neg, x, 0.0, 10.0, -1.0) == 13.5);
}

TEST_CASE("res score is the residual") {
    std::vector<double> x{0.0};
    CHECK(score_res(*testing::constant(0.7), x, 0.7) == 0.0);
    CHECK(score_res(*testing::constant(-1.0), x, 2.0) == 3.0);
    auto sf = ScoreFunction::res(testing::constant(0.3));
    CHECK(sf(x, 1.0) < sf(x, 5.0));
}

TEST_CASE("score functions reject dimension mismatch") {
    auto pred = testing::constant(0.0, 3);
    std::vector<double> x{1.0, 2.0};
    CHECK_THROWS_AS(score_res(*pred, x, 0.0), InvalidInput);
    CHECK_THROWS_AS(score_clip(*pred, x, 0.0), InvalidInput);
}

TEST_CASE("monotonicity check") {
    std::vector<double> x{0.0};
    std::vector<double> grid{-2, -1, 0, 1, 2};
    CHECK(check_monotone(ScoreFunction::clip(testing::constant(0.4)), x, grid));
    CHECK(check_monotone(ScoreFunction::res(testing::constant(0.4)), x, grid));
    auto decreasing = ScoreFunction::custom([](std::span<const double>, double y) { return -y; });
    std::vector<double> short_grid{0, 1};
    CHECK_FALSE(check_monotone(decreasing, x, short_grid));
}

TEST_CASE("score kind names round trip") {
    CHECK(parse_score_kind("clip") == ScoreKind::Clip);
    CHECK(parse_score_kind("res") == ScoreKind::Res);
    CHECK(to_string(ScoreKind::Clip) == "clip");
    CHECK_THROWS_AS(parse_score_kind("svm"), InvalidInput);
}
