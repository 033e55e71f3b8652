#include "ocsarc/datagen.hpp"
#include "ocsarc/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace ocsarc;

namespace {

std::vector<double> point(std::initializer_list<std::pair<std::size_t, double>> coords) {
    std::vector<double> x(kSimDim, 0.0);
    for (auto [i, v] : coords) x[i] = v;
    return x;
}

double rate_positive(int setting, std::size_t n, std::uint64_t seed) {
    Dataset d = generate(SimSetting{setting, 1.0, seed}, n);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) pos += d.response(i) > 0.0;
    return static_cast<double>(pos) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("setting 1 mean function") {
    CHECK(mu_setting1(point({{0, 0.5}, {1, 0.3}, {2, 0.9}})) == doctest::Approx(1.8));
    CHECK(mu_setting1(point({{0, 0.5}, {1, 0.3}, {2, 0.1}})) == doctest::Approx(1.0));
    CHECK(mu_setting1(point({{0, 1.0}, {1, -0.2}, {2, 0.0}})) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(mu_setting1(std::vector<double>(3)), InvalidInput);
}

TEST_CASE("setting 2 mean function") {
    CHECK(mu_setting2(point({{0, 0.4}, {1, 0.5}, {3, 1.0}})) == doctest::Approx(2.0));
    CHECK(mu_setting2(point({{0, 0.0}, {1, -0.8}, {3, 1.0}})) == doctest::Approx(1.0));
    CHECK(mu_setting2(point({{0, -1.0}, {1, 1.0}, {3, 0.0}})) == doctest::Approx(-4.6321).epsilon(1e-5));
    CHECK_THROWS_AS(mu_setting2(std::vector<double>(21)), InvalidInput);
}

TEST_CASE("generators are deterministic per seed") {
    Dataset a = generate(SimSetting{2, 1.0, 42}, 30);
    Dataset b = generate(SimSetting{2, 1.0, 42}, 30);
    Dataset c = generate(SimSetting{2, 1.0, 43}, 30);
    CHECK(a.features == b.features);
    CHECK(a.responses == b.responses);
    CHECK(a.responses != c.responses);
    CHECK(a.dim() == kSimDim);
    for (double v : a.features.data()) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    CHECK(replicate_seed(10, 3) == 13);
}

TEST_CASE("noiseless generation returns the mean function") {
    Dataset d = generate(SimSetting{1, 0.0, 1}, 25);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d.response(i) == mu_setting1(d.features.row(i)));
    Dataset b = generate(SimSetting{3, 0.0, 1}, 10);
    CHECK(b.response_dim == 2);
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(b.response_row(i)[0] == mu_setting1(b.features.row(i)));
        CHECK(b.response_row(i)[1] == mu_setting2(b.features.row(i)));
    }
    CHECK_THROWS_AS(generate(SimSetting{4, 1.0, 0}, 5), InvalidInput);
    CHECK_THROWS_AS(generate(SimSetting{1, -1.0, 0}, 5), InvalidInput);
}

TEST_CASE("positive-response rates match a high-precision reference") {
    // Reference values: independent 10^6-sample Monte Carlo estimates at
    // sigma = 1 (standard errors about 5e-4).
    const double ref1 = 0.501063, ref2 = 0.594598, ref_se = 5e-4;
    const std::size_t n = 40000;
    for (auto [setting, ref] : {std::pair{1, ref1}, std::pair{2, ref2}}) {
        double rate = rate_positive(setting, n, 77);
        double se = std::sqrt(ref * (1 - ref) / static_cast<double>(n));
        CHECK(std::abs(rate - ref) <= 3.0 * std::sqrt(se * se + ref_se * ref_se));
    }
}

TEST_CASE("csv parsing") {
    std::istringstream ok("id,age,score,label\n1,30,0.5,1\n2,41,0.25,0\n3,29,1e-3,1\n");
    CsvSchema schema{"label", std::nullopt, {"age", "score"}};
    auto data = parse_csv(ok, schema);
    CHECK(data.data.size() == 3);
    CHECK(data.data.dim() == 2);
    CHECK(data.feature_names == std::vector<std::string>{"age", "score"});
    CHECK(data.data.response(2) == 1.0);
    CHECK(data.data.features(2, 1) == 0.001);

    std::istringstream all("a,b,t,y\n1,2,0.5,3\n4,5,0.5,6\n");
    auto implicit = parse_csv(all, CsvSchema{"y", "t", {}});
    CHECK(implicit.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(implicit.thresholds == std::vector<double>{0.5, 0.5});
}

TEST_CASE("csv error reporting") {
    CsvSchema schema{"y", std::nullopt, {}};

    std::istringstream header_only("x,y\n");
    CHECK_THROWS_AS(parse_csv(header_only, schema), InvalidInput);

    std::string text = "x,y\n";
    for (int row = 1; row <= 8; ++row) text += row == 7 ? "abc,1\n" : std::to_string(row) + ",1\n";
    std::istringstream bad(text);
    try {
        parse_csv(bad, schema);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 7") != std::string::npos);
        CHECK(e.line() == 8);
    }

    std::istringstream unknown("x,y\n1,2\n");
    CHECK_THROWS_AS(parse_csv(unknown, CsvSchema{"y", std::nullopt, {"z"}}), SchemaError);
    std::istringstream missing_target("x,w\n1,2\n");
    CHECK_THROWS_AS(parse_csv(missing_target, schema), SchemaError);
    std::istringstream ragged("x,y\n1,2,3\n");
    CHECK_THROWS_AS(parse_csv(ragged, schema), ParseError);
    CHECK_THROWS_AS(load_csv("/nonexistent/data.csv", schema), IoError);
}

TEST_CASE("csv loads from disk") {
    auto path = std::filesystem::temp_directory_path() / "ocsarc_three_rows.csv";
    {
        std::ofstream out(path);
        out << "\xEF\xBB\xBFx1,x2,y\r\n0.1,0.2,1\r\n0.3,0.4,0\r\n0.5,0.6,1\r\n";
    }
    auto data = load_csv(path.string(), CsvSchema{"y", std::nullopt, {}});
    std::filesystem::remove(path);
    CHECK(data.data.size() == 3);
    CHECK(data.feature_names == std::vector<std::string>{"x1", "x2"});
}
