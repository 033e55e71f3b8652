#include "ocsarc/error.hpp"
#include "ocsarc/experiment.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ocsarc;

namespace {

bool has_diag(const std::vector<Diagnostic>& d, const std::string& field) {
    return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.field == field; });
}

ExperimentConfig tiny() {
    return parse_config(R"({
        "experiment_id": "tiny",
        "sizes": {"train": 50, "calibration": 50, "test": 30},
        "methods": ["ocs_arc", "ob", "repeated_cs"],
        "scores": ["clip", "res"],
        "q": 0.2,
        "checkpoints": [10, 30],
        "replicates": 3,
        "model": {"n_trees": 10}
    })");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config defaults and validation") {
    auto cfg = parse_config("{}");
    CHECK(cfg.q == std::vector<double>{0.1});
    CHECK(cfg.r == std::vector<double>{0.99});
    CHECK(validate_config(cfg).empty());

    CHECK(validate_config(parse_config(R"({"r": 0.99})")).empty());
    CHECK(has_diag(validate_config(parse_config(R"({"q": 1.5})")), "q"));
    CHECK(has_diag(validate_config(parse_config(R"({"r": 1.0})")), "r"));
    CHECK(has_diag(validate_config(parse_config(R"({"method": "mocs_arc", "score": "regional",
                                                   "data": {"setting": 3}})")),
                   "region"));
    CHECK(has_diag(validate_config(parse_config(R"({"checkpoints": [100, 50]})")), "checkpoints"));
    CHECK(has_diag(validate_config(parse_config(R"({"checkpoints": [700]})")), "checkpoints"));
    CHECK(has_diag(validate_config(parse_config(R"({"score": "svm"})")), "scores"));
    CHECK(has_diag(validate_config(parse_config(R"({"bogus": 1})")), "bogus"));
    CHECK(has_diag(validate_config(parse_config(R"({"data": {"setting": 3}})")), "methods"));
    CHECK(has_diag(validate_config(parse_config(R"({"data": {"source": "csv", "path": "/no/such.csv",
                                                   "target": "y"}})")),
                   "data.path"));

    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"q": "high"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"method": "bh"})"), ConfigError);
}

TEST_CASE("config grids and round trip") {
    auto cfg = parse_config(R"({"q": [0.05, 0.1], "r": [0.99, 0.999], "data": {"sigma": [0.5, 1]},
                               "sizes": {"calibration": [100, 200]},
                               "region": {"lower": [0, "-inf"], "upper": ["inf", 1]}})");
    CHECK(cfg.q.size() == 2);
    CHECK(cfg.data.sigmas == std::vector<double>{0.5, 1.0});
    CHECK(cfg.n_calibration == std::vector<std::size_t>{100, 200});
    REQUIRE(cfg.region);
    CHECK(cfg.region->upper[0] == std::numeric_limits<double>::infinity());
    auto again = parse_config(config_to_json(cfg));
    CHECK(config_to_json(again) == config_to_json(cfg));
}

TEST_CASE("stream p-values see only features and thresholds") {
    auto sf = ScoreFunction::clip(testing::constant(0.5), 1000.0, 0.0);
    auto cal = build_calibration(std::vector<double>{-1.0, 0.0, 999.0});
    std::vector<StreamPoint> stream{{{1.0}, 0.0}, {{2.0}, 5.0}};
    std::vector<double> u{1.0, 0.0};
    auto p = stream_pvalues(sf, cal, stream, u);
    CHECK(p[0] == (1.0 + 1.0) / 4.0);
    CHECK(p[1] == 1.0 / 4.0);
    CHECK_THROWS_AS(stream_pvalues(sf, cal, stream, std::vector<double>{0.5}), InvalidInput);
}

TEST_CASE("grid run shape and basic invariants") {
    auto cfg = tiny();
    auto result = run_grid(cfg);
    REQUIRE(result.cells.size() == 6);
    CHECK(result.seeds == std::vector<std::uint64_t>{0, 1, 2});
    for (const auto& cell : result.cells) {
        REQUIRE(cell.runs.size() == 3);
        CHECK(cell.summary.runs == 3);
        for (const auto& run : cell.runs) {
            REQUIRE(run.fdp_at.size() == 2);
            for (double f : run.fdp_at) CHECK((f >= 0.0 && f <= 1.0));
            if (cell.key.method != Method::RepeatedBh) CHECK(run.reject_to_accept == 0);
        }
    }
    auto bad = cfg;
    bad.q = {2.0};
    CHECK_THROWS_AS(run_grid(bad), ConfigError);
}

TEST_CASE("results do not depend on the thread count") {
    auto cfg = tiny();
    cfg.threads = 1;
    auto serial = summary_csv(run_grid(cfg));
    cfg.threads = 4;
    CHECK(summary_csv(run_grid(cfg)) == serial);
    cfg.base_seed = 9;
    CHECK(summary_csv(run_grid(cfg)) != serial);
}

TEST_CASE("outputs are written to disk") {
    auto dir = std::filesystem::temp_directory_path() / "ocsarc_experiment_outputs";
    std::filesystem::remove_all(dir);
    auto cfg = tiny();
    cfg.output_dir = dir.string();
    cfg.write_trajectories = true;
    auto result = run_experiment(cfg);
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    auto summary = slurp(dir / "summary.csv");
    CHECK(summary.rfind("experiment_id,method,score,t,mean_fdp,se_fdp,mean_power,se_power,mean_r2a\n", 0) == 0);
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 1 + 6 * 2);
    auto traj = slurp(dir / "trajectories" / "cell0_rep0.csv");
    CHECK(traj.rfind("t,p_t,gamma_t,k_star,newly_selected,cum_selected\n", 0) == 0);
    CHECK(std::count(traj.begin(), traj.end(), '\n') == 31);
    std::filesystem::remove_all(dir);
}

TEST_CASE("trajectory csv formatting") {
    std::vector<StepRecord> steps{{1, 0.05, 0.5, 1, {1}, 0, 1}, {2, 0.09, 0.25, 2, {2, 3}, 0, 3}};
    CHECK(trajectory_csv(steps) ==
          "t,p_t,gamma_t,k_star,newly_selected,cum_selected\n1,0.05,0.5,1,1,1\n2,0.09,0.25,2,2;3,3\n");
}

TEST_CASE("multivariate run") {
    auto cfg = parse_config(R"({
        "data": {"setting": 3, "sigma": 1.0},
        "sizes": {"train": 80, "calibration": 80, "test": 40},
        "method": "mocs_arc", "score": "regional",
        "region": {"lower": [0, 0], "upper": ["inf", "inf"]},
        "checkpoints": [20, 40], "replicates": 2, "q": 0.3,
        "model": {"n_trees": 10}
    })");
    REQUIRE(validate_config(cfg).empty());
    auto result = run_grid(cfg);
    REQUIRE(result.cells.size() == 1);
    CHECK(result.cells[0].runs[0].reject_to_accept == 0);
}
