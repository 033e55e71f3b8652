#pragma once

#include "ocsarc/datagen.hpp"
#include "ocsarc/format.hpp"
#include "ocsarc/metrics.hpp"
#include "ocsarc/models.hpp"
#include "ocsarc/procedures.hpp"
#include "ocsarc/pvalues.hpp"
#include "ocsarc/scores.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ocsarc {

enum class DataSourceKind { Sim, Csv };

struct DataSourceConfig {
    DataSourceKind kind = DataSourceKind::Sim;
    int setting = 1;
    std::vector<double> sigmas{1.0};
    std::string csv_path;
    CsvSchema csv_schema;
};

enum class ModelKind { BoostedTrees, Logistic };

struct ModelConfig {
    ModelKind kind = ModelKind::BoostedTrees;
    BoostParams boost;
    LogisticParams logistic;
};

struct RegionConfig {
    std::vector<double> lower;
    std::vector<double> upper;
    std::optional<std::vector<double>> representative;
};

/// Score names: "clip", "res" (univariate), "regional" (mocs_arc only).
struct ExperimentConfig {
    std::string experiment_id = "experiment";
    DataSourceConfig data;
    std::size_t n_train = 1000;
    std::vector<std::size_t> n_calibration{1000};
    std::size_t n_test = 600;
    std::vector<Method> methods{Method::OcsArc};
    std::vector<std::string> scores{"clip"};
    std::vector<double> q{0.1};
    std::vector<double> r{0.99};
    double clip_constant = 1000.0;
    double threshold = 0.0;
    ModelConfig model;
    std::vector<std::size_t> checkpoints{100, 200, 300};
    std::size_t replicates = 1;
    std::uint64_t base_seed = 0;
    std::size_t threads = 0;  // 0 = hardware concurrency
    std::optional<RegionConfig> region;
    std::string output_dir = "out";
    bool write_trajectories = false;

    std::vector<std::string> unknown_keys;
};

struct Diagnostic {
    std::string field;
    std::string message;
};

/// Parses the JSON config format; missing keys take the defaults above.
/// Type errors throw ConfigError naming the field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

/// Empty iff the config is runnable.
std::vector<Diagnostic> validate_config(const ExperimentConfig& cfg);

/// One combination of grid parameters.
struct CellKey {
    double sigma = 0.0;
    std::size_t n_calibration = 0;
    double q = 0.0;
    double r = 0.0;
    Method method = Method::OcsArc;
    std::string score;
};

std::string cell_id(const ExperimentConfig& cfg, const CellKey& key);

struct CellResult {
    CellKey key;
    std::string id;
    std::vector<RunResult> runs;                  // one per replicate
    std::vector<std::vector<StepRecord>> trajectories;  // filled on request
    Summary summary;
};

struct ExperimentResult {
    std::vector<CellResult> cells;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> warnings;
};

/// Runs every grid cell for every replicate. Replicates execute on a bounded
/// worker pool; results do not depend on the thread count.
ExperimentResult run_grid(const ExperimentConfig& cfg);

/// Writes summary.csv, manifest.json and (if enabled) per-replicate
/// trajectory CSVs into `out_dir`.
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                   const std::string& out_dir);

/// Validates, runs and writes. Throws ConfigError listing diagnostics.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Conformal p-values for a stream. Only features and thresholds are
/// visible here; responses never reach the selection path. CLIP scores use
/// each point's threshold as the cutoff.
std::vector<double> stream_pvalues(const ScoreFunction& score, const CalibrationScores& cal,
                                   std::span<const StreamPoint> stream, std::span<const double> u);

std::string summary_csv(const ExperimentResult& result);
std::string trajectory_csv(std::span<const StepRecord> steps);

}  // namespace ocsarc
