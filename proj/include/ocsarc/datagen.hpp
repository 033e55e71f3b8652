#pragma once

#include "ocsarc/models.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ocsarc {

/// All randomness in the library comes from this engine, seeded explicitly.
using Rng = std::mt19937_64;

/// Seed of replicate i: base_seed + i.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate);

inline constexpr std::size_t kSimDim = 20;

/// Synthetic regression settings with X ~ Uniform[-1,1]^20 and Gaussian
/// noise. Setting 3 is a bivariate response (mu1, mu2) with independent noise.
struct SimSetting {
    int setting_id = 1;
    double sigma = 1.0;
    std::uint64_t seed = 0;
};

double mu_setting1(std::span<const double> x);
double mu_setting2(std::span<const double> x);

/// Draws n samples from the setting, consuming `rng`.
Dataset generate(const SimSetting& setting, std::size_t n, Rng& rng);
/// Same, using an engine seeded with setting.seed.
Dataset generate(const SimSetting& setting, std::size_t n);

/// A test candidate as seen by selection code: features and threshold only.
struct StreamPoint {
    std::vector<double> x;
    double threshold = 0.0;
};

/// Null labels for a stream: true where the candidate should not be selected.
using TruthLabels = std::vector<bool>;

struct CsvSchema {
    std::string target;
    /// Optional per-row threshold column; excluded from the features.
    std::optional<std::string> threshold_column;
    /// Feature columns; empty means every column except target/threshold.
    std::vector<std::string> features;
};

struct CsvData {
    Dataset data;
    std::vector<double> thresholds;  // empty unless threshold_column is set
    std::vector<std::string> feature_names;
};

/// Parses a header-first, comma-separated UTF-8 file with '.' decimals.
/// Throws IoError, SchemaError (unknown or duplicate column), InvalidInput
/// (no data rows) or ParseError. Parse messages name the 1-based data row;
/// ParseError::line() is the file line, header included.
CsvData load_csv(const std::string& path, const CsvSchema& schema);
CsvData parse_csv(std::istream& in, const CsvSchema& schema);

}  // namespace ocsarc
