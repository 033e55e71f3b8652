#pragma once

#include "ocsarc/datagen.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ocsarc {

/// |selected ∩ nulls| / |selected|, 0 when nothing is selected. Indices are
/// 1-based positions into `is_null`.
double fdp(std::span<const std::size_t> selected, const TruthLabels& is_null);

/// |selected ∩ non-nulls| / |non-nulls|, 0 when there are no non-nulls.
double power(std::span<const std::size_t> selected, const TruthLabels& is_null);

/// Total number of indices dropped between consecutive selection sets.
std::size_t reject_to_accept(std::span<const std::vector<std::size_t>> trajectory);

/// Per-replicate metrics at each checkpoint t. r2a is the cumulative
/// reject-to-accept count up to t.
struct RunResult {
    std::vector<std::size_t> checkpoints;
    std::vector<double> fdp_at;
    std::vector<double> power_at;
    std::vector<double> r2a_at;
    std::size_t reject_to_accept = 0;
};

struct SummaryStat {
    double mean = 0.0;
    double std = 0.0;  // sample std, n-1 denominator
    double se = 0.0;   // std / sqrt(n)
    double min = 0.0;
    double max = 0.0;
};

struct CheckpointSummary {
    std::size_t t = 0;
    SummaryStat fdp;
    SummaryStat power;
    SummaryStat r2a;
};

struct Summary {
    std::size_t runs = 0;
    /// Set when runs == 1: std and se are reported as 0.
    bool single_run = false;
    std::vector<CheckpointSummary> checkpoints;
};

SummaryStat summarize(std::span<const double> values);

/// Throws InvalidInput on empty input or mismatched checkpoints.
Summary aggregate(std::span<const RunResult> results, std::span<const std::size_t> checkpoints);

}  // namespace ocsarc
