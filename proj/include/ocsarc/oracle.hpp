#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ocsarc::oracle {

/// Direct evaluation of the online BH rank over p_1..p_t by scanning every
/// k from t down to 1. Quadratic; for cross-checking only.
std::size_t online_bh_k_star(std::span<const double> pvals, std::span<const double> gammas, double q);

std::vector<std::size_t> online_bh_selection(std::span<const double> pvals,
                                             std::span<const double> gammas, double q,
                                             std::size_t k_star);

struct EquivalenceReport {
    std::size_t streams = 0;
    std::size_t steps = 0;
    std::size_t mismatches = 0;
};

/// Random streams (length <= max_len, random q and r) replayed through
/// OnlineBh and compared against recomputation at every step.
EquivalenceReport check_online_bh(std::size_t streams, std::size_t max_len, std::uint64_t seed);

}  // namespace ocsarc::oracle
