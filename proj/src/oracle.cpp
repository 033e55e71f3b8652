#include "ocsarc/oracle.hpp"

#include "ocsarc/datagen.hpp"
#include "ocsarc/procedures.hpp"

#include <algorithm>
#include <cmath>

namespace ocsarc::oracle {

std::size_t online_bh_k_star(std::span<const double> pvals, std::span<const double> gammas, double q) {
    const std::size_t t = pvals.size();
    for (std::size_t k = t; k >= 1; --k) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < t; ++j) {
            if (pvals[j] <= static_cast<double>(k) * q * gammas[j]) ++count;
        }
        if (count >= k) return k;
    }
    return 0;
}

std::vector<std::size_t> online_bh_selection(std::span<const double> pvals, std::span<const double> gammas,
                                             double q, std::size_t k_star) {
    std::vector<std::size_t> out;
    if (k_star == 0) return out;
    for (std::size_t j = 0; j < pvals.size(); ++j) {
        if (pvals[j] <= static_cast<double>(k_star) * q * gammas[j]) out.push_back(j + 1);
    }
    return out;
}

EquivalenceReport check_online_bh(std::size_t streams, std::size_t max_len, std::uint64_t seed) {
    EquivalenceReport report;
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> length(1, std::max<std::size_t>(max_len, 1));
    for (std::size_t s = 0; s < streams; ++s) {
        const double q = 0.01 + 0.49 * unif(rng);
        const double r = 0.5 + 0.499 * unif(rng);
        const std::size_t len = length(rng);
        GammaSequence gs(r);
        OnlineBh state(q, gs);
        std::vector<double> pvals, gammas;
        for (std::size_t t = 1; t <= len; ++t) {
            // Mix of uniform nulls and signals spread over many decades.
            double p = unif(rng) < 0.5 ? unif(rng) : std::pow(10.0, -6.0 * unif(rng)) * unif(rng);
            state.step(p);
            pvals.push_back(p);
            gammas.push_back(gs.at(t));
            const std::size_t k = online_bh_k_star(pvals, gammas, q);
            ++report.steps;
            if (k != state.k_star() || online_bh_selection(pvals, gammas, q, k) != state.selected()) {
                ++report.mismatches;
            }
        }
        ++report.streams;
    }
    return report;
}

}  // namespace ocsarc::oracle
