#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ocsarc {

/// Sorted multiset of calibration non-conformity scores. Immutable.
class CalibrationScores {
public:
    CalibrationScores() = default;

    std::size_t size() const noexcept { return sorted_.size(); }
    std::span<const double> sorted() const noexcept { return sorted_; }

    /// #{V_i < v}
    std::size_t count_below(double v) const;
    /// #{V_i == v}, exact floating-point equality
    std::size_t count_equal(double v) const;

private:
    friend CalibrationScores build_calibration(std::span<const double> scores);
    std::vector<double> sorted_;
};

/// Throws InvalidInput on NaN.
CalibrationScores build_calibration(std::span<const double> scores);

struct PValueRecord {
    double p = 1.0;
    double u = 1.0;
    double v_hat = 0.0;
};

/// [#{V_i < v} + u * (1 + #{V_i = v})] / (n + 1). `u` is the tie randomizer
/// and must lie in [0, 1]; n = 0 gives p = u.
PValueRecord conformal_p(const CalibrationScores& cal, double v_hat, double u);

/// Same formula evaluated at the score of the observed response. Only
/// meaningful where the response is known, i.e. in validation.
PValueRecord oracle_p(const CalibrationScores& cal, double v_true, double u);

}  // namespace ocsarc
