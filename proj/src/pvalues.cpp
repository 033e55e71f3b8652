#include "ocsarc/pvalues.hpp"

#include "ocsarc/error.hpp"

#include <algorithm>
#include <cmath>

namespace ocsarc {

std::size_t CalibrationScores::count_below(double v) const {
    return static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), v) - sorted_.begin());
}

std::size_t CalibrationScores::count_equal(double v) const {
    auto [lo, hi] = std::equal_range(sorted_.begin(), sorted_.end(), v);
    return static_cast<std::size_t>(hi - lo);
}

CalibrationScores build_calibration(std::span<const double> scores) {
    CalibrationScores cal;
    cal.sorted_.assign(scores.begin(), scores.end());
    for (std::size_t i = 0; i < cal.sorted_.size(); ++i) {
        if (std::isnan(cal.sorted_[i])) {
            throw InvalidInput("calibration score " + std::to_string(i) + " is NaN");
        }
    }
    std::sort(cal.sorted_.begin(), cal.sorted_.end());
    return cal;
}

PValueRecord conformal_p(const CalibrationScores& cal, double v_hat, double u) {
    if (!(u >= 0.0 && u <= 1.0)) throw InvalidInput("tie randomizer u must lie in [0, 1]");
    if (std::isnan(v_hat)) throw InvalidInput("test score is NaN");
    const double below = static_cast<double>(cal.count_below(v_hat));
    const double ties = static_cast<double>(cal.count_equal(v_hat));
    const double p = (below + u * (1.0 + ties)) / (static_cast<double>(cal.size()) + 1.0);
    return {p, u, v_hat};
}

PValueRecord oracle_p(const CalibrationScores& cal, double v_true, double u) {
    return conformal_p(cal, v_true, u);
}

}  // namespace ocsarc
