#include "ocsarc/multivariate.hpp"

#include "ocsarc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ocsarc {

TargetRegion::TargetRegion(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty() || lower_.size() != upper_.size()) {
        throw InvalidInput("region bounds must be non-empty and of equal length");
    }
    representative_.resize(lower_.size());
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (std::isnan(lower_[i]) || std::isnan(upper_[i]) || lower_[i] > upper_[i]) {
            throw InvalidInput("region requires lower <= upper in every coordinate");
        }
        if (lower_[i] == std::numeric_limits<double>::infinity() ||
            upper_[i] == -std::numeric_limits<double>::infinity()) {
            throw InvalidInput("region bounds describe an empty set");
        }
        if (std::isfinite(lower_[i])) {
            representative_[i] = lower_[i];
        } else if (std::isfinite(upper_[i])) {
            representative_[i] = upper_[i];
        } else {
            representative_[i] = 0.0;
        }
    }
}

void TargetRegion::check_dim(std::span<const double> y) const {
    if (y.size() != dim()) {
        throw InvalidInput("point has dimension " + std::to_string(y.size()) + ", region has " +
                           std::to_string(dim()));
    }
}

bool TargetRegion::contains(std::span<const double> y) const {
    check_dim(y);
    for (std::size_t i = 0; i < dim(); ++i) {
        if (!(y[i] >= lower_[i] && y[i] <= upper_[i])) return false;
    }
    return true;
}

bool TargetRegion::interior_contains(std::span<const double> y) const {
    check_dim(y);
    for (std::size_t i = 0; i < dim(); ++i) {
        bool above = lower_[i] == -std::numeric_limits<double>::infinity() || y[i] > lower_[i];
        bool below = upper_[i] == std::numeric_limits<double>::infinity() || y[i] < upper_[i];
        if (!(above && below)) return false;
    }
    return true;
}

bool TargetRegion::unbounded() const noexcept {
    for (std::size_t i = 0; i < dim(); ++i) {
        if (std::isfinite(lower_[i]) || std::isfinite(upper_[i])) return false;
    }
    return true;
}

double TargetRegion::signed_margin(std::span<const double> point) const {
    check_dim(point);
    if (unbounded()) return 0.0;
    if (!contains(point)) {
        double ss = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) {
            double clipped = std::clamp(point[i], lower_[i], upper_[i]);
            double d = point[i] - clipped;
            ss += d * d;
        }
        return -std::sqrt(ss);
    }
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dim(); ++i) {
        if (std::isfinite(lower_[i])) nearest = std::min(nearest, point[i] - lower_[i]);
        if (std::isfinite(upper_[i])) nearest = std::min(nearest, upper_[i] - point[i]);
    }
    return nearest;
}

void TargetRegion::set_representative(std::vector<double> point) {
    if (!contains(point)) throw InvalidInput("representative point must lie in the region");
    representative_ = std::move(point);
}

bool region_contains(const TargetRegion& region, std::span<const double> y) {
    return region.contains(y);
}

// ---------------------------------------------------------------------------

VectorPredictor::VectorPredictor(std::vector<std::shared_ptr<const Predictor>> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw InvalidInput("vector predictor needs at least one component");
    for (const auto& c : components_) {
        if (!c) throw InvalidInput("vector predictor component is null");
        if (c->dim() != components_.front()->dim()) {
            throw InvalidInput("vector predictor components disagree on input dimension");
        }
    }
}

std::size_t VectorPredictor::input_dim() const noexcept { return components_.front()->dim(); }

std::vector<double> VectorPredictor::predict(std::span<const double> x) const {
    std::vector<double> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c->predict(x));
    return out;
}

RegionalScoreFunction::RegionalScoreFunction(std::shared_ptr<const VectorPredictor> predictor,
                                             double margin)
    : predictor_(std::move(predictor)), margin_(margin) {
    if (!predictor_) throw InvalidInput("regional score needs a predictor");
    if (!(margin > 0.0)) throw InvalidInput("regional score margin must be positive");
}

double RegionalScoreFunction::operator()(const TargetRegion& region, std::span<const double> x,
                                         std::span<const double> y) const {
    if (predictor_->output_dim() != region.dim()) {
        throw InvalidInput("predictor output dimension does not match the region");
    }
    const bool inside = region.interior_contains(y);
    const double s = region.signed_margin(predictor_->predict(x));
    return (inside ? margin_ : 0.0) - s;
}

double regional_score(const RegionalScoreFunction& sf, const TargetRegion& region,
                      std::span<const double> x, std::span<const double> y) {
    return sf(region, x, y);
}

StepRecord mocs_arc_step(OnlineBh& state, const CalibrationScores& cal,
                         const RegionalScoreFunction& sf, const TargetRegion& region,
                         std::span<const double> x, double u) {
    const double v_hat = sf(region, x, region.representative());
    return state.step(conformal_p(cal, v_hat, u).p);
}

}  // namespace ocsarc
