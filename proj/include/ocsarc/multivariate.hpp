#pragma once

#include "ocsarc/models.hpp"
#include "ocsarc/procedures.hpp"
#include "ocsarc/pvalues.hpp"

#include <memory>
#include <span>
#include <vector>

namespace ocsarc {

/// Closed axis-aligned box {y : lower <= y <= upper}; bounds may be infinite.
class TargetRegion {
public:
    TargetRegion(std::vector<double> lower, std::vector<double> upper);

    std::size_t dim() const noexcept { return lower_.size(); }
    std::span<const double> lower() const noexcept { return lower_; }
    std::span<const double> upper() const noexcept { return upper_; }

    bool contains(std::span<const double> y) const;
    bool interior_contains(std::span<const double> y) const;

    /// True when no bound is finite, i.e. the region is the whole space.
    bool unbounded() const noexcept;

    /// Signed margin of a point: -(Euclidean distance to the box) outside,
    /// +(distance to the nearest finite face) inside. Zero for the whole space.
    double signed_margin(std::span<const double> point) const;

    /// A point of the region used to score test candidates. Defaults to a
    /// boundary point: each coordinate takes its finite lower bound, else its
    /// finite upper bound, else 0.
    std::span<const double> representative() const noexcept { return representative_; }
    void set_representative(std::vector<double> point);

private:
    void check_dim(std::span<const double> y) const;

    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> representative_;
};

bool region_contains(const TargetRegion& region, std::span<const double> y);

/// One univariate predictor per response coordinate.
class VectorPredictor {
public:
    explicit VectorPredictor(std::vector<std::shared_ptr<const Predictor>> components);

    std::size_t input_dim() const noexcept;
    std::size_t output_dim() const noexcept { return components_.size(); }
    std::vector<double> predict(std::span<const double> x) const;

private:
    std::vector<std::shared_ptr<const Predictor>> components_;
};

/// V(x, y) = M * 1{y in interior(R)} - s(x), with s(x) the signed margin of
/// the prediction mu(x) relative to R. Regionally monotone: scores of points
/// outside R never exceed scores of points in R.
class RegionalScoreFunction {
public:
    RegionalScoreFunction(std::shared_ptr<const VectorPredictor> predictor, double margin = 1000.0);

    double margin() const noexcept { return margin_; }
    const VectorPredictor& predictor() const noexcept { return *predictor_; }

    double operator()(const TargetRegion& region, std::span<const double> x,
                      std::span<const double> y) const;

private:
    std::shared_ptr<const VectorPredictor> predictor_;
    double margin_;
};

double regional_score(const RegionalScoreFunction& sf, const TargetRegion& region,
                      std::span<const double> x, std::span<const double> y);

/// Scores the candidate at the region's representative point, converts it to
/// a conformal p-value and advances the online BH state.
StepRecord mocs_arc_step(OnlineBh& state, const CalibrationScores& cal,
                         const RegionalScoreFunction& sf, const TargetRegion& region,
                         std::span<const double> x, double u);

}  // namespace ocsarc
