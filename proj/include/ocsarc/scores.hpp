#pragma once

#include "ocsarc/models.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string_view>

namespace ocsarc {

enum class ScoreKind { Clip, Res, Custom };

ScoreKind parse_score_kind(std::string_view name);
std::string_view to_string(ScoreKind kind);

/// Non-conformity score V(x, y). Larger values are less conforming; every
/// built-in kind is monotone non-decreasing in y.
class ScoreFunction {
public:
    using Custom = std::function<double(std::span<const double>, double)>;

    static ScoreFunction clip(std::shared_ptr<const Predictor> predictor,
                              double clip_constant = 1000.0, double clip_cutoff = 0.0);
    static ScoreFunction res(std::shared_ptr<const Predictor> predictor);
    static ScoreFunction custom(Custom fn);

    double operator()(std::span<const double> x, double y) const;
    /// Copy with a different CLIP cutoff; other kinds are returned unchanged.
    ScoreFunction with_cutoff(double clip_cutoff) const;

    ScoreKind kind() const noexcept { return kind_; }
    double clip_constant() const noexcept { return clip_constant_; }
    double clip_cutoff() const noexcept { return clip_cutoff_; }

private:
    ScoreFunction() = default;

    ScoreKind kind_ = ScoreKind::Res;
    std::shared_ptr<const Predictor> predictor_;
    Custom custom_;
    double clip_constant_ = 1000.0;
    double clip_cutoff_ = 0.0;
};

/// M * 1{y > cutoff} - mu(x). The indicator is strict.
double score_clip(const Predictor& pred, std::span<const double> x, double y,
                  double clip_constant = 1000.0, double clip_cutoff = 0.0);

/// y - mu(x).
double score_res(const Predictor& pred, std::span<const double> x, double y);

/// True iff V(x, .) is non-decreasing along the ascending grid.
bool check_monotone(const ScoreFunction& sf, std::span<const double> x,
                    std::span<const double> y_grid);

}  // namespace ocsarc
