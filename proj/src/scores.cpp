#include "ocsarc/scores.hpp"

#include "ocsarc/error.hpp"

#include <string>

namespace ocsarc {

ScoreKind parse_score_kind(std::string_view name) {
    if (name == "clip") return ScoreKind::Clip;
    if (name == "res") return ScoreKind::Res;
    if (name == "custom") return ScoreKind::Custom;
    throw InvalidInput("unknown score '" + std::string(name) + "'");
}

std::string_view to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::Clip: return "clip";
        case ScoreKind::Res: return "res";
        case ScoreKind::Custom: return "custom";
    }
    return "custom";
}

double score_clip(const Predictor& pred, std::span<const double> x, double y,
                  double clip_constant, double clip_cutoff) {
    double mu = pred.predict(x);
    return (y > clip_cutoff ? clip_constant : 0.0) - mu;
}

double score_res(const Predictor& pred, std::span<const double> x, double y) {
    return y - pred.predict(x);
}

ScoreFunction ScoreFunction::clip(std::shared_ptr<const Predictor> predictor, double clip_constant,
                                  double clip_cutoff) {
    if (!predictor) throw InvalidInput("CLIP score needs a predictor");
    if (!(clip_constant >= 0.0)) throw InvalidInput("clip constant must be non-negative");
    ScoreFunction sf;
    sf.kind_ = ScoreKind::Clip;
    sf.predictor_ = std::move(predictor);
    sf.clip_constant_ = clip_constant;
    sf.clip_cutoff_ = clip_cutoff;
    return sf;
}

ScoreFunction ScoreFunction::res(std::shared_ptr<const Predictor> predictor) {
    if (!predictor) throw InvalidInput("RES score needs a predictor");
    ScoreFunction sf;
    sf.kind_ = ScoreKind::Res;
    sf.predictor_ = std::move(predictor);
    return sf;
}

ScoreFunction ScoreFunction::custom(Custom fn) {
    if (!fn) throw InvalidInput("custom score needs a callable");
    ScoreFunction sf;
    sf.kind_ = ScoreKind::Custom;
    sf.custom_ = std::move(fn);
    return sf;
}

ScoreFunction ScoreFunction::with_cutoff(double clip_cutoff) const {
    ScoreFunction copy = *this;
    if (kind_ == ScoreKind::Clip) copy.clip_cutoff_ = clip_cutoff;
    return copy;
}

double ScoreFunction::operator()(std::span<const double> x, double y) const {
    switch (kind_) {
        case ScoreKind::Clip: return score_clip(*predictor_, x, y, clip_constant_, clip_cutoff_);
        case ScoreKind::Res: return score_res(*predictor_, x, y);
        case ScoreKind::Custom: return custom_(x, y);
    }
    return 0.0;
}

bool check_monotone(const ScoreFunction& sf, std::span<const double> x,
                    std::span<const double> y_grid) {
    if (y_grid.size() < 2) return true;
    double prev = sf(x, y_grid[0]);
    for (std::size_t i = 1; i < y_grid.size(); ++i) {
        double cur = sf(x, y_grid[i]);
        if (!(prev <= cur)) return false;
        prev = cur;
    }
    return true;
}

}  // namespace ocsarc
