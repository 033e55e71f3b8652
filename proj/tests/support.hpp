#pragma once

#include "ocsarc/models.hpp"

#include <functional>
#include <memory>
#include <ostream>

namespace testing {

// Predictor backed by an arbitrary function; save() is not supported.
class FnPredictor final : public ocsarc::Predictor {
public:
    FnPredictor(std::size_t dim, std::function<double(std::span<const double>)> fn)
        : dim_(dim), fn_(std::move(fn)) {}
    double predict(std::span<const double> x) const override {
        check_dim(x);
        return fn_(x);
    }
    std::size_t dim() const noexcept override { return dim_; }
    void save(std::ostream&) const override {}

private:
    std::size_t dim_;
    std::function<double(std::span<const double>)> fn_;
};

inline std::shared_ptr<const ocsarc::Predictor> constant(double value, std::size_t dim = 1) {
    return std::make_shared<FnPredictor>(dim, [value](std::span<const double>) { return value; });
}

inline std::shared_ptr<const ocsarc::Predictor> coordinate(std::size_t i, std::size_t dim) {
    return std::make_shared<FnPredictor>(dim, [i](std::span<const double> x) { return x[i]; });
}

}  // namespace testing
