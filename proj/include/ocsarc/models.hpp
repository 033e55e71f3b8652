#pragma once

#include "ocsarc/matrix.hpp"

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ocsarc {

/// Labeled samples. Responses are stored row-major with `response_dim`
/// columns; univariate data has response_dim == 1.
struct Dataset {
    Matrix features;
    std::vector<double> responses;
    std::size_t response_dim = 1;

    std::size_t size() const noexcept { return features.rows(); }
    std::size_t dim() const noexcept { return features.cols(); }

    /// Univariate response of sample i.
    double response(std::size_t i) const { return responses[i * response_dim]; }
    std::span<const double> response_row(std::size_t i) const {
        return {responses.data() + i * response_dim, response_dim};
    }

    /// Univariate view of response column `col`.
    std::vector<double> response_column(std::size_t col) const;

    Dataset subset(std::span<const std::size_t> indices) const;

    /// Throws InvalidInput on row-count mismatch or NaN.
    void validate() const;
};

/// A fitted model mapping a feature vector to a real score. Implementations
/// are immutable after fitting and safe for concurrent prediction.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual double predict(std::span<const double> x) const = 0;
    virtual std::size_t dim() const noexcept = 0;

    /// Writes the versioned text format read by load_predictor().
    virtual void save(std::ostream& out) const = 0;

protected:
    void check_dim(std::span<const double> x) const;
};

struct BoostParams {
    std::size_t n_trees = 100;
    std::size_t max_depth = 3;
    double learning_rate = 0.1;
    std::size_t min_samples_leaf = 5;
};

/// One least-squares regression tree stored as a flat node array.
struct RegressionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes;

    double predict(std::span<const double> x) const;
};

class BoostedTreesModel final : public Predictor {
public:
    BoostedTreesModel(std::size_t dim, double base, double learning_rate,
                      std::vector<RegressionTree> trees,
                      std::vector<double> loss_history = {});

    double predict(std::span<const double> x) const override;
    std::size_t dim() const noexcept override { return dim_; }
    void save(std::ostream& out) const override;

    double base() const noexcept { return base_; }
    double learning_rate() const noexcept { return learning_rate_; }
    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

    /// Training MSE after the base prediction and after each tree.
    const std::vector<double>& loss_history() const noexcept { return loss_history_; }

private:
    std::size_t dim_;
    double base_;
    double learning_rate_;
    std::vector<RegressionTree> trees_;
    std::vector<double> loss_history_;
};

/// Least-squares gradient boosting on univariate responses. Fitting is
/// independent of training row order.
BoostedTreesModel fit_boosted_trees(const Dataset& data, const BoostParams& params = {});

struct LogisticParams {
    double l2 = 0.0;
    double tolerance = 1e-8;
    std::size_t max_iter = 20000;
};

/// L2-regularized logistic regression. Features are standardized with the
/// training mean/std and the intercept is not penalized.
class LogisticModel final : public Predictor {
public:
    LogisticModel(std::vector<double> weights, double intercept,
                  std::vector<double> feature_mean, std::vector<double> feature_scale);

    /// Probability of the positive class.
    double predict(std::span<const double> x) const override;
    std::size_t dim() const noexcept override { return weights_.size(); }
    void save(std::ostream& out) const override;

    /// Coefficients on the standardized feature scale.
    const std::vector<double>& weights() const noexcept { return weights_; }
    double intercept() const noexcept { return intercept_; }

private:
    std::vector<double> weights_;
    double intercept_;
    std::vector<double> mean_;
    std::vector<double> scale_;
};

/// Mean log-loss plus (l2/2)*|w|^2 on already-standardized features.
/// `params` holds the weights followed by the intercept.
double logistic_objective(const Matrix& x, std::span<const double> y,
                          std::span<const double> params, double l2);
std::vector<double> logistic_gradient(const Matrix& x, std::span<const double> y,
                                      std::span<const double> params, double l2);

/// Responses must be 0/1. Throws ConvergenceError when no finite minimizer
/// exists (single class, l2 == 0) or the tolerance is not reached.
LogisticModel fit_logistic(const Dataset& data, const LogisticParams& params = {});

std::unique_ptr<Predictor> load_predictor(std::istream& in);
void save_predictor(const Predictor& model, const std::string& path);
std::unique_ptr<Predictor> load_predictor(const std::string& path);

}  // namespace ocsarc
