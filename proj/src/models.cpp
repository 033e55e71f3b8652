#include "ocsarc/models.hpp"

#include "ocsarc/error.hpp"
#include "ocsarc/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ocsarc {

// ---------------------------------------------------------------------------
// Dataset

std::vector<double> Dataset::response_column(std::size_t col) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = responses[i * response_dim + col];
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.features = features.select_rows(indices);
    out.response_dim = response_dim;
    out.responses.reserve(indices.size() * response_dim);
    for (auto i : indices) {
        auto r = response_row(i);
        out.responses.insert(out.responses.end(), r.begin(), r.end());
    }
    return out;
}

void Dataset::validate() const {
    if (response_dim == 0) throw InvalidInput("response dimension must be positive");
    if (responses.size() != features.rows() * response_dim) {
        throw InvalidInput("feature rows (" + std::to_string(features.rows()) +
                           ") do not match response count");
    }
    auto has_nan = [](const std::vector<double>& v) {
        return std::any_of(v.begin(), v.end(), [](double d) { return std::isnan(d); });
    };
    if (has_nan(features.data()) || has_nan(responses)) {
        throw InvalidInput("dataset contains NaN");
    }
}

void Predictor::check_dim(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw InvalidInput("feature vector has length " + std::to_string(x.size()) +
                           ", predictor expects " + std::to_string(dim()));
    }
}

// ---------------------------------------------------------------------------
// Regression trees

double RegressionTree::predict(std::span<const double> x) const {
    int at = 0;
    while (nodes[at].feature >= 0) {
        const Node& n = nodes[at];
        at = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[at].value;
}

namespace {

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const double> target, const BoostParams& params)
        : x_(x), target_(target), params_(params) {}

    RegressionTree build() {
        std::vector<std::size_t> idx(x_.rows());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        double total_ss = 0.0;
        for (double r : target_) total_ss += r * r;
        min_gain_ = 1e-12 * total_ss;
        grow(idx, 0);
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        std::size_t left_count = 0;
        double gain = 0.0;
    };

    int grow(std::vector<std::size_t>& idx, std::size_t depth) {
        double sum = 0.0;
        for (auto i : idx) sum += target_[i];
        const std::size_t n = idx.size();

        int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({});
        tree_.nodes[id].value = n ? sum / static_cast<double>(n) : 0.0;

        if (depth >= params_.max_depth || n < 2 * std::max<std::size_t>(params_.min_samples_leaf, 1)) {
            return id;
        }
        Split best = find_split(idx, sum);
        if (best.feature < 0) return id;

        std::vector<std::size_t> left, right;
        left.reserve(best.left_count);
        right.reserve(n - best.left_count);
        for (auto i : idx) {
            (x_(i, best.feature) <= best.threshold ? left : right).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        int l = grow(left, depth + 1);
        int r = grow(right, depth + 1);
        auto& node = tree_.nodes[id];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    // Exhaustive scan over sorted unique values of every feature, midpoint
    // thresholds, variance-reduction gain. First best split wins ties.
    Split find_split(const std::vector<std::size_t>& idx, double sum) const {
        const std::size_t n = idx.size();
        const std::size_t min_leaf = std::max<std::size_t>(params_.min_samples_leaf, 1);
        const double parent = sum * sum / static_cast<double>(n);
        Split best;
        best.gain = min_gain_;

        std::vector<std::size_t> order(idx);
        for (std::size_t f = 0; f < x_.cols(); ++f) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                double xa = x_(a, f), xb = x_(b, f);
                return xa < xb || (xa == xb && a < b);
            });
            double left_sum = 0.0;
            for (std::size_t s = 1; s < n; ++s) {
                left_sum += target_[order[s - 1]];
                if (s < min_leaf || n - s < min_leaf) continue;
                double lo = x_(order[s - 1], f), hi = x_(order[s], f);
                if (!(lo < hi)) continue;
                double right_sum = sum - left_sum;
                double gain = left_sum * left_sum / static_cast<double>(s) +
                              right_sum * right_sum / static_cast<double>(n - s) - parent;
                if (gain > best.gain) {
                    double mid = lo + (hi - lo) / 2.0;
                    if (!(mid < hi)) mid = lo;
                    best = {static_cast<int>(f), mid, s, gain};
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const double> target_;
    const BoostParams& params_;
    double min_gain_ = 0.0;
    RegressionTree tree_;
};

double mean_squared(std::span<const double> y, std::span<const double> fitted) {
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double d = y[i] - fitted[i];
        ss += d * d;
    }
    return ss / static_cast<double>(y.size());
}

// Lexicographic (features, response) order so the fit does not depend on
// the order rows were supplied in.
std::vector<std::size_t> canonical_order(const Dataset& data) {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        auto ra = data.features.row(a), rb = data.features.row(b);
        for (std::size_t c = 0; c < ra.size(); ++c) {
            if (ra[c] != rb[c]) return ra[c] < rb[c];
        }
        return data.response(a) < data.response(b);
    });
    return idx;
}

}  // namespace

BoostedTreesModel::BoostedTreesModel(std::size_t dim, double base, double learning_rate,
                                     std::vector<RegressionTree> trees,
                                     std::vector<double> loss_history)
    : dim_(dim), base_(base), learning_rate_(learning_rate), trees_(std::move(trees)),
      loss_history_(std::move(loss_history)) {}

double BoostedTreesModel::predict(std::span<const double> x) const {
    check_dim(x);
    double out = base_;
    for (const auto& t : trees_) out += learning_rate_ * t.predict(x);
    return out;
}

BoostedTreesModel fit_boosted_trees(const Dataset& data, const BoostParams& params) {
    if (data.size() == 0) throw InvalidInput("cannot fit boosted trees on an empty dataset");
    if (data.dim() == 0) throw InvalidInput("cannot fit boosted trees without features");
    if (data.response_dim != 1) throw InvalidInput("boosted trees need a univariate response");
    if (!(params.learning_rate >= 0.0)) throw InvalidInput("learning_rate must be non-negative");
    data.validate();

    const Dataset sorted = data.subset(canonical_order(data));
    const std::size_t n = sorted.size();
    std::span<const double> y = sorted.responses;

    double base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    std::vector<double> fitted(n, base);
    std::vector<double> residual(n);
    std::vector<double> history{mean_squared(y, fitted)};
    std::vector<RegressionTree> trees;

    if (params.learning_rate > 0.0) {
        trees.reserve(params.n_trees);
        for (std::size_t m = 0; m < params.n_trees; ++m) {
            for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - fitted[i];
            RegressionTree tree = TreeBuilder(sorted.features, residual, params).build();
            for (std::size_t i = 0; i < n; ++i) {
                fitted[i] += params.learning_rate * tree.predict(sorted.features.row(i));
            }
            double loss = mean_squared(y, fitted);
            // Mean-valued leaves cannot increase squared loss for rates <= 2.
            if (params.learning_rate <= 2.0 && loss > history.back() * (1.0 + 1e-12) + 1e-300) {
                throw Error("boosting loss increased at tree " + std::to_string(m + 1));
            }
            history.push_back(loss);
            trees.push_back(std::move(tree));
        }
    }
    return BoostedTreesModel(data.dim(), base, params.learning_rate, std::move(trees),
                             std::move(history));
}

// ---------------------------------------------------------------------------
// Logistic regression

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double linear(std::span<const double> row, std::span<const double> params) {
    double z = params.back();
    for (std::size_t c = 0; c < row.size(); ++c) z += params[c] * row[c];
    return z;
}

}  // namespace

double logistic_objective(const Matrix& x, std::span<const double> y,
                          std::span<const double> params, double l2) {
    const std::size_t n = x.rows();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double z = linear(x.row(i), params);
        loss += softplus(z) - y[i] * z;
    }
    loss /= static_cast<double>(n);
    double ww = 0.0;
    for (std::size_t c = 0; c + 1 < params.size(); ++c) ww += params[c] * params[c];
    return loss + 0.5 * l2 * ww;
}

std::vector<double> logistic_gradient(const Matrix& x, std::span<const double> y,
                                      std::span<const double> params, double l2) {
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> g(d + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        double err = sigmoid(linear(row, params)) - y[i];
        for (std::size_t c = 0; c < d; ++c) g[c] += err * row[c];
        g[d] += err;
    }
    for (auto& v : g) v /= static_cast<double>(n);
    for (std::size_t c = 0; c < d; ++c) g[c] += l2 * params[c];
    return g;
}

LogisticModel::LogisticModel(std::vector<double> weights, double intercept,
                             std::vector<double> feature_mean, std::vector<double> feature_scale)
    : weights_(std::move(weights)), intercept_(intercept), mean_(std::move(feature_mean)),
      scale_(std::move(feature_scale)) {}

double LogisticModel::predict(std::span<const double> x) const {
    check_dim(x);
    double z = intercept_;
    for (std::size_t c = 0; c < weights_.size(); ++c) z += weights_[c] * (x[c] - mean_[c]) / scale_[c];
    return sigmoid(z);
}

namespace {

// Solves A x = b for symmetric positive definite A given by its lower
// triangle (row-major, k x k). Returns false if A is not positive definite.
bool cholesky_solve(std::vector<double> a, std::size_t k, const std::vector<double>& b, std::vector<double>& x) {
    for (std::size_t j = 0; j < k; ++j) {
        double diag = a[j * k + j];
        for (std::size_t p = 0; p < j; ++p) diag -= a[j * k + p] * a[j * k + p];
        if (!(diag > 0.0)) return false;
        a[j * k + j] = std::sqrt(diag);
        for (std::size_t i = j + 1; i < k; ++i) {
            double v = a[i * k + j];
            for (std::size_t p = 0; p < j; ++p) v -= a[i * k + p] * a[j * k + p];
            a[i * k + j] = v / a[j * k + j];
        }
    }
    x.assign(b.begin(), b.end());
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t p = 0; p < i; ++p) x[i] -= a[i * k + p] * x[p];
        x[i] /= a[i * k + i];
    }
    for (std::size_t i = k; i-- > 0;) {
        for (std::size_t p = i + 1; p < k; ++p) x[i] -= a[p * k + i] * x[p];
        x[i] /= a[i * k + i];
    }
    return true;
}

}  // namespace

LogisticModel fit_logistic(const Dataset& data, const LogisticParams& params) {
    if (data.size() == 0) throw InvalidInput("cannot fit logistic regression on an empty dataset");
    if (data.response_dim != 1) throw InvalidInput("logistic regression needs a univariate response");
    if (!(params.l2 >= 0.0)) throw InvalidInput("l2 must be non-negative");
    data.validate();

    const std::size_t n = data.size(), d = data.dim();
    std::size_t positives = 0;
    for (double v : data.responses) {
        if (v != 0.0 && v != 1.0) throw InvalidInput("logistic targets must be 0 or 1");
        positives += v == 1.0;
    }
    if (params.l2 == 0.0 && (positives == 0 || positives == n)) {
        throw ConvergenceError("single-class data has no finite maximum-likelihood fit without l2");
    }

    std::vector<double> mean(d, 0.0), scale(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) mean[c] += data.features(i, c);
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) {
            double dv = data.features(i, c) - mean[c];
            scale[c] += dv * dv;
        }
    for (auto& s : scale) {
        s = std::sqrt(s / static_cast<double>(n));
        if (!(s > 0.0)) s = 1.0;
    }
    Matrix z(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) z(i, c) = (data.features(i, c) - mean[c]) / scale[c];

    // Damped Newton iterations with Armijo backtracking.
    const std::size_t k = d + 1;
    std::vector<double> w(k, 0.0), trial(k), hess(k * k), dir(k);
    double f = logistic_objective(z, data.responses, w, params.l2);
    double gmax = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < params.max_iter; ++it) {
        auto g = logistic_gradient(z, data.responses, w, params.l2);
        gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (gmax < params.tolerance) break;

        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double eta = w[d];
            for (std::size_t c = 0; c < d; ++c) eta += w[c] * z(i, c);
            double pr = sigmoid(eta);
            double wt = pr * (1.0 - pr) / static_cast<double>(n);
            for (std::size_t a = 0; a < k; ++a) {
                double za = a < d ? z(i, a) : 1.0;
                for (std::size_t b = 0; b <= a; ++b) hess[a * k + b] += wt * za * (b < d ? z(i, b) : 1.0);
            }
        }
        for (std::size_t c = 0; c < d; ++c) hess[c * k + c] += params.l2;
        for (std::size_t a = 0; a < k; ++a) hess[a * k + a] += 1e-12;
        if (!cholesky_solve(hess, k, g, dir)) break;

        double slope = 0.0;
        for (std::size_t c = 0; c < k; ++c) slope += g[c] * dir[c];
        double step = 1.0;
        double f_trial = f;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t c = 0; c < k; ++c) trial[c] = w[c] - step * dir[c];
            f_trial = logistic_objective(z, data.responses, trial, params.l2);
            if (f_trial <= f - 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        w.swap(trial);
        f = f_trial;
    }
    {
        auto g = logistic_gradient(z, data.responses, w, params.l2);
        gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
    }
    if (!(gmax < params.tolerance)) {
        throw ConvergenceError("logistic regression did not reach gradient tolerance (|g| = " +
                               format_double(gmax) + ")");
    }
    double intercept = w.back();
    w.pop_back();
    return LogisticModel(std::move(w), intercept, std::move(mean), std::move(scale));
}

// ---------------------------------------------------------------------------
// Persistence. Text format, one record per line:
//
//   ocsarc-model 1
//   kind boosted_trees | logistic
//   ...kind-specific records...
//   end

namespace {

constexpr const char* kMagic = "ocsarc-model";
constexpr int kFormatVersion = 1;

void write_values(std::ostream& out, const char* key, std::span<const double> values) {
    out << key;
    for (double v : values) out << ' ' << format_double(v);
    out << '\n';
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::istringstream record(const std::string& key) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string got;
            ss >> got;
            if (got != key) fail("expected '" + key + "', found '" + got + "'");
            return ss;
        }
        fail("unexpected end of model file, expected '" + key + "'");
    }

    double number(std::istringstream& ss) {
        std::string tok;
        double v = 0.0;
        if (!(ss >> tok) || !parse_double(tok, v)) fail("bad number '" + tok + "'");
        return v;
    }

    std::size_t count(std::istringstream& ss) {
        double v = number(ss);
        if (v < 0 || v != std::floor(v) || v > 1e12) fail("bad count");
        return static_cast<std::size_t>(v);
    }

    std::vector<double> numbers(const std::string& key, std::size_t n) {
        auto ss = record(key);
        std::vector<double> out(n);
        for (auto& v : out) v = number(ss);
        return out;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("model file line " + std::to_string(line_no_) + ": " + msg, line_no_);
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

}  // namespace

void BoostedTreesModel::save(std::ostream& out) const {
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "kind boosted_trees\n";
    out << "dim " << dim_ << '\n';
    out << "base " << format_double(base_) << '\n';
    out << "learning_rate " << format_double(learning_rate_) << '\n';
    out << "trees " << trees_.size() << '\n';
    for (const auto& t : trees_) {
        out << "tree " << t.nodes.size() << '\n';
        for (const auto& n : t.nodes) {
            out << "node " << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' '
                << n.right << ' ' << format_double(n.value) << '\n';
        }
    }
    out << "end\n";
}

void LogisticModel::save(std::ostream& out) const {
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "kind logistic\n";
    out << "dim " << weights_.size() << '\n';
    out << "intercept " << format_double(intercept_) << '\n';
    write_values(out, "weights", weights_);
    write_values(out, "mean", mean_);
    write_values(out, "scale", scale_);
    out << "end\n";
}

std::unique_ptr<Predictor> load_predictor(std::istream& in) {
    Reader rd(in);
    {
        auto ss = rd.record(kMagic);
        if (rd.count(ss) != kFormatVersion) rd.fail("unsupported model format version");
    }
    std::string kind;
    rd.record("kind") >> kind;
    auto dss = rd.record("dim");
    std::size_t dim = rd.count(dss);

    std::unique_ptr<Predictor> model;
    if (kind == "boosted_trees") {
        auto bss = rd.record("base");
        double base = rd.number(bss);
        auto lss = rd.record("learning_rate");
        double lr = rd.number(lss);
        auto tss = rd.record("trees");
        std::size_t n_trees = rd.count(tss);
        std::vector<RegressionTree> trees(n_trees);
        for (auto& t : trees) {
            auto hs = rd.record("tree");
            std::size_t n_nodes = rd.count(hs);
            if (n_nodes == 0) rd.fail("tree without nodes");
            t.nodes.resize(n_nodes);
            for (auto& node : t.nodes) {
                auto ns = rd.record("node");
                int feature = 0, left = 0, right = 0;
                ns >> feature;
                node.threshold = rd.number(ns);
                ns >> left >> right;
                node.value = rd.number(ns);
                if (!ns) rd.fail("malformed node");
                node.feature = feature;
                node.left = left;
                node.right = right;
                const int limit = static_cast<int>(n_nodes);
                if (feature >= static_cast<int>(dim) ||
                    (feature >= 0 && (left <= 0 || left >= limit || right <= 0 || right >= limit))) {
                    rd.fail("node references out of range");
                }
            }
        }
        model = std::make_unique<BoostedTreesModel>(dim, base, lr, std::move(trees));
    } else if (kind == "logistic") {
        auto iss = rd.record("intercept");
        double intercept = rd.number(iss);
        auto w = rd.numbers("weights", dim);
        auto m = rd.numbers("mean", dim);
        auto s = rd.numbers("scale", dim);
        model = std::make_unique<LogisticModel>(std::move(w), intercept, std::move(m), std::move(s));
    } else {
        rd.fail("unknown model kind '" + kind + "'");
    }
    rd.record("end");
    return model;
}

void save_predictor(const Predictor& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    model.save(out);
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::unique_ptr<Predictor> load_predictor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return load_predictor(in);
}

}  // namespace ocsarc
