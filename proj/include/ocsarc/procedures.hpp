#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace ocsarc {

/// Geometric budget weights gamma_t = r^t (1 - r) / r, t >= 1. They are
/// positive and sum to 1 - r^T <= 1 over any prefix.
class GammaSequence {
public:
    explicit GammaSequence(double r);

    double r() const noexcept { return r_; }
    /// Throws InvalidInput for t == 0.
    double at(std::uint64_t t) const;

private:
    double r_;
};

double gamma_at(const GammaSequence& gs, std::uint64_t t);

/// Benjamini-Hochberg over a batch of p-values. Returns the 1-based indices
/// j with p_j <= k* q / m in ascending order.
std::vector<std::size_t> offline_bh(std::span<const double> pvals, double q);

/// The BH rank k* = max{k : p_(k) <= k q / m}, 0 if none.
std::size_t offline_bh_rank(std::span<const double> pvals, double q);

/// Per-timestep snapshot of a streaming procedure.
struct StepRecord {
    std::size_t t = 0;
    double p = 0.0;
    double gamma = 0.0;
    std::size_t k_star = 0;
    std::vector<std::size_t> newly_selected;  // ascending, 1-based
    std::size_t deselected = 0;               // |R_{t-1} \ R_t|
    std::size_t selected_size = 0;
};

enum class Method { OcsArc, OnlineBonferroni, RepeatedBh, MocsArc };

Method parse_method(std::string_view name);
std::string_view to_string(Method m);

/// A streaming selection rule consuming one p-value per timestep.
class Procedure {
public:
    virtual ~Procedure() = default;

    /// Throws InvalidInput if p is outside [0, 1].
    virtual StepRecord step(double p) = 0;

    virtual std::size_t t() const noexcept = 0;
    virtual std::size_t k_star() const noexcept = 0;
    /// Current selection set, ascending 1-based indices.
    virtual std::vector<std::size_t> selected() const = 0;
    virtual bool contains(std::size_t index) const = 0;
};

namespace detail {

/// Tracks f(k) = #{j : k_j <= k} - k over k = 1..capacity with range-add and
/// a rightmost-nonnegative search, growing by doubling.
class RankCounter {
public:
    RankCounter();

    /// Records one item whose indicator switches on at rank `k_min` (>= 1).
    void insert(std::uint64_t k_min);
    /// max{k <= limit : f(k) >= 0}, or 0.
    std::size_t rightmost_feasible(std::size_t limit);

private:
    void ensure_capacity(std::size_t limit);
    void rebuild(std::size_t capacity);
    void add(std::size_t node, std::size_t lo, std::size_t hi, std::size_t from, long delta);
    long find(std::size_t node, std::size_t lo, std::size_t hi, std::size_t limit);

    std::size_t capacity_ = 0;
    std::vector<long> max_;
    std::vector<long> lazy_;
    std::vector<std::uint64_t> inserted_;
};

}  // namespace detail

/// Online Benjamini-Hochberg thresholding with irrevocable selections:
///   k*_t = max{k in [t] : #{j <= t : p_j <= k q gamma_j} >= k}
///   R_t  = {j <= t : p_j <= k*_t q gamma_j}
/// Each step costs O(log t) amortized plus the size of the output.
class OnlineBh final : public Procedure {
public:
    OnlineBh(double q, GammaSequence gamma);

    StepRecord step(double p) override;
    std::size_t t() const noexcept override { return pvals_.size(); }
    std::size_t k_star() const noexcept override { return k_star_; }
    std::vector<std::size_t> selected() const override;
    bool contains(std::size_t index) const override;

    double q() const noexcept { return q_; }
    const GammaSequence& gamma() const noexcept { return gamma_; }
    std::span<const double> pvalues() const noexcept { return pvals_; }

    /// First timestep at which q * gamma_t fell below machine epsilon, or 0.
    /// Past this point new p-values can only be selected if exactly 0.
    std::size_t budget_exhausted_at() const noexcept { return exhausted_at_; }

private:
    std::uint64_t min_rank(double p, double q, double gamma) const;

    double q_;
    GammaSequence gamma_;
    std::vector<double> pvals_;
    std::vector<char> selected_flag_;
    std::size_t n_selected_ = 0;
    std::size_t k_star_ = 0;
    std::size_t exhausted_at_ = 0;
    detail::RankCounter counter_;
    std::multimap<std::uint64_t, std::size_t> pending_;  // min rank -> index
};

/// Online Bonferroni: select t iff p_t <= q gamma_t. Never revisits.
class OnlineBonferroni final : public Procedure {
public:
    OnlineBonferroni(double q, GammaSequence gamma);

    StepRecord step(double p) override;
    std::size_t t() const noexcept override { return t_; }
    std::size_t k_star() const noexcept override { return selected_.empty() ? 0 : 1; }
    std::vector<std::size_t> selected() const override { return selected_; }
    bool contains(std::size_t index) const override;

private:
    double q_;
    GammaSequence gamma_;
    std::size_t t_ = 0;
    std::vector<std::size_t> selected_;
};

/// Re-runs offline BH over the full history each step. Selection sets may
/// shrink; this is the non-ARC baseline.
class RepeatedBh final : public Procedure {
public:
    explicit RepeatedBh(double q);

    StepRecord step(double p) override;
    std::size_t t() const noexcept override { return history_.size(); }
    std::size_t k_star() const noexcept override { return k_star_; }
    std::vector<std::size_t> selected() const override { return current_; }
    bool contains(std::size_t index) const override;

private:
    double q_;
    std::vector<double> history_;
    std::vector<std::size_t> current_;
    std::size_t k_star_ = 0;
};

/// offline_bh over the history; the set a RepeatedBh reports after it.
std::vector<std::size_t> repeated_cs_step(std::span<const double> history, double q);

/// Builds the streaming procedure for a method (MocsArc maps to OnlineBh).
std::unique_ptr<Procedure> make_procedure(Method method, double q, double r);

}  // namespace ocsarc
