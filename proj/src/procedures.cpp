#include "ocsarc/procedures.hpp"

#include "ocsarc/error.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

namespace ocsarc {

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

void check_level(double q) {
    if (!(q > 0.0 && q < 1.0)) throw InvalidInput("FDR level q must lie in (0, 1)");
}

void check_p(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("p-value must lie in [0, 1]");
}

// The one place the online-BH indicator 1{p_j <= k q gamma_j} is evaluated.
bool passes(double p, std::uint64_t k, double q, double gamma) {
    return p <= static_cast<double>(k) * q * gamma;
}

}  // namespace

// ---------------------------------------------------------------------------

GammaSequence::GammaSequence(double r) : r_(r) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidInput("decay coefficient r must lie in (0, 1)");
}

double GammaSequence::at(std::uint64_t t) const {
    if (t == 0) throw InvalidInput("gamma is indexed from t = 1");
    // r^t (1 - r) / r, written without the division.
    return std::pow(r_, static_cast<double>(t - 1)) * (1.0 - r_);
}

double gamma_at(const GammaSequence& gs, std::uint64_t t) { return gs.at(t); }

Method parse_method(std::string_view name) {
    if (name == "ocs_arc") return Method::OcsArc;
    if (name == "ob") return Method::OnlineBonferroni;
    if (name == "repeated_cs") return Method::RepeatedBh;
    if (name == "mocs_arc") return Method::MocsArc;
    throw InvalidInput("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::OcsArc: return "ocs_arc";
        case Method::OnlineBonferroni: return "ob";
        case Method::RepeatedBh: return "repeated_cs";
        case Method::MocsArc: return "mocs_arc";
    }
    return "ocs_arc";
}

// ---------------------------------------------------------------------------
// Offline BH

std::size_t offline_bh_rank(std::span<const double> pvals, double q) {
    const std::size_t m = pvals.size();
    std::vector<double> sorted(pvals.begin(), pvals.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = m; k >= 1; --k) {
        if (sorted[k - 1] <= static_cast<double>(k) * q / static_cast<double>(m)) return k;
    }
    return 0;
}

std::vector<std::size_t> offline_bh(std::span<const double> pvals, double q) {
    std::vector<std::size_t> out;
    const std::size_t k = offline_bh_rank(pvals, q);
    if (k == 0) return out;
    const double cut = static_cast<double>(k) * q / static_cast<double>(pvals.size());
    for (std::size_t j = 0; j < pvals.size(); ++j) {
        if (pvals[j] <= cut) out.push_back(j + 1);
    }
    return out;
}

std::vector<std::size_t> repeated_cs_step(std::span<const double> history, double q) {
    if (history.empty()) throw InvalidInput("repeated BH needs a non-empty history");
    return offline_bh(history, q);
}

// ---------------------------------------------------------------------------
// RankCounter

namespace detail {

RankCounter::RankCounter() { rebuild(64); }

void RankCounter::rebuild(std::size_t capacity) {
    capacity_ = capacity;
    std::vector<long> count(capacity + 2, 0);
    for (auto a : inserted_) {
        if (a <= capacity) ++count[a];
    }
    max_.assign(2 * capacity, 0);
    lazy_.assign(2 * capacity, 0);
    // Leaves of the implicit tree sit at [capacity, 2*capacity).
    long running = 0;
    for (std::size_t k = 1; k <= capacity; ++k) {
        running += count[k];
        max_[capacity + k - 1] = running - static_cast<long>(k);
    }
    for (std::size_t node = capacity - 1; node >= 1; --node) {
        max_[node] = std::max(max_[2 * node], max_[2 * node + 1]);
    }
}

void RankCounter::ensure_capacity(std::size_t limit) {
    if (limit <= capacity_) return;
    std::size_t cap = capacity_;
    while (cap < limit) cap *= 2;
    rebuild(cap);
}

void RankCounter::add(std::size_t node, std::size_t lo, std::size_t hi, std::size_t from, long delta) {
    if (hi < from) return;
    if (lo >= from) {
        max_[node] += delta;
        if (node < capacity_) lazy_[node] += delta;
        return;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    add(2 * node, lo, mid, from, delta);
    add(2 * node + 1, mid + 1, hi, from, delta);
    max_[node] = std::max(max_[2 * node], max_[2 * node + 1]) + lazy_[node];
}

long RankCounter::find(std::size_t node, std::size_t lo, std::size_t hi, std::size_t limit) {
    // Searched from the root down, pushing pending additions as we go.
    if (lo > limit || max_[node] < 0) return 0;
    if (node >= capacity_) return static_cast<long>(lo);
    std::size_t mid = lo + (hi - lo) / 2;
    if (lazy_[node] != 0) {
        for (std::size_t child : {2 * node, 2 * node + 1}) {
            max_[child] += lazy_[node];
            if (child < capacity_) lazy_[child] += lazy_[node];
        }
        lazy_[node] = 0;
    }
    long right = find(2 * node + 1, mid + 1, hi, limit);
    if (right != 0) return right;
    return find(2 * node, lo, mid, limit);
}

void RankCounter::insert(std::uint64_t k_min) {
    if (k_min == 0) k_min = 1;
    inserted_.push_back(k_min);
    if (k_min <= capacity_) add(1, 1, capacity_, static_cast<std::size_t>(k_min), 1);
}

std::size_t RankCounter::rightmost_feasible(std::size_t limit) {
    if (limit == 0) return 0;
    ensure_capacity(limit);
    return static_cast<std::size_t>(find(1, 1, capacity_, limit));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// OnlineBh

OnlineBh::OnlineBh(double q, GammaSequence gamma) : q_(q), gamma_(gamma) { check_level(q); }

std::uint64_t OnlineBh::min_rank(double p, double q, double gamma) const {
    if (passes(p, 1, q, gamma)) return 1;
    const double unit = q * gamma;
    if (!(unit > 0.0)) return kNever;
    const double est = std::ceil(p / unit);
    if (!(est < 1e15)) return kNever;
    auto k = static_cast<std::uint64_t>(std::max(est, 1.0));
    // Correct the rounded estimate against the exact indicator.
    while (k > 1 && passes(p, k - 1, q, gamma)) --k;
    while (!passes(p, k, q, gamma)) ++k;
    return k;
}

StepRecord OnlineBh::step(double p) {
    check_p(p);
    const std::size_t t = pvals_.size() + 1;
    const double gamma = gamma_.at(t);
    if (exhausted_at_ == 0 && q_ * gamma < DBL_EPSILON) exhausted_at_ = t;

    const std::uint64_t k_min = min_rank(p, q_, gamma);
    pvals_.push_back(p);
    selected_flag_.push_back(0);
    if (k_min != kNever) {
        counter_.insert(k_min);
        pending_.emplace(k_min, t);
    }

    const std::size_t k = counter_.rightmost_feasible(t);
    if (k < k_star_) throw Error("online BH rank decreased; counter state is corrupt");
    k_star_ = k;

    StepRecord rec;
    rec.t = t;
    rec.p = p;
    rec.gamma = gamma;
    rec.k_star = k_star_;
    auto end = pending_.upper_bound(static_cast<std::uint64_t>(k_star_));
    for (auto it = pending_.begin(); it != end; ++it) {
        rec.newly_selected.push_back(it->second);
        selected_flag_[it->second - 1] = 1;
    }
    pending_.erase(pending_.begin(), end);
    std::sort(rec.newly_selected.begin(), rec.newly_selected.end());
    n_selected_ += rec.newly_selected.size();
    rec.selected_size = n_selected_;
    return rec;
}

std::vector<std::size_t> OnlineBh::selected() const {
    std::vector<std::size_t> out;
    out.reserve(n_selected_);
    for (std::size_t j = 0; j < selected_flag_.size(); ++j) {
        if (selected_flag_[j]) out.push_back(j + 1);
    }
    return out;
}

bool OnlineBh::contains(std::size_t index) const {
    return index >= 1 && index <= selected_flag_.size() && selected_flag_[index - 1];
}

// ---------------------------------------------------------------------------
// OnlineBonferroni

OnlineBonferroni::OnlineBonferroni(double q, GammaSequence gamma) : q_(q), gamma_(gamma) {
    check_level(q);
}

StepRecord OnlineBonferroni::step(double p) {
    check_p(p);
    ++t_;
    StepRecord rec;
    rec.t = t_;
    rec.p = p;
    rec.gamma = gamma_.at(t_);
    if (p <= q_ * rec.gamma) {
        selected_.push_back(t_);
        rec.newly_selected.push_back(t_);
    }
    rec.k_star = k_star();
    rec.selected_size = selected_.size();
    return rec;
}

bool OnlineBonferroni::contains(std::size_t index) const {
    return std::binary_search(selected_.begin(), selected_.end(), index);
}

// ---------------------------------------------------------------------------
// RepeatedBh

RepeatedBh::RepeatedBh(double q) : q_(q) { check_level(q); }

StepRecord RepeatedBh::step(double p) {
    check_p(p);
    history_.push_back(p);
    std::vector<std::size_t> next = offline_bh(history_, q_);

    StepRecord rec;
    rec.t = history_.size();
    rec.p = p;
    rec.gamma = std::numeric_limits<double>::quiet_NaN();
    std::set_difference(next.begin(), next.end(), current_.begin(), current_.end(),
                        std::back_inserter(rec.newly_selected));
    std::vector<std::size_t> dropped;
    std::set_difference(current_.begin(), current_.end(), next.begin(), next.end(),
                        std::back_inserter(dropped));
    rec.deselected = dropped.size();
    current_ = std::move(next);
    k_star_ = offline_bh_rank(history_, q_);
    rec.k_star = k_star_;
    rec.selected_size = current_.size();
    return rec;
}

bool RepeatedBh::contains(std::size_t index) const {
    return std::binary_search(current_.begin(), current_.end(), index);
}

std::unique_ptr<Procedure> make_procedure(Method method, double q, double r) {
    switch (method) {
        case Method::OcsArc:
        case Method::MocsArc: return std::make_unique<OnlineBh>(q, GammaSequence(r));
        case Method::OnlineBonferroni: return std::make_unique<OnlineBonferroni>(q, GammaSequence(r));
        case Method::RepeatedBh: return std::make_unique<RepeatedBh>(q);
    }
    throw InvalidInput("unknown method");
}

}  // namespace ocsarc
