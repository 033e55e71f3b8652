#include "ocsarc/metrics.hpp"

#include "ocsarc/error.hpp"

#include <algorithm>
#include <cmath>

namespace ocsarc {

namespace {

void check_index(std::size_t j, const TruthLabels& is_null) {
    if (j == 0 || j > is_null.size()) {
        throw InvalidInput("selected index " + std::to_string(j) + " has no truth label");
    }
}

}  // namespace

double fdp(std::span<const std::size_t> selected, const TruthLabels& is_null) {
    if (selected.empty()) return 0.0;
    std::size_t false_discoveries = 0;
    for (auto j : selected) {
        check_index(j, is_null);
        false_discoveries += is_null[j - 1];
    }
    return static_cast<double>(false_discoveries) / static_cast<double>(selected.size());
}

double power(std::span<const std::size_t> selected, const TruthLabels& is_null) {
    std::size_t hits = 0;
    for (auto j : selected) {
        check_index(j, is_null);
        hits += !is_null[j - 1];
    }
    const auto non_nulls = static_cast<std::size_t>(std::count(is_null.begin(), is_null.end(), false));
    if (non_nulls == 0) return 0.0;
    return static_cast<double>(hits) / static_cast<double>(non_nulls);
}

std::size_t reject_to_accept(std::span<const std::vector<std::size_t>> trajectory) {
    std::size_t total = 0;
    for (std::size_t t = 1; t < trajectory.size(); ++t) {
        std::vector<std::size_t> prev = trajectory[t - 1], cur = trajectory[t];
        std::sort(prev.begin(), prev.end());
        std::sort(cur.begin(), cur.end());
        std::vector<std::size_t> dropped;
        std::set_difference(prev.begin(), prev.end(), cur.begin(), cur.end(), std::back_inserter(dropped));
        total += dropped.size();
    }
    return total;
}

SummaryStat summarize(std::span<const double> values) {
    if (values.empty()) throw InvalidInput("cannot summarize an empty sample");
    SummaryStat s;
    const double n = static_cast<double>(values.size());
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    // Offsets from the minimum keep identical samples exact.
    double sum = 0.0;
    for (double v : values) sum += v - s.min;
    const double offset = sum / n;
    s.mean = std::clamp(s.min + offset, s.min, s.max);
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            double d = (v - s.min) - offset;
            ss += d * d;
        }
        s.std = std::sqrt(ss / (n - 1.0));
        s.se = s.std / std::sqrt(n);
    }
    return s;
}

Summary aggregate(std::span<const RunResult> results, std::span<const std::size_t> checkpoints) {
    if (results.empty()) throw InvalidInput("aggregate needs at least one run");
    for (const auto& r : results) {
        if (!std::equal(r.checkpoints.begin(), r.checkpoints.end(), checkpoints.begin(), checkpoints.end())) {
            throw InvalidInput("run checkpoints do not match the requested checkpoints");
        }
        if (r.fdp_at.size() != checkpoints.size() || r.power_at.size() != checkpoints.size() ||
            r.r2a_at.size() != checkpoints.size()) {
            throw InvalidInput("run result is missing checkpoint values");
        }
    }
    Summary out;
    out.runs = results.size();
    out.single_run = results.size() == 1;
    std::vector<double> f(results.size()), p(results.size()), a(results.size());
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        for (std::size_t i = 0; i < results.size(); ++i) {
            f[i] = results[i].fdp_at[c];
            p[i] = results[i].power_at[c];
            a[i] = results[i].r2a_at[c];
        }
        out.checkpoints.push_back({checkpoints[c], summarize(f), summarize(p), summarize(a)});
    }
    return out;
}

}  // namespace ocsarc
