#include "ocsarc/ocsarc.h"

#include "ocsarc/error.hpp"
#include "ocsarc/experiment.hpp"
#include "ocsarc/oracle.hpp"
#include "ocsarc/procedures.hpp"
#include "ocsarc/pvalues.hpp"
#include "ocsarc/version.hpp"

#include <cstring>
#include <memory>
#include <string>
#include <vector>

struct ocs_calibration {
    ocsarc::CalibrationScores cal;
};

struct ocs_selector {
    std::unique_ptr<ocsarc::Procedure> proc;
    ocsarc::StepRecord last;
};

struct ocs_diagnostics {
    std::vector<ocsarc::Diagnostic> items;
};

namespace {

thread_local std::string g_last_error;

ocs_status fail(ocs_status status, const std::string& msg) {
    g_last_error = msg;
    return status;
}

template <class F>
ocs_status guarded(F&& body) {
    try {
        return body();
    } catch (const ocsarc::InvalidInput& e) {
        return fail(OCS_ERR_INVALID_INPUT, e.what());
    } catch (const ocsarc::ParseError& e) {
        return fail(OCS_ERR_PARSE, e.what());
    } catch (const ocsarc::SchemaError& e) {
        return fail(OCS_ERR_SCHEMA, e.what());
    } catch (const ocsarc::ConvergenceError& e) {
        return fail(OCS_ERR_CONVERGENCE, e.what());
    } catch (const ocsarc::ConfigError& e) {
        return fail(OCS_ERR_CONFIG, e.what());
    } catch (const ocsarc::IoError& e) {
        return fail(OCS_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(OCS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(OCS_ERR_INTERNAL, "unknown error");
    }
}

ocs_status null_arg(const char* name) {
    return fail(OCS_ERR_INVALID_INPUT, std::string(name) + " must not be NULL");
}

ocs_status copy_indices(const std::vector<std::size_t>& src, size_t* dst, size_t capacity, size_t* count) {
    if (!count) return null_arg("count");
    *count = src.size();
    if (capacity < src.size()) {
        return fail(OCS_ERR_BUFFER, "buffer holds " + std::to_string(capacity) + " entries, " +
                                        std::to_string(src.size()) + " required");
    }
    if (!src.empty() && !dst) return null_arg("indices");
    std::copy(src.begin(), src.end(), dst);
    return OCS_OK;
}

}  // namespace

extern "C" {

const char* ocs_version(void) { return ocsarc::kVersion; }

const char* ocs_last_error(void) { return g_last_error.c_str(); }

const char* ocs_status_name(ocs_status status) {
    switch (status) {
        case OCS_OK: return "ok";
        case OCS_ERR_INVALID_INPUT: return "invalid input";
        case OCS_ERR_PARSE: return "parse error";
        case OCS_ERR_SCHEMA: return "schema error";
        case OCS_ERR_CONVERGENCE: return "convergence error";
        case OCS_ERR_CONFIG: return "config error";
        case OCS_ERR_IO: return "i/o error";
        case OCS_ERR_BUFFER: return "buffer too small";
        case OCS_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

ocs_status ocs_calibration_create(const double* scores, size_t n, ocs_calibration** out) {
    if (!out) return null_arg("out");
    if (n > 0 && !scores) return null_arg("scores");
    return guarded([&] {
        auto handle = std::make_unique<ocs_calibration>();
        handle->cal = ocsarc::build_calibration(std::span<const double>(scores, n));
        *out = handle.release();
        return OCS_OK;
    });
}

void ocs_calibration_destroy(ocs_calibration* cal) { delete cal; }

ocs_status ocs_calibration_size(const ocs_calibration* cal, size_t* n) {
    if (!cal) return null_arg("cal");
    if (!n) return null_arg("n");
    *n = cal->cal.size();
    return OCS_OK;
}

ocs_status ocs_conformal_p(const ocs_calibration* cal, double v_hat, double u, double* p) {
    if (!cal) return null_arg("cal");
    if (!p) return null_arg("p");
    return guarded([&] {
        *p = ocsarc::conformal_p(cal->cal, v_hat, u).p;
        return OCS_OK;
    });
}

ocs_status ocs_gamma_at(double r, uint64_t t, double* gamma) {
    if (!gamma) return null_arg("gamma");
    return guarded([&] {
        *gamma = ocsarc::GammaSequence(r).at(t);
        return OCS_OK;
    });
}

ocs_status ocs_offline_bh(const double* pvals, size_t m, double q, size_t* indices, size_t capacity,
                          size_t* count) {
    if (m > 0 && !pvals) return null_arg("pvals");
    return guarded([&] {
        if (!(q > 0.0 && q < 1.0)) throw ocsarc::InvalidInput("FDR level q must lie in (0, 1)");
        return copy_indices(ocsarc::offline_bh(std::span<const double>(pvals, m), q), indices, capacity, count);
    });
}

ocs_status ocs_selector_create(ocs_method method, double q, double r, ocs_selector** out) {
    if (!out) return null_arg("out");
    return guarded([&] {
        ocsarc::Method m;
        switch (method) {
            case OCS_METHOD_OCS_ARC: m = ocsarc::Method::OcsArc; break;
            case OCS_METHOD_OB: m = ocsarc::Method::OnlineBonferroni; break;
            case OCS_METHOD_REPEATED_CS: m = ocsarc::Method::RepeatedBh; break;
            default: throw ocsarc::InvalidInput("unknown method");
        }
        if (m == ocsarc::Method::RepeatedBh) r = 0.5;
        auto handle = std::make_unique<ocs_selector>();
        handle->proc = ocsarc::make_procedure(m, q, r);
        *out = handle.release();
        return OCS_OK;
    });
}

void ocs_selector_destroy(ocs_selector* sel) { delete sel; }

ocs_status ocs_selector_push(ocs_selector* sel, double p, size_t* newly_count) {
    if (!sel) return null_arg("sel");
    return guarded([&] {
        sel->last = sel->proc->step(p);
        if (newly_count) *newly_count = sel->last.newly_selected.size();
        return OCS_OK;
    });
}

ocs_status ocs_selector_last_newly(const ocs_selector* sel, size_t* indices, size_t capacity, size_t* count) {
    if (!sel) return null_arg("sel");
    return copy_indices(sel->last.newly_selected, indices, capacity, count);
}

ocs_status ocs_selector_last_deselected(const ocs_selector* sel, size_t* count) {
    if (!sel) return null_arg("sel");
    if (!count) return null_arg("count");
    *count = sel->last.deselected;
    return OCS_OK;
}

ocs_status ocs_selector_selected(const ocs_selector* sel, size_t* indices, size_t capacity, size_t* count) {
    if (!sel) return null_arg("sel");
    return guarded([&] { return copy_indices(sel->proc->selected(), indices, capacity, count); });
}

ocs_status ocs_selector_k_star(const ocs_selector* sel, size_t* k_star) {
    if (!sel) return null_arg("sel");
    if (!k_star) return null_arg("k_star");
    *k_star = sel->proc->k_star();
    return OCS_OK;
}

ocs_status ocs_selector_timestep(const ocs_selector* sel, size_t* t) {
    if (!sel) return null_arg("sel");
    if (!t) return null_arg("t");
    *t = sel->proc->t();
    return OCS_OK;
}

ocs_status ocs_config_validate(const char* config_path, ocs_diagnostics** out) {
    if (!config_path) return null_arg("config_path");
    if (!out) return null_arg("out");
    return guarded([&] {
        auto handle = std::make_unique<ocs_diagnostics>();
        try {
            handle->items = ocsarc::validate_config(ocsarc::load_config(config_path));
        } catch (const ocsarc::ConfigError& e) {
            // Type errors surface as a single diagnostic rather than a failure.
            std::string msg = e.what();
            auto colon = msg.find(':');
            if (colon != std::string::npos && msg.find(' ') > colon) {
                handle->items.push_back({msg.substr(0, colon), msg.substr(colon + 2)});
            } else {
                handle->items.push_back({"config", msg});
            }
        }
        *out = handle.release();
        return OCS_OK;
    });
}

size_t ocs_diagnostics_count(const ocs_diagnostics* diags) { return diags ? diags->items.size() : 0; }

const char* ocs_diagnostics_field(const ocs_diagnostics* diags, size_t i) {
    if (!diags || i >= diags->items.size()) return nullptr;
    return diags->items[i].field.c_str();
}

const char* ocs_diagnostics_message(const ocs_diagnostics* diags, size_t i) {
    if (!diags || i >= diags->items.size()) return nullptr;
    return diags->items[i].message.c_str();
}

void ocs_diagnostics_destroy(ocs_diagnostics* diags) { delete diags; }

void ocs_run_options_init(ocs_run_options* opts) {
    if (!opts) return;
    *opts = ocs_run_options{};
}

ocs_status ocs_experiment_run(const char* config_path, const ocs_run_options* opts, char* out_dir_buf,
                              size_t out_dir_capacity) {
    if (!config_path) return null_arg("config_path");
    return guarded([&] {
        ocsarc::ExperimentConfig cfg = ocsarc::load_config(config_path);
        if (opts) {
            if (opts->out_dir) cfg.output_dir = opts->out_dir;
            if (opts->replicates) cfg.replicates = opts->replicates;
            if (opts->has_seed) cfg.base_seed = opts->seed;
            if (opts->write_trajectories) cfg.write_trajectories = true;
            if (opts->threads) cfg.threads = opts->threads;
        }
        ocsarc::ExperimentResult result = ocsarc::run_experiment(cfg);
        if (out_dir_buf && out_dir_capacity > 0) {
            std::size_t n = std::min(out_dir_capacity - 1, cfg.output_dir.size());
            std::memcpy(out_dir_buf, cfg.output_dir.data(), n);
            out_dir_buf[n] = '\0';
        }
        if (opts && opts->on_warning) {
            for (const auto& w : result.warnings) opts->on_warning(w.c_str(), opts->warning_ctx);
        }
        return OCS_OK;
    });
}

ocs_status ocs_oracle_check(size_t streams, size_t max_len, uint64_t seed, size_t* steps, size_t* mismatches) {
    if (!mismatches) return null_arg("mismatches");
    return guarded([&] {
        auto report = ocsarc::oracle::check_online_bh(streams, max_len, seed);
        if (steps) *steps = report.steps;
        *mismatches = report.mismatches;
        return OCS_OK;
    });
}

}  // extern "C"
