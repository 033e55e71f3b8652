#include "ocsarc/error.hpp"
#include "ocsarc/experiment.hpp"
#include "ocsarc/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ocsarc {

using nlohmann::json;

namespace {

[[noreturn]] void type_error(const std::string& field, const char* expected) {
    throw ConfigError(field + ": expected " + expected);
}

double to_number(const json& v, const std::string& field) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        double d = 0.0;
        if (parse_double(v.get<std::string>(), d)) return d;
    }
    type_error(field, "a number");
}

std::size_t to_count(const json& v, const std::string& field) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer()) {
        if (v.get<long long>() < 0) type_error(field, "a non-negative integer");
        return static_cast<std::size_t>(v.get<long long>());
    }
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (d >= 0 && d == std::floor(d) && d < 1e15) return static_cast<std::size_t>(d);
    }
    type_error(field, "a non-negative integer");
}

std::string to_string_value(const json& v, const std::string& field) {
    if (!v.is_string()) type_error(field, "a string");
    return v.get<std::string>();
}

template <class F>
auto scalar_or_list(const json& v, const std::string& field, F convert) {
    using T = decltype(convert(v, field));
    std::vector<T> out;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(convert(v[i], field + "[" + std::to_string(i) + "]"));
        }
    } else {
        out.push_back(convert(v, field));
    }
    return out;
}

json number_json(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

void check_keys(const json& obj, const std::string& prefix, std::initializer_list<const char*> known,
                std::vector<std::string>& unknown) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; })) {
            unknown.push_back(prefix + it.key());
        }
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");

    ExperimentConfig cfg;
    check_keys(root, "",
               {"experiment_id", "data", "sizes", "method", "methods", "score", "scores", "q", "r",
                "clip_constant", "threshold", "model", "checkpoints", "replicates", "base_seed",
                "threads", "region", "output_dir", "write_trajectories"},
               cfg.unknown_keys);

    if (root.contains("experiment_id")) cfg.experiment_id = to_string_value(root["experiment_id"], "experiment_id");

    bool q_given = false;
    if (root.contains("data")) {
        const json& d = root["data"];
        if (!d.is_object()) type_error("data", "an object");
        check_keys(d, "data.", {"source", "setting", "sigma", "path", "target", "threshold_column", "features"},
                   cfg.unknown_keys);
        std::string source = d.contains("source") ? to_string_value(d["source"], "data.source") : "sim";
        if (source == "sim") {
            cfg.data.kind = DataSourceKind::Sim;
        } else if (source == "csv") {
            cfg.data.kind = DataSourceKind::Csv;
        } else {
            throw ConfigError("data.source: expected \"sim\" or \"csv\"");
        }
        if (d.contains("setting")) cfg.data.setting = static_cast<int>(to_count(d["setting"], "data.setting"));
        if (d.contains("sigma")) cfg.data.sigmas = scalar_or_list(d["sigma"], "data.sigma", to_number);
        if (d.contains("path")) cfg.data.csv_path = to_string_value(d["path"], "data.path");
        if (d.contains("target")) cfg.data.csv_schema.target = to_string_value(d["target"], "data.target");
        if (d.contains("threshold_column") && !d["threshold_column"].is_null()) {
            cfg.data.csv_schema.threshold_column = to_string_value(d["threshold_column"], "data.threshold_column");
        }
        if (d.contains("features")) {
            cfg.data.csv_schema.features = scalar_or_list(d["features"], "data.features", to_string_value);
        }
    }

    if (root.contains("sizes")) {
        const json& s = root["sizes"];
        if (!s.is_object()) type_error("sizes", "an object");
        check_keys(s, "sizes.", {"train", "calibration", "test"}, cfg.unknown_keys);
        if (s.contains("train")) cfg.n_train = to_count(s["train"], "sizes.train");
        if (s.contains("calibration")) {
            cfg.n_calibration = scalar_or_list(s["calibration"], "sizes.calibration", to_count);
        }
        if (s.contains("test")) cfg.n_test = to_count(s["test"], "sizes.test");
    }

    auto parse_methods = [](const json& v, const std::string& field) {
        std::vector<Method> out;
        for (const auto& name : scalar_or_list(v, field, to_string_value)) {
            try {
                out.push_back(parse_method(name));
            } catch (const InvalidInput&) {
                throw ConfigError(field + ": unknown method '" + name +
                                  "' (expected ocs_arc, ob, repeated_cs or mocs_arc)");
            }
        }
        return out;
    };
    if (root.contains("method")) cfg.methods = parse_methods(root["method"], "method");
    if (root.contains("methods")) cfg.methods = parse_methods(root["methods"], "methods");
    if (root.contains("score")) cfg.scores = scalar_or_list(root["score"], "score", to_string_value);
    if (root.contains("scores")) cfg.scores = scalar_or_list(root["scores"], "scores", to_string_value);

    if (root.contains("q")) {
        cfg.q = scalar_or_list(root["q"], "q", to_number);
        q_given = true;
    }
    if (!q_given && cfg.data.kind == DataSourceKind::Csv) cfg.q = {0.2};
    if (root.contains("r")) cfg.r = scalar_or_list(root["r"], "r", to_number);
    if (root.contains("clip_constant")) cfg.clip_constant = to_number(root["clip_constant"], "clip_constant");
    if (root.contains("threshold")) cfg.threshold = to_number(root["threshold"], "threshold");

    if (root.contains("model")) {
        const json& m = root["model"];
        if (!m.is_object()) type_error("model", "an object");
        check_keys(m, "model.",
                   {"kind", "n_trees", "max_depth", "learning_rate", "min_samples_leaf", "l2", "tolerance",
                    "max_iter"},
                   cfg.unknown_keys);
        std::string kind = m.contains("kind") ? to_string_value(m["kind"], "model.kind") : "boosted_trees";
        if (kind == "boosted_trees") {
            cfg.model.kind = ModelKind::BoostedTrees;
        } else if (kind == "logistic") {
            cfg.model.kind = ModelKind::Logistic;
        } else {
            throw ConfigError("model.kind: expected \"boosted_trees\" or \"logistic\"");
        }
        if (m.contains("n_trees")) cfg.model.boost.n_trees = to_count(m["n_trees"], "model.n_trees");
        if (m.contains("max_depth")) cfg.model.boost.max_depth = to_count(m["max_depth"], "model.max_depth");
        if (m.contains("learning_rate")) {
            cfg.model.boost.learning_rate = to_number(m["learning_rate"], "model.learning_rate");
        }
        if (m.contains("min_samples_leaf")) {
            cfg.model.boost.min_samples_leaf = to_count(m["min_samples_leaf"], "model.min_samples_leaf");
        }
        if (m.contains("l2")) cfg.model.logistic.l2 = to_number(m["l2"], "model.l2");
        if (m.contains("tolerance")) cfg.model.logistic.tolerance = to_number(m["tolerance"], "model.tolerance");
        if (m.contains("max_iter")) cfg.model.logistic.max_iter = to_count(m["max_iter"], "model.max_iter");
    }

    if (root.contains("checkpoints")) cfg.checkpoints = scalar_or_list(root["checkpoints"], "checkpoints", to_count);
    if (root.contains("replicates")) cfg.replicates = to_count(root["replicates"], "replicates");
    if (root.contains("base_seed")) cfg.base_seed = to_count(root["base_seed"], "base_seed");
    if (root.contains("threads")) cfg.threads = to_count(root["threads"], "threads");
    if (root.contains("output_dir")) cfg.output_dir = to_string_value(root["output_dir"], "output_dir");
    if (root.contains("write_trajectories")) {
        if (!root["write_trajectories"].is_boolean()) type_error("write_trajectories", "a boolean");
        cfg.write_trajectories = root["write_trajectories"].get<bool>();
    }

    if (root.contains("region") && !root["region"].is_null()) {
        const json& g = root["region"];
        if (!g.is_object()) type_error("region", "an object");
        check_keys(g, "region.", {"lower", "upper", "representative"}, cfg.unknown_keys);
        RegionConfig region;
        if (g.contains("lower")) region.lower = scalar_or_list(g["lower"], "region.lower", to_number);
        if (g.contains("upper")) region.upper = scalar_or_list(g["upper"], "region.upper", to_number);
        if (g.contains("representative")) {
            region.representative = scalar_or_list(g["representative"], "region.representative", to_number);
        }
        cfg.region = std::move(region);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = parse_config(ss.str());
    // Relative CSV paths resolve against the config file's directory.
    if (cfg.data.kind == DataSourceKind::Csv && !cfg.data.csv_path.empty()) {
        std::filesystem::path csv(cfg.data.csv_path);
        if (csv.is_relative()) {
            cfg.data.csv_path = (std::filesystem::path(path).parent_path() / csv).lexically_normal().string();
        }
    }
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json root;
    root["experiment_id"] = cfg.experiment_id;
    json data;
    if (cfg.data.kind == DataSourceKind::Sim) {
        data["source"] = "sim";
        data["setting"] = cfg.data.setting;
        data["sigma"] = cfg.data.sigmas;
    } else {
        data["source"] = "csv";
        data["path"] = cfg.data.csv_path;
        data["target"] = cfg.data.csv_schema.target;
        data["threshold_column"] =
            cfg.data.csv_schema.threshold_column ? json(*cfg.data.csv_schema.threshold_column) : json(nullptr);
        data["features"] = cfg.data.csv_schema.features;
    }
    root["data"] = data;
    root["sizes"] = {{"train", cfg.n_train}, {"calibration", cfg.n_calibration}, {"test", cfg.n_test}};
    json methods = json::array();
    for (auto m : cfg.methods) methods.push_back(std::string(to_string(m)));
    root["methods"] = methods;
    root["scores"] = cfg.scores;
    root["q"] = cfg.q;
    root["r"] = cfg.r;
    root["clip_constant"] = cfg.clip_constant;
    root["threshold"] = cfg.threshold;
    if (cfg.model.kind == ModelKind::BoostedTrees) {
        root["model"] = {{"kind", "boosted_trees"},
                         {"n_trees", cfg.model.boost.n_trees},
                         {"max_depth", cfg.model.boost.max_depth},
                         {"learning_rate", cfg.model.boost.learning_rate},
                         {"min_samples_leaf", cfg.model.boost.min_samples_leaf}};
    } else {
        root["model"] = {{"kind", "logistic"},
                         {"l2", cfg.model.logistic.l2},
                         {"tolerance", cfg.model.logistic.tolerance},
                         {"max_iter", cfg.model.logistic.max_iter}};
    }
    root["checkpoints"] = cfg.checkpoints;
    root["replicates"] = cfg.replicates;
    root["base_seed"] = cfg.base_seed;
    root["threads"] = cfg.threads;
    if (cfg.region) {
        json lower = json::array(), upper = json::array();
        for (double v : cfg.region->lower) lower.push_back(number_json(v));
        for (double v : cfg.region->upper) upper.push_back(number_json(v));
        root["region"] = {{"lower", lower}, {"upper", upper}};
        if (cfg.region->representative) root["region"]["representative"] = *cfg.region->representative;
    }
    root["output_dir"] = cfg.output_dir;
    root["write_trajectories"] = cfg.write_trajectories;
    return root.dump(2);
}

// ---------------------------------------------------------------------------

std::vector<Diagnostic> validate_config(const ExperimentConfig& cfg) {
    std::vector<Diagnostic> out;
    auto diag = [&](std::string field, std::string msg) { out.push_back({std::move(field), std::move(msg)}); };

    for (const auto& k : cfg.unknown_keys) diag(k, "unknown key");

    if (cfg.experiment_id.empty() || cfg.experiment_id.find_first_of(",\n\"") != std::string::npos) {
        diag("experiment_id", "must be non-empty and contain no commas, quotes or newlines");
    }

    std::size_t response_dim = 1;
    if (cfg.data.kind == DataSourceKind::Sim) {
        if (cfg.data.setting < 1 || cfg.data.setting > 3) diag("data.setting", "must be 1, 2 or 3");
        if (cfg.data.setting == 3) response_dim = 2;
        if (cfg.data.sigmas.empty()) diag("data.sigma", "needs at least one value");
        for (double s : cfg.data.sigmas) {
            if (!(s >= 0.0) || !std::isfinite(s)) diag("data.sigma", "must be finite and non-negative");
        }
    } else {
        if (cfg.data.csv_path.empty()) {
            diag("data.path", "a CSV source needs a path");
        } else if (!std::filesystem::exists(cfg.data.csv_path)) {
            diag("data.path", "file '" + cfg.data.csv_path + "' does not exist");
        }
        if (cfg.data.csv_schema.target.empty()) diag("data.target", "a CSV source needs a target column");
    }

    if (cfg.n_train < 1) diag("sizes.train", "must be >= 1");
    if (cfg.n_test < 1) diag("sizes.test", "must be >= 1");
    if (cfg.n_calibration.empty()) diag("sizes.calibration", "needs at least one value");
    for (auto n : cfg.n_calibration) {
        if (n < 1) diag("sizes.calibration", "must be >= 1");
    }
    if (cfg.replicates < 1) diag("replicates", "must be >= 1");

    if (cfg.q.empty()) diag("q", "needs at least one value");
    for (double q : cfg.q) {
        if (!(q > 0.0 && q < 1.0)) diag("q", "must lie in (0, 1), got " + format_double(q));
    }
    if (cfg.r.empty()) diag("r", "needs at least one value");
    for (double r : cfg.r) {
        if (!(r > 0.0 && r < 1.0)) diag("r", "must lie in (0, 1), got " + format_double(r));
    }
    if (!(cfg.clip_constant > 0.0) || !std::isfinite(cfg.clip_constant)) {
        diag("clip_constant", "must be finite and positive");
    }
    if (!std::isfinite(cfg.threshold)) diag("threshold", "must be finite");

    if (cfg.checkpoints.empty()) diag("checkpoints", "needs at least one timestep");
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
        auto t = cfg.checkpoints[i];
        if (t < 1 || t > cfg.n_test) {
            diag("checkpoints", "timestep " + std::to_string(t) + " outside [1, sizes.test]");
        }
        if (i > 0 && t <= cfg.checkpoints[i - 1]) diag("checkpoints", "must be strictly increasing");
    }

    if (cfg.methods.empty()) diag("methods", "needs at least one method");
    if (cfg.scores.empty()) diag("scores", "needs at least one score");
    bool any_mocs = false;
    for (auto m : cfg.methods) any_mocs |= m == Method::MocsArc;
    for (const auto& s : cfg.scores) {
        if (s != "clip" && s != "res" && s != "regional") {
            diag("scores", "unknown score '" + s + "' (expected clip, res or regional)");
            continue;
        }
        for (auto m : cfg.methods) {
            if ((m == Method::MocsArc) != (s == "regional")) {
                diag("scores", "score '" + s + "' cannot be combined with method '" + std::string(to_string(m)) +
                                   "'; regional pairs only with mocs_arc");
            }
        }
    }
    for (auto m : cfg.methods) {
        if (m != Method::MocsArc && response_dim != 1) {
            diag("methods", std::string(to_string(m)) + " needs a univariate response");
        }
    }

    if (any_mocs) {
        if (!cfg.region) {
            diag("region", "mocs_arc requires a target region");
        } else {
            const auto& g = *cfg.region;
            if (g.lower.size() != g.upper.size() || g.lower.empty()) {
                diag("region", "lower and upper must be non-empty and of equal length");
            } else {
                if (g.lower.size() != response_dim) {
                    diag("region", "dimension " + std::to_string(g.lower.size()) +
                                       " does not match response dimension " + std::to_string(response_dim));
                }
                for (std::size_t i = 0; i < g.lower.size(); ++i) {
                    if (std::isnan(g.lower[i]) || std::isnan(g.upper[i]) || g.lower[i] > g.upper[i] ||
                        g.lower[i] == std::numeric_limits<double>::infinity() ||
                        g.upper[i] == -std::numeric_limits<double>::infinity()) {
                        diag("region", "coordinate " + std::to_string(i) + " is empty or malformed");
                    }
                }
                if (g.representative && g.representative->size() != g.lower.size()) {
                    diag("region.representative", "dimension does not match the region");
                } else if (g.representative) {
                    for (std::size_t i = 0; i < g.lower.size(); ++i) {
                        double v = (*g.representative)[i];
                        if (!(v >= g.lower[i] && v <= g.upper[i])) {
                            diag("region.representative", "must lie inside the region");
                            break;
                        }
                    }
                }
            }
        }
    }

    if (cfg.model.kind == ModelKind::BoostedTrees) {
        if (!(cfg.model.boost.learning_rate >= 0.0) || !std::isfinite(cfg.model.boost.learning_rate)) {
            diag("model.learning_rate", "must be finite and non-negative");
        }
        if (cfg.model.boost.min_samples_leaf < 1) diag("model.min_samples_leaf", "must be >= 1");
    } else {
        if (!(cfg.model.logistic.l2 >= 0.0)) diag("model.l2", "must be non-negative");
        if (!(cfg.model.logistic.tolerance > 0.0)) diag("model.tolerance", "must be positive");
    }
    return out;
}

}  // namespace ocsarc
