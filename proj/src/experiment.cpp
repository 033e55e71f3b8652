#include "ocsarc/experiment.hpp"

#include "ocsarc/error.hpp"
#include "ocsarc/multivariate.hpp"
#include "ocsarc/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace ocsarc {

namespace {

struct DataVariant {
    double sigma = 0.0;
    std::size_t n_calibration = 0;
};

struct StreamVariant {
    std::string score;
    Method method;
    double q;
    double r;
};

/// A replicate's train/calibration/test split. Test responses stay in
/// `test_truth`; selection only ever receives `stream`.
struct Split {
    Dataset train;
    Dataset calibration;
    std::vector<double> cal_thresholds;
    std::vector<StreamPoint> stream;
    Dataset test_truth;
    std::vector<double> u;
};

std::shared_ptr<const Predictor> fit_model(const ModelConfig& cfg, const Dataset& data) {
    if (cfg.kind == ModelKind::Logistic) {
        return std::make_shared<LogisticModel>(fit_logistic(data, cfg.logistic));
    }
    return std::make_shared<BoostedTreesModel>(fit_boosted_trees(data, cfg.boost));
}

Dataset column_dataset(const Dataset& data, std::size_t col) {
    Dataset out;
    out.features = data.features;
    out.responses = data.response_column(col);
    out.response_dim = 1;
    return out;
}

TargetRegion make_region(const RegionConfig& cfg) {
    TargetRegion region(cfg.lower, cfg.upper);
    if (cfg.representative) region.set_representative(*cfg.representative);
    return region;
}

class Runner {
public:
    explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg) {
        if (cfg.data.kind == DataSourceKind::Csv) {
            csv_ = load_csv(cfg.data.csv_path, cfg.data.csv_schema);
            const std::size_t need = cfg.n_train + cfg.n_test +
                                     *std::max_element(cfg.n_calibration.begin(), cfg.n_calibration.end());
            if (csv_.data.size() < need) {
                throw InvalidInput("CSV has " + std::to_string(csv_.data.size()) + " rows but the split needs " +
                                   std::to_string(need));
            }
            for (auto n : cfg.n_calibration) data_variants_.push_back({0.0, n});
        } else {
            for (double s : cfg.data.sigmas)
                for (auto n : cfg.n_calibration) data_variants_.push_back({s, n});
        }
        for (const auto& s : cfg.scores)
            for (auto m : cfg.methods)
                for (double q : cfg.q)
                    for (double r : cfg.r) stream_variants_.push_back({s, m, q, r});
        if (cfg.region) region_ = std::make_unique<TargetRegion>(make_region(*cfg.region));
    }

    ExperimentResult run() {
        ExperimentResult result;
        for (std::size_t i = 0; i < cfg_.replicates; ++i) result.seeds.push_back(replicate_seed(cfg_.base_seed, i));

        for (const auto& dv : data_variants_) {
            for (const auto& sv : stream_variants_) {
                CellResult cell;
                cell.key = {dv.sigma, dv.n_calibration, sv.q, sv.r, sv.method, sv.score};
                cell.id = cell_id(cfg_, cell.key);
                cell.runs.resize(cfg_.replicates);
                if (cfg_.write_trajectories) cell.trajectories.resize(cfg_.replicates);
                result.cells.push_back(std::move(cell));
            }
        }

        const std::size_t items = data_variants_.size() * cfg_.replicates;
        std::vector<std::vector<std::string>> warnings(items);
        std::vector<std::exception_ptr> errors(items);
        std::atomic<std::size_t> next{0};

        auto worker = [&] {
            for (std::size_t item = next++; item < items; item = next++) {
                const std::size_t dv = item / cfg_.replicates, rep = item % cfg_.replicates;
                try {
                    run_item(dv, rep, result, warnings[item]);
                } catch (...) {
                    errors[item] = std::current_exception();
                }
            }
        };
        std::size_t threads = cfg_.threads ? cfg_.threads : std::max(1u, std::thread::hardware_concurrency());
        threads = std::min(threads, std::max<std::size_t>(items, 1));
        if (threads <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
        for (auto& w : warnings) result.warnings.insert(result.warnings.end(), w.begin(), w.end());

        for (auto& cell : result.cells) cell.summary = aggregate(cell.runs, cfg_.checkpoints);
        return result;
    }

private:
    Split make_split(const DataVariant& dv, Rng& rng) const {
        Split s;
        const std::size_t n_total = cfg_.n_train + dv.n_calibration + cfg_.n_test;
        std::vector<double> thresholds;
        Dataset all;
        if (cfg_.data.kind == DataSourceKind::Sim) {
            all = generate(SimSetting{cfg_.data.setting, dv.sigma, 0}, n_total, rng);
            thresholds.assign(n_total, cfg_.threshold);
        } else {
            std::vector<std::size_t> perm(csv_.data.size());
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            perm.resize(n_total);
            all = csv_.data.subset(perm);
            for (auto i : perm) thresholds.push_back(csv_.thresholds.empty() ? cfg_.threshold : csv_.thresholds[i]);
        }
        auto range = [](std::size_t from, std::size_t count) {
            std::vector<std::size_t> idx(count);
            std::iota(idx.begin(), idx.end(), from);
            return idx;
        };
        s.train = all.subset(range(0, cfg_.n_train));
        s.calibration = all.subset(range(cfg_.n_train, dv.n_calibration));
        s.test_truth = all.subset(range(cfg_.n_train + dv.n_calibration, cfg_.n_test));
        s.cal_thresholds.assign(thresholds.begin() + static_cast<std::ptrdiff_t>(cfg_.n_train),
                                thresholds.begin() + static_cast<std::ptrdiff_t>(cfg_.n_train + dv.n_calibration));
        for (std::size_t t = 0; t < cfg_.n_test; ++t) {
            auto x = s.test_truth.features.row(t);
            s.stream.push_back({std::vector<double>(x.begin(), x.end()),
                                thresholds[cfg_.n_train + dv.n_calibration + t]});
        }
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        s.u.resize(cfg_.n_test);
        for (auto& u : s.u) u = unif(rng);
        return s;
    }

    void run_item(std::size_t dv_index, std::size_t rep, ExperimentResult& result,
                  std::vector<std::string>& warnings) const {
        const DataVariant& dv = data_variants_[dv_index];
        Rng rng(replicate_seed(cfg_.base_seed, rep));
        Split split = make_split(dv, rng);

        const bool multivariate = std::any_of(cfg_.scores.begin(), cfg_.scores.end(),
                                              [](const std::string& s) { return s == "regional"; });
        std::shared_ptr<const Predictor> model;
        std::shared_ptr<const VectorPredictor> vector_model;
        if (multivariate) {
            std::vector<std::shared_ptr<const Predictor>> parts;
            for (std::size_t c = 0; c < split.train.response_dim; ++c) {
                parts.push_back(fit_model(cfg_.model, column_dataset(split.train, c)));
            }
            vector_model = std::make_shared<VectorPredictor>(std::move(parts));
        } else {
            model = fit_model(cfg_.model, split.train);
        }

        // Truth labels: null means the candidate should not be selected.
        TruthLabels is_null(cfg_.n_test);
        for (std::size_t t = 0; t < cfg_.n_test; ++t) {
            is_null[t] = multivariate ? !region_->contains(split.test_truth.response_row(t))
                                      : !(split.test_truth.response(t) > split.stream[t].threshold);
        }

        std::size_t cell = dv_index * stream_variants_.size();
        for (const auto& score : cfg_.scores) {
            std::vector<double> pvals;
            if (score == "regional") {
                RegionalScoreFunction sf(vector_model, cfg_.clip_constant);
                std::vector<double> cal_scores(split.calibration.size());
                for (std::size_t i = 0; i < cal_scores.size(); ++i) {
                    cal_scores[i] = sf(*region_, split.calibration.features.row(i), split.calibration.response_row(i));
                }
                CalibrationScores cal = build_calibration(cal_scores);
                for (std::size_t t = 0; t < split.stream.size(); ++t) {
                    pvals.push_back(
                        conformal_p(cal, sf(*region_, split.stream[t].x, region_->representative()), split.u[t]).p);
                }
            } else {
                ScoreFunction sf = score == "clip" ? ScoreFunction::clip(model, cfg_.clip_constant, cfg_.threshold)
                                                   : ScoreFunction::res(model);
                std::vector<double> cal_scores(split.calibration.size());
                for (std::size_t i = 0; i < cal_scores.size(); ++i) {
                    cal_scores[i] = sf.with_cutoff(split.cal_thresholds[i])(split.calibration.features.row(i),
                                                                           split.calibration.response(i));
                }
                pvals = stream_pvalues(sf, build_calibration(cal_scores), split.stream, split.u);
            }

            for (std::size_t v = 0; v < stream_variants_.size(); ++v) {
                const auto& sv = stream_variants_[v];
                if (sv.score != score) continue;
                run_stream(sv, pvals, is_null, result.cells[cell + v], rep, warnings);
            }
        }
    }

    void run_stream(const StreamVariant& sv, std::span<const double> pvals, const TruthLabels& is_null,
                    CellResult& cell, std::size_t rep, std::vector<std::string>& warnings) const {
        auto proc = make_procedure(sv.method, sv.q, sv.r);
        RunResult run;
        run.checkpoints = cfg_.checkpoints;
        std::size_t next_cp = 0, r2a = 0;
        std::vector<StepRecord>* trajectory = cfg_.write_trajectories ? &cell.trajectories[rep] : nullptr;
        for (std::size_t t = 1; t <= pvals.size(); ++t) {
            StepRecord rec = proc->step(pvals[t - 1]);
            r2a += rec.deselected;
            if (next_cp < cfg_.checkpoints.size() && t == cfg_.checkpoints[next_cp]) {
                auto selected = proc->selected();
                TruthLabels prefix(is_null.begin(), is_null.begin() + static_cast<std::ptrdiff_t>(t));
                run.fdp_at.push_back(fdp(selected, prefix));
                run.power_at.push_back(power(selected, prefix));
                run.r2a_at.push_back(static_cast<double>(r2a));
                ++next_cp;
            }
            if (trajectory) trajectory->push_back(std::move(rec));
        }
        run.reject_to_accept = r2a;
        if (auto* bh = dynamic_cast<const OnlineBh*>(proc.get()); bh && bh->budget_exhausted_at() != 0 && rep == 0) {
            warnings.push_back(cell.id + " " + std::string(to_string(sv.method)) + "/" + sv.score +
                               ": q*gamma_t fell below machine epsilon at t=" +
                               std::to_string(bh->budget_exhausted_at()) + "; later selections are frozen");
        }
        cell.runs[rep] = std::move(run);
    }

    const ExperimentConfig& cfg_;
    CsvData csv_;
    std::vector<DataVariant> data_variants_;
    std::vector<StreamVariant> stream_variants_;
    std::unique_ptr<TargetRegion> region_;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::vector<double> stream_pvalues(const ScoreFunction& score, const CalibrationScores& cal,
                                   std::span<const StreamPoint> stream, std::span<const double> u) {
    if (u.size() != stream.size()) throw InvalidInput("need one tie randomizer per stream point");
    std::vector<double> out(stream.size());
    for (std::size_t t = 0; t < stream.size(); ++t) {
        const double c = stream[t].threshold;
        out[t] = conformal_p(cal, score.with_cutoff(c)(stream[t].x, c), u[t]).p;
    }
    return out;
}

std::string cell_id(const ExperimentConfig& cfg, const CellKey& key) {
    std::string id = cfg.experiment_id;
    if (cfg.data.kind == DataSourceKind::Sim) id += "/sigma=" + format_double(key.sigma);
    id += "/ncal=" + std::to_string(key.n_calibration);
    id += "/q=" + format_double(key.q);
    id += "/r=" + format_double(key.r);
    return id;
}

ExperimentResult run_grid(const ExperimentConfig& cfg) {
    auto diags = validate_config(cfg);
    if (!diags.empty()) {
        std::string msg = "invalid config:";
        for (const auto& d : diags) msg += "\n  " + d.field + ": " + d.message;
        throw ConfigError(msg);
    }
    return Runner(cfg).run();
}

std::string summary_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "experiment_id,method,score,t,mean_fdp,se_fdp,mean_power,se_power,mean_r2a\n";
    for (const auto& cell : result.cells) {
        for (const auto& cp : cell.summary.checkpoints) {
            out << cell.id << ',' << to_string(cell.key.method) << ',' << cell.key.score << ',' << cp.t << ','
                << format_double(cp.fdp.mean) << ',' << format_double(cp.fdp.se) << ','
                << format_double(cp.power.mean) << ',' << format_double(cp.power.se) << ','
                << format_double(cp.r2a.mean) << '\n';
        }
    }
    return out.str();
}

std::string trajectory_csv(std::span<const StepRecord> steps) {
    std::ostringstream out;
    out << "t,p_t,gamma_t,k_star,newly_selected,cum_selected\n";
    for (const auto& s : steps) {
        out << s.t << ',' << format_double(s.p) << ',' << (std::isnan(s.gamma) ? "" : format_double(s.gamma)) << ','
            << s.k_star << ',';
        for (std::size_t i = 0; i < s.newly_selected.size(); ++i) {
            if (i) out << ';';
            out << s.newly_selected[i];
        }
        out << ',' << s.selected_size << '\n';
    }
    return out.str();
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

    write_file(fs::path(out_dir) / "summary.csv", summary_csv(result));

    nlohmann::json manifest;
    manifest["tool"] = "ocsarc";
    manifest["version"] = kVersion;
    manifest["config"] = nlohmann::json::parse(config_to_json(cfg));
    manifest["replicate_seeds"] = result.seeds;
    manifest["rng"] = "std::mt19937_64, seed = base_seed + replicate";
    nlohmann::json cells = nlohmann::json::array();
    nlohmann::json trajectory_files = nlohmann::json::array();
    for (std::size_t c = 0; c < result.cells.size(); ++c) {
        const auto& cell = result.cells[c];
        cells.push_back({{"index", c},
                         {"id", cell.id},
                         {"method", std::string(to_string(cell.key.method))},
                         {"score", cell.key.score},
                         {"sigma", cell.key.sigma},
                         {"n_calibration", cell.key.n_calibration},
                         {"q", cell.key.q},
                         {"r", cell.key.r}});
        if (!cell.trajectories.empty()) {
            fs::create_directories(fs::path(out_dir) / "trajectories", ec);
            if (ec) throw IoError("cannot create trajectory directory: " + ec.message());
            for (std::size_t rep = 0; rep < cell.trajectories.size(); ++rep) {
                std::string name = "trajectories/cell" + std::to_string(c) + "_rep" + std::to_string(rep) + ".csv";
                write_file(fs::path(out_dir) / name, trajectory_csv(cell.trajectories[rep]));
                trajectory_files.push_back(name);
            }
        }
    }
    manifest["cells"] = cells;
    manifest["warnings"] = result.warnings;
    manifest["outputs"] = {{"summary", "summary.csv"}, {"trajectories", trajectory_files}};
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ExperimentResult result = run_grid(cfg);
    write_outputs(cfg, result, cfg.output_dir);
    return result;
}

}  // namespace ocsarc
