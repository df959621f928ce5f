#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgap/anneal.hpp"
#include "sgap/completion.hpp"
#include "sgap/error.hpp"
#include "sgap/random.hpp"
#include "sgap/survey.hpp"
#include "sgap/synth.hpp"

namespace sgap {

/// Mask comparison followed by reconstruction comparison, repeated over
/// independent seeded trials.
struct ExperimentConfig {
    // grid
    int n_s = 100;
    int n_r = 50;
    double spacing = 12.5;
    double ratio = 0.2;
    // annealing
    int max_iters = 2000;
    std::optional<double> t0;
    std::optional<double> alpha;
    double move_fraction = 0.2;
    bool reciprocity = true;
    // completion
    int rank = 5;
    int iters = 200;
    std::optional<double> lambda = 1e-2;
    // synthetic ground truth
    int truth_rank = 5;
    int n_slices = 1;
    // protocol
    int n_trials = 5;
    std::uint64_t base_seed = 0;
    std::string output_dir = ".";
    int jobs = 1;

    [[nodiscard]] SurveyGrid grid() const { return {n_s, n_r, spacing}; }

    [[nodiscard]] AnnealConfig anneal(std::uint64_t seed) const {
        AnnealConfig c;
        c.max_iters = max_iters;
        c.t0 = t0;
        c.alpha = alpha;
        c.move_fraction = move_fraction;
        c.reciprocity = reciprocity;
        c.seed = seed;
        return c;
    }

    [[nodiscard]] CompletionConfig completion(std::uint64_t seed) const {
        CompletionConfig c;
        c.rank = rank;
        c.iters = iters;
        c.lambda = lambda;
        c.seed = seed;
        return c;
    }

    void validate() const {
        grid().validate();
        (void)make_partition(grid(), ratio);
        anneal(0).validate();
        completion(0).validate();
        if (truth_rank < 1) throw InvalidArgument("experiment: truth_rank must be >= 1");
        if (n_slices < 1) throw InvalidArgument("experiment: n_slices must be >= 1");
        if (n_trials < 1) throw InvalidArgument("experiment: n_trials must be >= 1");
        if (jobs < 1) throw InvalidArgument("experiment: jobs must be >= 1");
    }
};

namespace detail {

inline std::optional<double> auto_or_number(const nlohmann::json& j, const char* key, std::optional<double> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_null() || (v.is_string() && v.get<std::string>() == "auto")) return std::nullopt;
    if (!v.is_number()) throw InvalidArgument(std::string("experiment config: '") + key + "' must be a number or \"auto\"");
    return v.get<double>();
}

inline nlohmann::json auto_or_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json("auto");
}

} // namespace detail

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        c.n_s = j.value("n_s", c.n_s);
        c.n_r = j.value("n_r", c.n_r);
        c.spacing = j.value("spacing", c.spacing);
        c.ratio = j.value("ratio", c.ratio);
        c.max_iters = j.value("max_iters", c.max_iters);
        c.t0 = detail::auto_or_number(j, "T0", c.t0);
        c.alpha = detail::auto_or_number(j, "alpha", c.alpha);
        c.move_fraction = j.value("move_fraction", c.move_fraction);
        c.reciprocity = j.value("reciprocity", c.reciprocity);
        c.rank = j.value("rank", c.rank);
        c.iters = j.value("iters", c.iters);
        c.lambda = detail::auto_or_number(j, "lambda", c.lambda);
        c.truth_rank = j.value("truth_rank", c.truth_rank);
        c.n_slices = j.value("n_slices", c.n_slices);
        c.n_trials = j.value("n_trials", c.n_trials);
        c.base_seed = j.value("base_seed", c.base_seed);
        c.output_dir = j.value("output_dir", c.output_dir);
        c.jobs = j.value("jobs", c.jobs);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("experiment config: ") + e.what());
    }
    return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    return {
        {"n_s", c.n_s},
        {"n_r", c.n_r},
        {"spacing", c.spacing},
        {"ratio", c.ratio},
        {"max_iters", c.max_iters},
        {"T0", detail::auto_or_number(c.t0)},
        {"alpha", detail::auto_or_number(c.alpha)},
        {"move_fraction", c.move_fraction},
        {"reciprocity", c.reciprocity},
        {"rank", c.rank},
        {"iters", c.iters},
        {"lambda", detail::auto_or_number(c.lambda)},
        {"truth_rank", c.truth_rank},
        {"n_slices", c.n_slices},
        {"n_trials", c.n_trials},
        {"base_seed", c.base_seed},
        {"output_dir", c.output_dir},
        {"jobs", c.jobs},
    };
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open experiment config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("cannot parse " + path + ": " + e.what());
    }
    return experiment_config_from_json(j);
}

/// Per-trial stages; each draws from derive_seed(trial_seed, {stage, ...}).
enum class Stage : std::uint64_t { mask = 0, anneal = 1, truth = 2, completion = 3 };

inline std::uint64_t trial_seed(std::uint64_t base_seed, int trial) {
    return derive_seed(base_seed, {static_cast<std::uint64_t>(trial)});
}

inline std::uint64_t stage_seed(std::uint64_t trial_seed, Stage stage, std::uint64_t sub = 0) {
    return derive_seed(trial_seed, {static_cast<std::uint64_t>(stage), sub});
}

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double sr_jittered = std::numeric_limits<double>::quiet_NaN();
    double sr_optimized = std::numeric_limits<double>::quiet_NaN();
    double snr_jittered_db = std::numeric_limits<double>::quiet_NaN();
    double snr_optimized_db = std::numeric_limits<double>::quiet_NaN();
    SourceMask jittered;
    AnnealResult anneal;

    [[nodiscard]] double sr_reduction_pct() const {
        return sr_jittered > 0.0 ? 100.0 * (1.0 - sr_optimized / sr_jittered) : 0.0;
    }
};

/// SNR over a stack of slices: total residual energy against total signal.
inline double stacked_snr(const std::vector<FrequencySlice>& truth, const std::vector<FrequencySlice>& estimate) {
    double err = 0.0, signal = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (truth[k].values.size() != estimate[k].values.size()) throw InvalidArgument("snr: shape mismatch");
        for (std::size_t i = 0; i < truth[k].values.size(); ++i) {
            err += std::norm(truth[k].values[i] - estimate[k].values[i]);
            signal += std::norm(truth[k].values[i]);
        }
    }
    if (!(signal > 0.0)) throw InvalidArgument("snr: reference data is identically zero");
    if (err == 0.0) return kMaxSnrDb;
    return std::min(kMaxSnrDb, -10.0 * std::log10(err / signal));
}

inline TrialResult run_trial(const ExperimentConfig& config, int trial) {
    TrialResult res;
    res.trial = trial;
    res.seed = trial_seed(config.base_seed, trial);
    try {
        const SurveyGrid grid = config.grid();
        res.jittered = jittered_mask(grid, config.ratio, stage_seed(res.seed, Stage::mask));
        res.anneal = optimize(res.jittered, config.anneal(stage_seed(res.seed, Stage::anneal)));
        res.sr_jittered = res.anneal.initial_sr;
        res.sr_optimized = res.anneal.best_sr;

        const SourceMask& optimized = res.anneal.best_mask;
        const CompletionConfig cc = config.completion(stage_seed(res.seed, Stage::completion));
        std::vector<FrequencySlice> truth, from_jittered, from_optimized;
        for (int k = 0; k < config.n_slices; ++k) {
            truth.push_back(lowrank_mo_slice(grid, config.truth_rank, stage_seed(res.seed, Stage::truth, static_cast<std::uint64_t>(k))));
            truth.back().omega = static_cast<double>(k);
            from_jittered.push_back(complete(subsample(truth.back(), res.jittered), res.jittered, cc, config.reciprocity));
            from_optimized.push_back(complete(subsample(truth.back(), optimized), optimized, cc, config.reciprocity));
        }
        res.snr_jittered_db = stacked_snr(truth, from_jittered);
        res.snr_optimized_db = stacked_snr(truth, from_optimized);
        res.ok = true;
    } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
    }
    return res;
}

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<TrialResult> trials;

    [[nodiscard]] int failed() const {
        int n = 0;
        for (const auto& t : trials) n += !t.ok;
        return n;
    }
};

/// Runs every trial; with jobs > 1 trials run on worker threads, results stay
/// in trial order.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report{config, std::vector<TrialResult>(static_cast<std::size_t>(config.n_trials))};
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int t = next++; t < config.n_trials; t = next++) report.trials[static_cast<std::size_t>(t)] = run_trial(config, t);
    };
    const int jobs = std::min(config.jobs, config.n_trials);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    return report;
}

inline constexpr const char* kExperimentCsvHeader =
    "trial,seed,sr_jittered,sr_optimized,sr_reduction_pct,snr_jittered_db,snr_optimized_db";

inline void write_experiment_csv(std::ostream& out, const ExperimentReport& report) {
    out << kExperimentCsvHeader << '\n';
    for (const auto& t : report.trials) {
        out << t.trial << ',' << t.seed << ',';
        if (!t.ok) {
            out << "nan,nan,nan,nan,nan\n";
            continue;
        }
        out << format_double(t.sr_jittered) << ',' << format_double(t.sr_optimized) << ','
            << format_double(t.sr_reduction_pct()) << ',' << format_double(t.snr_jittered_db) << ','
            << format_double(t.snr_optimized_db) << '\n';
    }
}

inline nlohmann::json experiment_summary(const ExperimentReport& report) {
    double sr_j = 0.0, sr_o = 0.0, red = 0.0, snr_j = 0.0, snr_o = 0.0;
    int ok = 0;
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& t : report.trials) {
        if (!t.ok) {
            errors.push_back({{"trial", t.trial}, {"seed", t.seed}, {"message", t.error}});
            continue;
        }
        ++ok;
        sr_j += t.sr_jittered;
        sr_o += t.sr_optimized;
        red += t.sr_reduction_pct();
        snr_j += t.snr_jittered_db;
        snr_o += t.snr_optimized_db;
    }
    auto mean = [&](double v) { return ok > 0 ? nlohmann::json(v / ok) : nlohmann::json(nullptr); };
    return {
        {"n_trials", report.config.n_trials},
        {"n_succeeded", ok},
        {"n_failed", report.failed()},
        {"mean_sr_jittered", mean(sr_j)},
        {"mean_sr_optimized", mean(sr_o)},
        {"mean_sr_reduction_pct", mean(red)},
        {"mean_snr_jittered_db", mean(snr_j)},
        {"mean_snr_optimized_db", mean(snr_o)},
        {"mean_snr_gain_db", mean(snr_o - snr_j)},
        {"config", to_json(report.config)},
        {"errors", errors},
    };
}

/// Writes experiment.csv, summary.json and per-trial masks and trajectories
/// under config.output_dir.
inline void write_experiment_outputs(const ExperimentReport& report) {
    namespace fs = std::filesystem;
    const fs::path dir(report.config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    auto open = [&](const fs::path& p) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot open " + p.string() + " for writing");
        return out;
    };
    {
        auto out = open(dir / "experiment.csv");
        write_experiment_csv(out, report);
    }
    {
        auto out = open(dir / "summary.json");
        out << experiment_summary(report).dump(2) << '\n';
    }
    for (const auto& t : report.trials) {
        if (!t.ok) continue;
        const std::string stem = "trial_" + std::to_string(t.trial);
        save_mask((dir / (stem + "_jittered.json")).string(), t.jittered);
        save_mask((dir / (stem + "_optimized.json")).string(), t.anneal.best_mask);
        auto traj = open(dir / (stem + "_trajectory.csv"));
        write_trajectory_csv(traj, t.anneal);
    }
}

} // namespace sgap
