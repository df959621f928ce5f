// sgap: spectral-gap survey design from the command line.
//
//   sgap generate    --n-s 300 --n-r 150 --ratio 0.2 --seed 1 --out mask.json
//   sgap evaluate    --mask mask.json
//   sgap optimize    --mask mask.json --max-iters 4000 --out best.json --trajectory traj.csv
//   sgap reconstruct --mask best.json --truth-rank 5 --rank 5
//   sgap experiment  --config experiment.json
//
// Results go to stdout as JSON; exit codes are 0 ok, 2 bad arguments,
// 3 numerical failure, 4 I/O failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sgap/anneal.hpp"
#include "sgap/completion.hpp"
#include "sgap/experiment.hpp"
#include "sgap/modomain.hpp"
#include "sgap/spectral.hpp"
#include "sgap/survey.hpp"
#include "sgap/synth.hpp"

namespace {

using sgap::ExitCode;

int code(ExitCode c) { return static_cast<int>(c); }

std::optional<double> parse_auto(const std::string& text, const char* name) {
    if (text.empty() || text == "auto") return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw sgap::InvalidArgument(std::string("--") + name + " expects a number or 'auto', got '" + text + "'");
    }
}

void print(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

struct GenerateArgs {
    sgap::SurveyGrid grid{300, 150, 12.5};
    double ratio = 0.2;
    std::uint64_t seed = 0;
    std::string out = "mask.json";
    std::string mo_dump;
    bool reciprocity = true;
};

int run_generate(const GenerateArgs& a) {
    const auto mask = sgap::jittered_mask(a.grid, a.ratio, a.seed);
    sgap::save_mask(a.out, mask);
    if (!a.mo_dump.empty()) {
        std::ofstream out(a.mo_dump);
        if (!out) throw sgap::IoError("cannot open " + a.mo_dump + " for writing");
        sgap::write_triplets(out, sgap::to_mo(mask, a.reciprocity));
    }
    print({{"mask", a.out}, {"n_selected", mask.selected.size()}});
    return 0;
}

struct EvaluateArgs {
    std::string mask;
    bool reciprocity = true;
};

int run_evaluate(const EvaluateArgs& a) {
    const auto mask = sgap::load_mask(a.mask);
    if (!sgap::check_constraints(mask)) throw sgap::InvalidArgument(a.mask + " violates the jitter constraints");
    const auto mo = sgap::to_mo(mask, a.reciprocity);
    const auto sv = sgap::top2_singular(sgap::to_sparse<double>(mo));
    print({{"sr", sv.sr},
           {"sigma1", sv.sigma1},
           {"sigma2", sv.sigma2},
           {"mo_nonzeros", sgap::mo_nonzeros(mo)},
           {"reciprocity", a.reciprocity}});
    return 0;
}

struct OptimizeArgs {
    std::string mask;
    std::string out = "optimized.json";
    std::string final_out;
    std::string trajectory = "trajectory.csv";
    int max_iters = 4000;
    std::string t0 = "auto";
    std::string alpha = "auto";
    double move_fraction = 0.2;
    std::uint64_t seed = 0;
    bool reciprocity = true;
};

int run_optimize(const OptimizeArgs& a) {
    const auto initial = sgap::load_mask(a.mask);
    sgap::AnnealConfig c;
    c.max_iters = a.max_iters;
    c.t0 = parse_auto(a.t0, "t0");
    c.alpha = parse_auto(a.alpha, "alpha");
    c.move_fraction = a.move_fraction;
    c.seed = a.seed;
    c.reciprocity = a.reciprocity;

    auto res = sgap::optimize(initial, c);
    res.best_mask.seed = a.seed;
    res.final_mask.seed = a.seed;
    sgap::save_mask(a.out, res.best_mask);
    if (!a.final_out.empty()) sgap::save_mask(a.final_out, res.final_mask);
    {
        std::ofstream out(a.trajectory, std::ios::binary);
        if (!out) throw sgap::IoError("cannot open " + a.trajectory + " for writing");
        sgap::write_trajectory_csv(out, res);
    }
    print({{"initial_sr", res.initial_sr},
           {"best_sr", res.best_sr},
           {"final_sr", res.final_sr},
           {"sr_reduction_pct", res.reduction_pct()},
           {"T0", res.t0},
           {"alpha", res.alpha},
           {"max_iters", a.max_iters},
           {"evaluations", res.evaluations},
           {"best_mask", a.out},
           {"trajectory", a.trajectory}});
    return 0;
}

struct ReconstructArgs {
    std::string mask;
    std::string truth;
    int truth_rank = 5;
    std::uint64_t truth_seed = 0;
    std::string save_truth;
    int rank = 5;
    int iters = 200;
    std::string lambda = "auto";
    std::uint64_t seed = 0;
    std::string out;
    bool reciprocity = true;
};

int run_reconstruct(const ReconstructArgs& a) {
    const auto mask = sgap::load_mask(a.mask);
    const auto truth = a.truth.empty() ? sgap::lowrank_mo_slice(mask.grid, a.truth_rank, a.truth_seed) : sgap::load_slice(a.truth);
    if (!a.save_truth.empty()) sgap::save_slice(a.save_truth, truth);

    sgap::CompletionConfig c;
    c.rank = a.rank;
    c.iters = a.iters;
    c.lambda = parse_auto(a.lambda, "lambda");
    c.seed = a.seed;
    const auto res = sgap::complete_with_history(sgap::subsample(truth, mask), mask, c, a.reciprocity);
    if (!a.out.empty()) sgap::save_slice(a.out, res.estimate);
    print({{"snr_db", sgap::snr(truth, res.estimate)},
           {"lambda", res.lambda},
           {"final_objective", res.objective.back()},
           {"rank", a.rank},
           {"iters", a.iters}});
    return 0;
}

struct ExperimentArgs {
    std::string config;
    std::string output_dir;
    std::optional<std::uint64_t> base_seed;
    std::optional<int> n_trials;
    std::optional<int> jobs;
};

int run_experiment(const ExperimentArgs& a) {
    auto config = a.config.empty() ? sgap::ExperimentConfig{} : sgap::load_experiment_config(a.config);
    if (!a.output_dir.empty()) config.output_dir = a.output_dir;
    if (a.base_seed) config.base_seed = *a.base_seed;
    if (a.n_trials) config.n_trials = *a.n_trials;
    if (a.jobs) config.jobs = *a.jobs;

    const auto report = sgap::run_experiment(config);
    sgap::write_experiment_outputs(report);
    print(sgap::experiment_summary(report));
    return report.failed() == config.n_trials ? code(ExitCode::numerical_failure) : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral-gap survey design: jittered source masks, spectral-ratio annealing, completion checks"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a jittered source mask");
    g->add_option("--n-s", gen.grid.n_s, "Candidate source positions")->capture_default_str();
    g->add_option("--n-r", gen.grid.n_r, "Receiver positions")->capture_default_str();
    g->add_option("--spacing", gen.grid.spacing, "Grid interval in meters")->capture_default_str();
    g->add_option("--ratio", gen.ratio, "Fraction of sources kept")->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--out", gen.out, "Mask file (.json or .txt)")->capture_default_str();
    g->add_option("--mo-dump", gen.mo_dump, "Also write the midpoint-offset support as 'm h 1' lines");
    g->add_flag("--reciprocity,!--no-reciprocity", gen.reciprocity, "Reciprocity in the --mo-dump image");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Print the spectral ratio of a mask");
    e->add_option("--mask", ev.mask)->required();
    e->add_flag("--reciprocity,!--no-reciprocity", ev.reciprocity)->capture_default_str();

    OptimizeArgs opt;
    auto* o = app.add_subcommand("optimize", "Anneal a mask toward a smaller spectral ratio");
    o->add_option("--mask", opt.mask, "Initial mask")->required();
    o->add_option("--out", opt.out, "Best mask visited")->capture_default_str();
    o->add_option("--final-out", opt.final_out, "Last state of the chain");
    o->add_option("--trajectory", opt.trajectory, "Per-iteration CSV")->capture_default_str();
    o->add_option("--max-iters", opt.max_iters)->capture_default_str();
    o->add_option("--t0", opt.t0, "Initial temperature or 'auto'")->capture_default_str();
    o->add_option("--alpha", opt.alpha, "Cooling rate or 'auto'")->capture_default_str();
    o->add_option("--move-fraction", opt.move_fraction)->capture_default_str();
    o->add_option("--seed", opt.seed)->capture_default_str();
    o->add_flag("--reciprocity,!--no-reciprocity", opt.reciprocity)->capture_default_str();

    ReconstructArgs rec;
    auto* r = app.add_subcommand("reconstruct", "Complete subsampled data and report the SNR");
    r->add_option("--mask", rec.mask)->required();
    r->add_option("--truth", rec.truth, "Ground-truth slice (complex64 + .json sidecar); synthesized when omitted");
    r->add_option("--truth-rank", rec.truth_rank, "Rank of the synthesized ground truth")->capture_default_str();
    r->add_option("--truth-seed", rec.truth_seed)->capture_default_str();
    r->add_option("--save-truth", rec.save_truth, "Write the ground truth used");
    r->add_option("--rank", rec.rank)->capture_default_str();
    r->add_option("--iters", rec.iters)->capture_default_str();
    r->add_option("--lambda", rec.lambda, "Ridge weight or 'auto'")->capture_default_str();
    r->add_option("--seed", rec.seed)->capture_default_str();
    r->add_option("--out", rec.out, "Write the reconstructed slice");
    r->add_flag("--reciprocity,!--no-reciprocity", rec.reciprocity)->capture_default_str();

    ExperimentArgs ex;
    auto* x = app.add_subcommand("experiment", "Jittered vs optimized masks over seeded trials");
    x->add_option("--config", ex.config, "JSON config (ExperimentConfig field names)");
    x->add_option("--output-dir", ex.output_dir);
    x->add_option("--base-seed", ex.base_seed);
    x->add_option("--n-trials", ex.n_trials);
    x->add_option("--jobs", ex.jobs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? 0 : code(ExitCode::invalid_argument);
    }

    try {
        if (*g) return run_generate(gen);
        if (*e) return run_evaluate(ev);
        if (*o) return run_optimize(opt);
        if (*r) return run_reconstruct(rec);
        if (*x) return run_experiment(ex);
    } catch (const sgap::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return code(err.exit_code());
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return code(ExitCode::numerical_failure);
    }
    return code(ExitCode::invalid_argument);
}
