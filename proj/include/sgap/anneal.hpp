#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "sgap/error.hpp"
#include "sgap/random.hpp"
#include "sgap/spectral.hpp"
#include "sgap/survey.hpp"

namespace sgap {

struct AnnealConfig {
    int max_iters = 4000;
    /// Initial temperature. Empty: calibrated from warm-up proposals.
    std::optional<double> t0;
    /// Geometric cooling rate. Empty: chosen so that T(K-1) = 1e-4 * T0.
    std::optional<double> alpha;
    double move_fraction = 0.2;
    std::uint64_t seed = 0;
    bool reciprocity = true;
    /// Re-check the jitter constraints on every proposal and throw on violation.
    bool verify_constraints = false;
    SpectralOptions spectral;

    void validate() const {
        if (max_iters < 1) throw InvalidArgument("anneal: max_iters must be >= 1");
        if (t0 && !(*t0 > 0.0 && std::isfinite(*t0))) throw InvalidArgument("anneal: T0 must be positive");
        if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) throw InvalidArgument("anneal: alpha must lie in (0, 1)");
        if (!(move_fraction > 0.0 && move_fraction <= 1.0)) throw InvalidArgument("anneal: move_fraction must lie in (0, 1]");
    }
};

/// Auto-calibration knobs.
inline constexpr int kWarmupProposals = 50;
inline constexpr double kWarmupAcceptance = 0.8;
inline constexpr double kFinalTemperatureFactor = 1e-4;
/// Used when every warm-up proposal leaves the objective unchanged.
inline constexpr double kFallbackT0 = 1e-6;

struct IterationRecord {
    int iteration = 0;
    double temperature = 0.0;
    double sr_candidate = 0.0;
    double sr_current = 0.0; // after the accept/reject decision
    double sr_best = 0.0;
    bool accepted = false;
};

struct AnnealResult {
    SourceMask final_mask; // M_K
    SourceMask best_mask;  // lowest objective visited, the recommended output
    std::vector<IterationRecord> trajectory;
    double initial_sr = 0.0;
    double final_sr = 0.0;
    double best_sr = 0.0;
    double t0 = 0.0;
    double alpha = 0.0;
    std::size_t evaluations = 0;

    /// Relative objective reduction of the best state, in percent.
    [[nodiscard]] double reduction_pct() const noexcept {
        return initial_sr > 0.0 ? 100.0 * (1.0 - best_sr / initial_sr) : 0.0;
    }
};

inline double temperature(int k, double t0, double alpha) { return t0 * std::pow(alpha, static_cast<double>(k)); }

inline double temperature(int k, const AnnealConfig& config) {
    if (!config.t0 || !config.alpha) throw InvalidArgument("temperature: T0 and alpha must be resolved first");
    return temperature(k, *config.t0, *config.alpha);
}

/// Number of sources moved per proposal: ceil(fraction * n_sel), at least one.
inline int moved_count(int n_sel, double move_fraction) noexcept {
    const double x = move_fraction * static_cast<double>(n_sel);
    return std::clamp(static_cast<int>(std::ceil(x - 1e-9 * std::max(1.0, x))), 1, std::max(n_sel, 1));
}

/// Picks distinct selected sources at random and redraws each uniformly inside
/// its own region (the current slot included). The input is left untouched.
template <typename Generator>
SourceMask propose_neighbor(const SourceMask& state, double move_fraction, Generator& rng) {
    SourceMask next = state;
    const int n_sel = static_cast<int>(state.selected.size());
    if (n_sel == 0) return next;
    const int moves = moved_count(n_sel, move_fraction);

    std::vector<int> order(static_cast<std::size_t>(n_sel));
    for (int k = 0; k < n_sel; ++k) order[static_cast<std::size_t>(k)] = k;
    for (int k = 0; k < moves; ++k) {
        std::uniform_int_distribution<int> pick(k, n_sel - 1);
        std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);

        // one selection per ordered region, so the k-th selection lives in region k
        const int region = order[static_cast<std::size_t>(k)];
        const Region& r = state.partition.regions[static_cast<std::size_t>(region)];
        std::uniform_int_distribution<int> slot(r.begin, r.end - 1);
        next.selected[static_cast<std::size_t>(region)] = slot(rng);
    }
    return next;
}

/// Metropolis rule: downhill and flat moves always pass, uphill moves pass
/// with probability exp(-delta / T).
template <typename Generator>
bool accept(double delta, double temp, Generator& rng) {
    if (delta <= 0.0) return true;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < std::exp(-delta / temp);
}

/// Called after each iteration with the record, the current state and the
/// proposal that was evaluated.
using AnnealObserver = std::function<void(const IterationRecord&, const SourceMask& current, const SourceMask& candidate)>;

/// Warm-up calibration: T0 such that the median |delta| of a batch of proposals
/// from `initial` is accepted with probability kWarmupAcceptance.
inline double calibrate_t0(const SourceMask& initial, double initial_sr, const AnnealConfig& config, std::size_t* evaluations = nullptr) {
    Rng rng = make_rng(derive_seed(config.seed, {0xca11b8a7eULL}));
    std::vector<double> deltas;
    deltas.reserve(kWarmupProposals);
    for (int i = 0; i < kWarmupProposals; ++i) {
        const auto cand = propose_neighbor(initial, config.move_fraction, rng);
        deltas.push_back(std::abs(spectral_ratio(cand, config.reciprocity, config.spectral) - initial_sr));
    }
    if (evaluations) *evaluations += deltas.size();
    std::sort(deltas.begin(), deltas.end());
    const std::size_t mid = deltas.size() / 2;
    const double median = deltas.size() % 2 == 1 ? deltas[mid] : 0.5 * (deltas[mid - 1] + deltas[mid]);
    if (!(median > 0.0)) return kFallbackT0;
    return median / std::log(1.0 / kWarmupAcceptance);
}

inline double default_alpha(int max_iters) {
    if (max_iters <= 1) return kFinalTemperatureFactor;
    return std::pow(kFinalTemperatureFactor, 1.0 / static_cast<double>(max_iters - 1));
}

/// Simulated annealing over jitter-constrained source masks.
inline AnnealResult optimize(const SourceMask& initial, const AnnealConfig& config, const AnnealObserver& observer = {}) {
    config.validate();
    if (!check_constraints(initial)) throw InvalidArgument("optimize: initial mask violates the jitter constraints");

    AnnealResult res;
    auto objective = [&](const SourceMask& m) {
        ++res.evaluations;
        return spectral_ratio(m, config.reciprocity, config.spectral);
    };

    SourceMask current = initial;
    double current_sr = objective(current);
    res.initial_sr = current_sr;
    res.best_sr = current_sr;
    res.best_mask = current;

    res.t0 = config.t0 ? *config.t0 : calibrate_t0(initial, current_sr, config, &res.evaluations);
    res.alpha = config.alpha ? *config.alpha : default_alpha(config.max_iters);

    Rng rng = make_rng(config.seed);
    res.trajectory.reserve(static_cast<std::size_t>(config.max_iters));
    for (int k = 0; k < config.max_iters; ++k) {
        const double temp = temperature(k, res.t0, res.alpha);
        SourceMask candidate = propose_neighbor(current, config.move_fraction, rng);
        if (config.verify_constraints && !check_constraints(candidate)) {
            throw NumericalError("optimize: proposal " + std::to_string(k) + " violates the jitter constraints");
        }
        const double candidate_sr = objective(candidate);
        const bool accepted = accept(candidate_sr - current_sr, temp, rng);
        if (accepted) {
            current = std::move(candidate);
            current_sr = candidate_sr;
            if (current_sr < res.best_sr) {
                res.best_sr = current_sr;
                res.best_mask = current;
            }
        }
        res.trajectory.push_back({k, temp, candidate_sr, current_sr, res.best_sr, accepted});
        if (observer) observer(res.trajectory.back(), current, accepted ? current : candidate);
    }

    res.final_mask = std::move(current);
    res.final_sr = current_sr;
    return res;
}

/// `iter,temperature,sr_current,sr_best,accepted`, one row per iteration.
inline void write_trajectory_csv(std::ostream& out, const AnnealResult& res) {
    out << "iter,temperature,sr_current,sr_best,accepted\n";
    for (const auto& r : res.trajectory) {
        out << r.iteration << ',' << format_double(r.temperature) << ',' << format_double(r.sr_current) << ','
            << format_double(r.sr_best) << ',' << (r.accepted ? 1 : 0) << '\n';
    }
}

} // namespace sgap
