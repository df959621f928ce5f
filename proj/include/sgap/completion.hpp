#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sgap/error.hpp"
#include "sgap/modomain.hpp"
#include "sgap/random.hpp"
#include "sgap/slice.hpp"
#include "sgap/spectral.hpp"
#include "sgap/survey.hpp"

namespace sgap {

struct CompletionConfig {
    int rank = 5;
    int iters = 200;
    /// Ridge weight. Empty: 1e-6 * sigma_1 of the observed midpoint-offset data.
    std::optional<double> lambda;
    std::uint64_t seed = 0;

    void validate() const {
        if (rank < 1) throw InvalidArgument("completion: rank must be >= 1");
        if (iters < 1) throw InvalidArgument("completion: iters must be >= 1");
        if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda))) throw InvalidArgument("completion: lambda must be >= 0");
    }
};

inline constexpr double kDefaultLambdaFactor = 1e-6;

/// A slice with unrecorded sources zeroed out.
struct ObservedSlice {
    FrequencySlice data;
    std::vector<std::uint8_t> row_observed;
};

inline ObservedSlice subsample(const FrequencySlice& slice, const SourceMask& mask) {
    if (!slice.matches(mask.grid)) throw InvalidArgument("subsample: slice shape does not match the mask grid");
    ObservedSlice out{slice, std::vector<std::uint8_t>(static_cast<std::size_t>(slice.n_s), 0)};
    for (int s : mask.selected) {
        if (s < 0 || s >= slice.n_s) throw InvalidArgument("subsample: mask selects an off-grid source");
        out.row_observed[static_cast<std::size_t>(s)] = 1;
    }
    for (int s = 0; s < slice.n_s; ++s) {
        if (out.row_observed[static_cast<std::size_t>(s)]) continue;
        for (int r = 0; r < slice.n_r; ++r) out.data(s, r) = Complex{};
    }
    return out;
}

struct CompletionResult {
    FrequencySlice estimate;
    /// Regularized least-squares objective after each sweep.
    std::vector<double> objective;
    double lambda = 0.0;
};

namespace detail {

struct MOSample {
    int index; // column for row lists, row for column lists
    Complex value;
};

/// Solves (A^H A + lambda I) x = A^H b for the factor row paired with `samples`.
inline Eigen::VectorXcd ridge_row(const Eigen::MatrixXcd& other, const std::vector<MOSample>& samples, double lambda, int rank) {
    if (samples.empty()) {
        if (lambda > 0.0) return Eigen::VectorXcd::Zero(rank);
        throw NumericalError("completion: unobserved midpoint/offset line makes the normal equations singular; use lambda > 0");
    }
    Eigen::MatrixXcd a(static_cast<Eigen::Index>(samples.size()), rank);
    Eigen::VectorXcd b(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        a.row(static_cast<Eigen::Index>(i)) = other.row(samples[i].index);
        b[static_cast<Eigen::Index>(i)] = samples[i].value;
    }
    Eigen::MatrixXcd normal = a.adjoint() * a;
    normal.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXcd> llt(normal);
    if (llt.info() != Eigen::Success || (lambda == 0.0 && static_cast<int>(samples.size()) < rank)) {
        throw NumericalError("completion: singular normal equations; use lambda > 0");
    }
    return llt.solve(a.adjoint() * b);
}

} // namespace detail

/// Rank-constrained completion in the midpoint-offset domain.
///
/// Observed traces (plus their reciprocal images when `reciprocity` is set,
/// which assumes reciprocal data) are placed on the midpoint-offset grid; the
/// fit minimizes the squared misfit over observed cells plus
/// lambda * (|L|_F^2 + |R|_F^2) for X = L R^T by alternating ridge solves,
/// then reads every trace back from X.
inline CompletionResult complete_with_history(const ObservedSlice& observed, const SourceMask& mask,
                                              const CompletionConfig& config, bool reciprocity) {
    config.validate();
    const SurveyGrid& g = mask.grid;
    if (!observed.data.matches(g) || observed.row_observed.size() != static_cast<std::size_t>(g.n_s)) {
        throw InvalidArgument("complete: observed slice does not match the mask grid");
    }
    for (int s = 0; s < g.n_s; ++s) {
        if (static_cast<bool>(observed.row_observed[static_cast<std::size_t>(s)]) != mask.is_selected(s)) {
            throw InvalidArgument("complete: observed rows disagree with the mask");
        }
    }
    const int rows = mo_rows(g);
    const int cols = mo_cols(g);
    const int k = config.rank;
    if (k > std::min(rows, cols)) throw InvalidArgument("complete: rank exceeds the midpoint-offset dimensions");

    std::vector<std::vector<detail::MOSample>> by_row(static_cast<std::size_t>(rows));
    std::vector<std::vector<detail::MOSample>> by_col(static_cast<std::size_t>(cols));
    std::vector<Triplet<Complex>> triplets;
    for (const Trace& t : recorded_traces(mask, reciprocity)) {
        const bool direct = observed.row_observed[static_cast<std::size_t>(t.source)] != 0;
        const Complex v = direct ? observed.data(t.source, t.receiver) : observed.data(t.receiver, t.source);
        const MOCell c = to_mo_cell(g, t);
        by_row[static_cast<std::size_t>(c.m)].push_back({c.h, v});
        by_col[static_cast<std::size_t>(c.h)].push_back({c.m, v});
        triplets.push_back({c.m, c.h, v});
    }

    CompletionResult res;
    if (config.lambda) {
        res.lambda = *config.lambda;
    } else {
        const SparseMatrix<Complex> b(rows, cols, triplets);
        res.lambda = b.all_zero() ? 0.0 : kDefaultLambdaFactor * top2_singular(b).sigma1;
    }

    Rng rng = make_rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(2.0 * k));
    auto random_factor = [&](int n) {
        Eigen::MatrixXcd f(n, k);
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < n; ++i) {
                const double re = gauss(rng);
                const double im = gauss(rng);
                f(i, j) = Complex(re, im);
            }
        return f;
    };
    Eigen::MatrixXcd left = random_factor(rows);
    Eigen::MatrixXcd right = random_factor(cols);

    auto objective = [&] {
        double misfit = 0.0;
        for (int m = 0; m < rows; ++m)
            for (const auto& smp : by_row[static_cast<std::size_t>(m)])
                misfit += std::norm(left.row(m).cwiseProduct(right.row(smp.index)).sum() - smp.value);
        return misfit + res.lambda * (left.squaredNorm() + right.squaredNorm());
    };

    res.objective.reserve(static_cast<std::size_t>(config.iters));
    for (int sweep = 0; sweep < config.iters; ++sweep) {
        // X(m, h) = left.row(m) . right.row(h), no conjugation
        for (int m = 0; m < rows; ++m)
            left.row(m) = detail::ridge_row(right, by_row[static_cast<std::size_t>(m)], res.lambda, k).transpose();
        for (int h = 0; h < cols; ++h)
            right.row(h) = detail::ridge_row(left, by_col[static_cast<std::size_t>(h)], res.lambda, k).transpose();
        res.objective.push_back(objective());
    }

    res.estimate = FrequencySlice(g.n_s, g.n_r, observed.data.omega);
    for (int s = 0; s < g.n_s; ++s)
        for (int r = 0; r < g.n_r; ++r) {
            const MOCell c = to_mo_cell(g, {s, r});
            res.estimate(s, r) = left.row(c.m).cwiseProduct(right.row(c.h)).sum();
        }
    return res;
}

inline FrequencySlice complete(const ObservedSlice& observed, const SourceMask& mask, const CompletionConfig& config,
                               bool reciprocity) {
    return complete_with_history(observed, mask, config, reciprocity).estimate;
}

/// Reported instead of +inf for a perfect reconstruction.
inline constexpr double kMaxSnrDb = 300.0;

/// -20 log10(|truth - estimate|_F / |truth|_F), in dB.
inline double snr(const FrequencySlice& truth, const FrequencySlice& estimate) {
    if (truth.n_s != estimate.n_s || truth.n_r != estimate.n_r) throw InvalidArgument("snr: shape mismatch");
    const double signal = truth.frobenius();
    if (!(signal > 0.0)) throw InvalidArgument("snr: reference slice is identically zero");
    double err = 0.0;
    for (std::size_t i = 0; i < truth.values.size(); ++i) err += std::norm(truth.values[i] - estimate.values[i]);
    err = std::sqrt(err);
    if (err == 0.0) return kMaxSnrDb;
    return std::min(kMaxSnrDb, -20.0 * std::log10(err / signal));
}

} // namespace sgap
