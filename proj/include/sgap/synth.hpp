#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <span>

#include <Eigen/Dense>

#include "sgap/error.hpp"
#include "sgap/modomain.hpp"
#include "sgap/random.hpp"
#include "sgap/slice.hpp"

namespace sgap {

/// Planar event t(s, r) = intercept + p * x_s + q * x_r.
struct EventSpec {
    Complex amplitude{1.0, 0.0};
    double intercept_time = 0.0;   // s
    double source_slowness = 0.0;  // s/m
    double receiver_slowness = 0.0;
};

/// Sum of planar events at one angular frequency. Each event is an outer
/// product over (source, receiver), so the rank is at most the event count.
inline FrequencySlice planar_events_slice(const SurveyGrid& grid, std::span<const EventSpec> events, double omega) {
    grid.validate();
    if (events.empty()) throw InvalidArgument("planar_events_slice needs at least one event");
    FrequencySlice out(grid.n_s, grid.n_r, omega);
    const Complex i{0.0, 1.0};
    for (const EventSpec& e : events) {
        for (int s = 0; s < grid.n_s; ++s) {
            const double xs = s * grid.spacing;
            for (int r = 0; r < grid.n_r; ++r) {
                const double xr = r * grid.spacing;
                out(s, r) += e.amplitude * std::exp(-i * omega * (e.intercept_time + e.source_slowness * xs + e.receiver_slowness * xr));
            }
        }
    }
    return out;
}

/// Random complex matrix of exact rank `rank` over the full midpoint-offset
/// rectangle. With `reciprocal`, the offset factor is mirrored about zero
/// offset so that data(s, r) == data(r, s) wherever both traces exist.
inline Eigen::MatrixXcd lowrank_mo_matrix(const SurveyGrid& grid, int rank, std::uint64_t seed, bool reciprocal = true) {
    grid.validate();
    const int rows = mo_rows(grid);
    const int cols = mo_cols(grid);
    const int zero = grid.n_r - 1;
    int mirrored = 0;
    for (int h = 0; h < zero; ++h) mirrored += (2 * zero - h < cols);
    const int distinct_cols = reciprocal ? cols - mirrored : cols;
    if (rank < 1 || rank > std::min(rows, distinct_cols)) {
        throw InvalidArgument("lowrank_mo_matrix: rank " + std::to_string(rank) + " does not fit a " +
                              std::to_string(rows) + "x" + std::to_string(cols) + " midpoint-offset grid");
    }

    Rng rng = make_rng(seed);
    std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(2.0 * rank));
    auto draw = [&](int n) {
        Eigen::MatrixXcd f(n, rank);
        for (int j = 0; j < rank; ++j)
            for (int i = 0; i < n; ++i) {
                const double re = g(rng);
                const double im = g(rng);
                f(i, j) = Complex(re, im);
            }
        return f;
    };
    Eigen::MatrixXcd left = draw(rows);
    Eigen::MatrixXcd right = draw(cols);
    if (reciprocal) {
        for (int h = 0; h < zero; ++h) {
            const int mirror = 2 * zero - h;
            if (mirror < cols) right.row(mirror) = right.row(h);
        }
    }
    return left * right.transpose();
}

/// Samples lowrank_mo_matrix on the acquisition diamond.
inline FrequencySlice lowrank_mo_slice(const SurveyGrid& grid, int rank, std::uint64_t seed, bool reciprocal = true) {
    const Eigen::MatrixXcd mo = lowrank_mo_matrix(grid, rank, seed, reciprocal);
    FrequencySlice out(grid.n_s, grid.n_r, 0.0);
    for (int s = 0; s < grid.n_s; ++s)
        for (int r = 0; r < grid.n_r; ++r) {
            const MOCell c = to_mo_cell(grid, {s, r});
            out(s, r) = mo(c.m, c.h);
        }
    return out;
}

} // namespace sgap
