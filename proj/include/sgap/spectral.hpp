#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sgap/error.hpp"
#include "sgap/modomain.hpp"
#include "sgap/random.hpp"
#include "sgap/sparse.hpp"
#include "sgap/survey.hpp"

namespace sgap {

struct SpectralOptions {
    /// Cap on Krylov steps per stage.
    int max_iters = 10000;
    /// Ritz residual tolerance, relative to the leading Gram eigenvalue.
    double tol = 1e-12;
};

struct SpectralResult {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double sr = 0.0;
    int iterations_used = 0;
};

namespace detail {

template <typename T>
double real_dot(std::span<const T> a, std::span<const T> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::real(conj_if_complex(a[i]) * b[i]);
    return acc;
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
    T acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += conj_if_complex(a[i]) * b[i];
    return acc;
}

template <typename T>
double norm(std::span<const T> a) {
    return std::sqrt(real_dot<T>(a, a));
}

/// w -= (v^H w) v for every v in `basis`. Two passes.
template <typename T>
void orthogonalize(std::vector<T>& w, const std::vector<std::vector<T>>& basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& v : basis) {
            const T c = dot<T>(v, w);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * v[i];
        }
    }
}

template <typename T>
std::vector<T> start_vector(std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<T> v(n);
    for (auto& x : v) {
        if constexpr (is_complex<T>::value) {
            const double re = g(rng);
            const double im = g(rng);
            x = T(re, im);
        } else {
            x = g(rng);
        }
    }
    return v;
}

template <typename T>
struct RitzPair {
    double theta = 0.0;
    std::vector<T> vector;
    int steps = 0;
};

/// Largest eigenpair of a Hermitian PSD operator restricted to the orthogonal
/// complement of `deflate`. Lanczos with full reorthogonalization.
/// `scale` fixes the magnitude used for the convergence and breakdown tests;
/// pass 0 to take it from the running estimate.
template <typename T, typename Apply>
RitzPair<T> lanczos_top(Apply&& apply, std::size_t n, const std::vector<std::vector<T>>& deflate,
                        std::uint64_t seed, double scale, const SpectralOptions& opt) {
    const std::size_t space = n - deflate.size();
    RitzPair<T> out;
    if (space == 0) return out;

    std::vector<std::vector<T>> basis;
    std::vector<double> alpha;
    std::vector<double> beta; // beta[j] couples q_j and q_{j+1}

    auto with_deflation = [&](std::vector<T>& w) {
        orthogonalize(w, deflate);
        orthogonalize(w, basis);
    };

    std::vector<T> q = start_vector<T>(n, seed);
    orthogonalize(q, deflate);
    {
        const double nq = norm<T>(q);
        for (auto& x : q) x /= nq;
    }

    std::vector<T> w(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    double norm_estimate = 0.0;
    double theta = 0.0;
    Eigen::VectorXd s_top;

    const int cap = static_cast<int>(std::min<std::size_t>(space, static_cast<std::size_t>(std::max(1, opt.max_iters))));
    for (int j = 0;; ++j) {
        basis.push_back(q);
        apply(std::span<const T>(q), std::span<T>(w));
        const double a = real_dot<T>(q, w);
        alpha.push_back(a);
        with_deflation(w);
        const double b = norm<T>(w);
        beta.push_back(b);

        norm_estimate = std::max(norm_estimate, std::abs(a) + b + (j > 0 ? beta[j - 1] : 0.0));
        const double ref = scale > 0.0 ? scale : norm_estimate;

        const auto dim = static_cast<Eigen::Index>(alpha.size());
        Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), dim);
        Eigen::VectorXd sub(std::max<Eigen::Index>(dim - 1, 0));
        for (Eigen::Index k = 0; k + 1 < dim; ++k) sub[k] = beta[static_cast<std::size_t>(k)];
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        theta = tri.eigenvalues()[dim - 1];
        s_top = tri.eigenvectors().col(dim - 1);
        const double residual = b * std::abs(s_top[dim - 1]);

        const bool breakdown = b <= 1e-14 * std::max(ref, 1e-300);
        const bool exhausted = alpha.size() >= space;
        if (residual <= opt.tol * ref || breakdown || exhausted) break;
        if (j + 1 >= cap) {
            throw ConvergenceError("Lanczos did not converge within " + std::to_string(cap) + " steps",
                                   std::sqrt(std::max(theta, 0.0)), 0.0, j + 1);
        }
        for (std::size_t i = 0; i < n; ++i) q[i] = w[i] / b;
    }

    out.theta = theta;
    out.steps = static_cast<int>(alpha.size());
    out.vector.assign(n, T{});
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const double c = s_top[static_cast<Eigen::Index>(k)];
        for (std::size_t i = 0; i < n; ++i) out.vector[i] += c * basis[k][i];
    }
    const double nv = norm<T>(out.vector);
    for (auto& x : out.vector) x /= nv;
    return out;
}

} // namespace detail

/// Two largest singular values of a sparse matrix.
///
/// Works on the Gram operator of the smaller side. The leading eigenpair comes
/// from a Lanczos run; the second from a Lanczos run on the operator deflated
/// by the first Ritz vector, so repeated leading values are found twice.
/// Start vectors are seeded by the matrix shape, so results are reproducible.
template <typename T>
SpectralResult top2_singular(const SparseMatrix<T>& a, const SpectralOptions& opt = {}) {
    if (a.nonzeros() == 0 || a.all_zero()) throw DegenerateInput("top2_singular: matrix has no nonzero entry");

    const bool use_cols = a.cols() <= a.rows();
    const auto n = static_cast<std::size_t>(use_cols ? a.cols() : a.rows());
    std::vector<T> tmp(static_cast<std::size_t>(use_cols ? a.rows() : a.cols()));

    auto gram = [&](std::span<const T> x, std::span<T> y) {
        if (use_cols) {
            a.multiply(x, tmp);
            a.multiply_adjoint(tmp, y);
        } else {
            a.multiply_adjoint(x, tmp);
            a.multiply(tmp, y);
        }
    };

    const auto shape_seed = derive_seed(0x5eedULL, {static_cast<std::uint64_t>(a.rows()), static_cast<std::uint64_t>(a.cols())});

    SpectralResult res;
    auto first = detail::lanczos_top<T>(gram, n, {}, derive_seed(shape_seed, {1}), 0.0, opt);
    const double theta1 = std::max(first.theta, 0.0);
    res.iterations_used = first.steps;

    double theta2 = 0.0;
    if (n > 1) {
        std::vector<std::vector<T>> deflate{first.vector};
        try {
            auto second = detail::lanczos_top<T>(gram, n, deflate, derive_seed(shape_seed, {2}), theta1, opt);
            theta2 = std::clamp(second.theta, 0.0, theta1);
            res.iterations_used += second.steps;
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(e.what(), std::sqrt(theta1), e.last_sigma1, res.iterations_used + e.iterations);
        }
    }

    res.sigma1 = std::sqrt(theta1);
    res.sigma2 = std::sqrt(theta2);
    res.sr = res.sigma1 > 0.0 ? res.sigma2 / res.sigma1 : 0.0;
    return res;
}

/// Singular values of the midpoint-offset image of a mask.
inline SpectralResult mask_spectrum(const SourceMask& mask, bool reciprocity, const SpectralOptions& opt = {}) {
    return top2_singular(to_sparse<double>(to_mo(mask, reciprocity)), opt);
}

/// The design objective: sigma_2 / sigma_1 of the midpoint-offset mask.
inline double spectral_ratio(const SourceMask& mask, bool reciprocity, const SpectralOptions& opt = {}) {
    return mask_spectrum(mask, reciprocity, opt).sr;
}

} // namespace sgap
