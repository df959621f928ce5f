#include <catch2/catch_amalgamated.hpp>

#include <Eigen/SVD>

#include <complex>
#include <numeric>
#include <random>

#include "sgap/spectral.hpp"

using namespace sgap;

namespace {

struct DenseCase {
    Eigen::MatrixXd dense;
    SparseMatrix<double> sparse;
};

DenseCase random_binary(int rows, int cols, double density, std::uint64_t seed) {
    Rng rng(seed);
    std::bernoulli_distribution on(density);
    DenseCase c{Eigen::MatrixXd::Zero(rows, cols), {}};
    std::vector<Triplet<double>> t;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (on(rng)) {
                c.dense(i, j) = 1.0;
                t.push_back({i, j, 1.0});
            }
    c.sparse = SparseMatrix<double>(rows, cols, std::move(t));
    return c;
}

// Independent route: Eigen's one-sided Jacobi SVD on the dense matrix.
std::pair<double, double> dense_top2(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    return {s[0], s.size() > 1 ? s[1] : 0.0};
}

} // namespace

TEST_CASE("top2_singular on closed-form matrices", "[spectral]") {
    SECTION("2x2 all ones is rank one") {
        SparseMatrix<double> a(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
        auto r = top2_singular(a);
        CHECK(r.sigma1 == Catch::Approx(2.0).epsilon(1e-12));
        CHECK(r.sigma2 == Catch::Approx(0.0).margin(1e-7));
        CHECK(r.sr == Catch::Approx(0.0).margin(1e-7));
    }
    SECTION("identity has two unit singular values") {
        for (int n : {2, 3, 17, 60}) {
            std::vector<Triplet<double>> t;
            for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
            auto r = top2_singular(SparseMatrix<double>(n, n, t));
            CHECK(r.sigma1 == Catch::Approx(1.0).epsilon(1e-12));
            CHECK(r.sigma2 == Catch::Approx(1.0).epsilon(1e-12));
        }
    }
    SECTION("two identical all-ones blocks give a repeated leading value") {
        std::vector<Triplet<double>> t;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                t.push_back({i, j, 1.0});
                t.push_back({i + 3, j + 3, 1.0});
            }
        auto r = top2_singular(SparseMatrix<double>(6, 6, t));
        CHECK(r.sigma1 == Catch::Approx(3.0).epsilon(1e-12));
        CHECK(r.sigma2 == Catch::Approx(3.0).epsilon(1e-12));
    }
    SECTION("single column has no second singular value") {
        SparseMatrix<double> a(3, 1, {{0, 0, 1.0}, {2, 0, 1.0}});
        auto r = top2_singular(a);
        CHECK(r.sigma1 == Catch::Approx(std::sqrt(2.0)));
        CHECK(r.sigma2 == 0.0);
    }
}

TEST_CASE("top2_singular errors", "[spectral]") {
    SECTION("all-zero matrix") {
        CHECK_THROWS_AS(top2_singular(SparseMatrix<double>(4, 4, {})), DegenerateInput);
        CHECK_THROWS_AS(top2_singular(SparseMatrix<double>(2, 2, {{0, 0, 0.0}})), DegenerateInput);
    }
    SECTION("iteration cap reports the last iterate") {
        auto c = random_binary(40, 40, 0.5, 99);
        SpectralOptions opt;
        opt.max_iters = 2;
        try {
            (void)top2_singular(c.sparse, opt);
            FAIL("expected ConvergenceError");
        } catch (const ConvergenceError& e) {
            CHECK(e.iterations >= 2);
            CHECK(e.last_sigma1 > 0.0);
        }
    }
}

TEST_CASE("top2_singular matches a dense SVD on random binary matrices", "[spectral][oracle]") {
    Rng dims(2024);
    std::uniform_int_distribution<int> side(2, 50);
    std::uniform_real_distribution<double> dens(0.05, 0.9);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int rows = side(dims);
        const int cols = side(dims);
        auto c = random_binary(rows, cols, dens(dims), derive_seed(7, {static_cast<std::uint64_t>(trial)}));
        if (c.sparse.nonzeros() == 0) continue;
        auto [s1, s2] = dense_top2(c.dense);
        auto r = top2_singular(c.sparse);
        INFO("trial " << trial << " shape " << rows << "x" << cols);
        CHECK(std::abs(r.sigma1 - s1) <= 1e-8 * s1);
        CHECK(std::abs(r.sigma2 - s2) <= 1e-8 * std::max(s2, 1e-300) + (s2 == 0.0 ? 1e-8 * s1 : 0.0));
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("spectral ratio is invariant under permutation and scaling", "[spectral][property]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto c = random_binary(30, 25, 0.3, seed);
        const auto base = top2_singular(c.sparse);

        Rng rng(seed + 1000);
        std::vector<int> prow(30), pcol(25);
        std::iota(prow.begin(), prow.end(), 0);
        std::iota(pcol.begin(), pcol.end(), 0);
        std::shuffle(prow.begin(), prow.end(), rng);
        std::shuffle(pcol.begin(), pcol.end(), rng);
        std::uniform_real_distribution<double> sc(0.01, 100.0);
        const double scale = sc(rng);

        std::vector<Triplet<double>> permuted, scaled;
        c.sparse.for_each([&](int r, int col, double v) {
            permuted.push_back({prow[r], pcol[col], v});
            scaled.push_back({r, col, v * scale});
        });
        const auto p = top2_singular(SparseMatrix<double>(30, 25, permuted));
        const auto s = top2_singular(SparseMatrix<double>(30, 25, scaled));
        CHECK(p.sr == Catch::Approx(base.sr).epsilon(1e-9));
        CHECK(s.sr == Catch::Approx(base.sr).epsilon(1e-9));
        CHECK(s.sigma1 == Catch::Approx(base.sigma1 * scale).epsilon(1e-9));
    }
}

TEST_CASE("complex matrices go through the Hermitian Gram operator", "[spectral]") {
    Rng rng(5);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(20, 12);
    std::vector<Triplet<std::complex<double>>> t;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 12; ++j)
            if ((i * 7 + j * 3) % 4 == 0) {
                const std::complex<double> v(g(rng), g(rng));
                dense(i, j) = v;
                t.push_back({i, j, v});
            }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense);
    auto r = top2_singular(SparseMatrix<std::complex<double>>(20, 12, t));
    CHECK(r.sigma1 == Catch::Approx(svd.singularValues()[0]).epsilon(1e-9));
    CHECK(r.sigma2 == Catch::Approx(svd.singularValues()[1]).epsilon(1e-9));
}

TEST_CASE("top2_singular is deterministic", "[spectral]") {
    auto c = random_binary(45, 45, 0.2, 77);
    const auto a = top2_singular(c.sparse);
    const auto b = top2_singular(c.sparse);
    CHECK(a.sigma1 == b.sigma1);
    CHECK(a.sigma2 == b.sigma2);
    CHECK(a.iterations_used == b.iterations_used);
}
