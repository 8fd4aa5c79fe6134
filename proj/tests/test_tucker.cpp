// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "tqt/error.hpp"
#include "tqt/svd.hpp"
#include "tqt/tucker.hpp"

using namespace tqt;

namespace {

DenseTensor random_tensor(const std::vector<std::size_t>& shape, unsigned seed) {
    DenseTensor t(shape);
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

void check_orthonormal_columns(const DenseMatrix& m, double tol = 1e-10) {
    for (std::size_t a = 0; a < m.cols(); ++a)
        for (std::size_t b = 0; b <= a; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i) dot += m(i, a) * m(i, b);
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < tol);
        }
}

double recon_error(const DenseTensor& t, const DenseTensor& approx) {
    double e = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = t[i] - approx[i];
        e += d * d;
    }
    return std::sqrt(e);
}

// Tensor with exact multilinear rank: random core expanded by orthonormal
// factors built from QR of random matrices.
DenseTensor exact_rank_tensor(const std::vector<std::size_t>& shape,
                              const std::vector<std::size_t>& rank, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    DenseTensor core(rank);
    for (std::size_t i = 0; i < core.size(); ++i) core[i] = dist(rng);

    std::vector<DenseMatrix> factors;
    for (std::size_t n = 0; n < shape.size(); ++n) {
        Eigen::MatrixXd g(shape[n], rank[n]);
        for (int i = 0; i < g.size(); ++i) g.data()[i] = dist(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q =
            qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<int>(shape[n]),
                                                          static_cast<int>(rank[n]));
        DenseMatrix f(shape[n], rank[n]);
        for (std::size_t i = 0; i < shape[n]; ++i)
            for (std::size_t j = 0; j < rank[n]; ++j) f(i, j) = q(i, j);
        factors.push_back(f);
    }
    return multilinear_product(core, factors);
}

}  // namespace

TEST_CASE("hooi recovers an exact low-rank tensor") {
    const DenseTensor t = exact_rank_tensor({5, 6, 4}, {2, 3, 2}, 31);
    const HooiResult res = hooi(t, {2, 3, 2});
    const DenseTensor approx = reconstruct(res.factors);
    CHECK(recon_error(t, approx) < 1e-10 * frobenius_norm(t));
}

TEST_CASE("hooi factors are orthonormal and the error history is monotone") {
    const DenseTensor t = random_tensor({6, 5, 4}, 37);
    const HooiResult res = hooi(t, {3, 2, 2});
    for (const DenseMatrix& f : res.factors.factors) check_orthonormal_columns(f);

    REQUIRE(!res.error_history.empty());
    for (std::size_t i = 1; i < res.error_history.size(); ++i)
        CHECK(res.error_history[i] <= res.error_history[i - 1] + 1e-12);

    // reported error equals the actual reconstruction error
    const double actual = recon_error(t, reconstruct(res.factors));
    CHECK(res.error_history.back() == doctest::Approx(actual).epsilon(1e-8));
}

TEST_CASE("energy splits between core and residual") {
    const DenseTensor t = random_tensor({5, 4, 6}, 41);
    const HooiResult res = hooi(t, {2, 2, 3});
    const double total = frobenius_norm(t);
    const double core = frobenius_norm(res.factors.core);
    const double err = res.error_history.back();
    CHECK(total * total == doctest::Approx(core * core + err * err).epsilon(1e-10));
}

TEST_CASE("order-2 hooi matches the Eigen SVD tail") {
    const DenseTensor t = random_tensor({7, 5}, 43);
    Eigen::MatrixXd m(7, 5);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 5; ++j) m(i, j) = t.at({i, j});
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);

    for (std::size_t r : {1u, 2u, 4u}) {
        const HooiResult res = hooi(t, {r, r});
        double tail = 0.0;
        for (int k = static_cast<int>(r); k < svd.singularValues().size(); ++k)
            tail += svd.singularValues()(k) * svd.singularValues()(k);
        CHECK(res.error_history.back() == doctest::Approx(std::sqrt(tail)).epsilon(1e-8));
    }
}

TEST_CASE("hooi improves on or matches its hosvd initialization") {
    const DenseTensor t = random_tensor({6, 6, 5, 4}, 47);
    const HooiResult res = hooi(t, {3, 3, 2, 2});
    CHECK(res.error_history.back() <= res.error_history.front() + 1e-12);
}

TEST_CASE("partial tucker keeps the spatial modes and compresses channels") {
    const DenseTensor w = random_tensor({3, 3, 6, 8}, 53);
    const PartialTuckerResult res = partial_tucker2(w, 3, 4);
    CHECK(res.factors.core.shape() == std::vector<std::size_t>{3, 3, 3, 4});
    CHECK(res.factors.u3.rows() == 6);
    CHECK(res.factors.u3.cols() == 3);
    CHECK(res.factors.u4.rows() == 8);
    CHECK(res.factors.u4.cols() == 4);
    check_orthonormal_columns(res.factors.u3);
    check_orthonormal_columns(res.factors.u4);

    // full channel rank reproduces the kernel
    const PartialTuckerResult full = partial_tucker2(w, 6, 8);
    CHECK(recon_error(w, reconstruct(full.factors)) < 1e-10 * frobenius_norm(w));
}

TEST_CASE("partial tucker error never beats the unconstrained mode-3/4 tail") {
    const DenseTensor w = random_tensor({3, 3, 8, 6}, 59);
    const PartialTuckerResult res = partial_tucker2(w, 4, 3);
    const double err = recon_error(w, reconstruct(res.factors));

    // lower bound: best rank-4 approximation of the mode-2 unfolding alone
    const DenseMatrix unf = mode_unfold(w, 2);
    Eigen::MatrixXd m(unf.rows(), unf.cols());
    for (std::size_t i = 0; i < unf.rows(); ++i)
        for (std::size_t j = 0; j < unf.cols(); ++j) m(i, j) = unf(i, j);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    double tail = 0.0;
    for (int k = 4; k < svd.singularValues().size(); ++k)
        tail += svd.singularValues()(k) * svd.singularValues()(k);
    CHECK(err * err >= tail - 1e-10);
}

TEST_CASE("rank bounds are enforced") {
    const DenseTensor w = random_tensor({3, 3, 4, 5}, 61);
    CHECK_THROWS_AS(partial_tucker2(w, 0, 2), Error);
    CHECK_THROWS_AS(partial_tucker2(w, 2, 6), Error);
    CHECK_THROWS_AS(hooi(w, {3, 3, 4}), Error);  // rank list length mismatch
}

TEST_CASE("compression ratios against hand arithmetic") {
    // C = prod I / (prod R + sum I_n R_n)
    // shape (4,5,6), rank (2,2,3): 120 / (12 + 8 + 10 + 18) = 2.5
    CHECK(tucker_compression_ratio({4, 5, 6}, {2, 2, 3}) == doctest::Approx(2.5));

    // P = D^2 S Shat / (D^2 R3 R4 + S R3 + Shat R4)
    // d=3, s=4, shat=8, r=(2,2): 288 / (36 + 8 + 16) = 4.8
    CHECK(param_compression_ratio(3, 4, 8, 2, 2) == doctest::Approx(4.8));

    // M with 8x8 input, 6x6 output: 288 / (36 + 8*64/36 + 16)
    const double m = macs_compression_ratio(3, 4, 8, {8, 8}, {6, 6}, 2, 2);
    CHECK(m == doctest::Approx(288.0 / (36.0 + 8.0 * 64.0 / 36.0 + 16.0)));
}
