// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "tqt/baselines.hpp"
#include "tqt/conv.hpp"
#include "tqt/error.hpp"

using namespace tqt;

namespace {

DenseTensor random_tensor(const std::vector<std::size_t>& shape, unsigned seed) {
    DenseTensor t(shape);
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

double rel_error(const DenseTensor& a, const DenseTensor& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        num += d * d;
        den += a[i] * a[i];
    }
    return std::sqrt(num / den);
}

void check_close(const DenseTensor& a, const DenseTensor& b, double tol = 1e-10) {
    REQUIRE(a.shape() == b.shape());
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) scale = std::max(scale, std::abs(a[i]));
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i] - b[i]) <= tol * std::max(scale, 1.0));
}

double svd_tail(const Eigen::MatrixXd& m, std::size_t rank) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    double tail = 0.0;
    for (int k = static_cast<int>(rank); k < svd.singularValues().size(); ++k)
        tail += svd.singularValues()(k) * svd.singularValues()(k);
    return std::sqrt(tail);
}

}  // namespace

TEST_CASE("reshape svd: exact at full rank, tail-optimal when truncated") {
    const DenseTensor w = random_tensor({3, 3, 4, 6}, 201);
    const SvdFactorPair full = reshape_svd_factorize(w, 6);
    CHECK(rel_error(w, reconstruct(full)) < 1e-10);

    // natural row-major flatten: rows indexed by (i,j,s), cols by shat
    Eigen::MatrixXd m(36, 6);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t s = 0; s < 4; ++s)
                for (std::size_t f = 0; f < 6; ++f)
                    m((i * 3 + j) * 4 + s, f) = w.at({i, j, s, f});

    for (std::size_t r : {1u, 3u, 5u}) {
        const SvdFactorPair trunc = reshape_svd_factorize(w, r);
        double err = 0.0;
        const DenseTensor rec = reconstruct(trunc);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double d = w[i] - rec[i];
            err += d * d;
        }
        CHECK(std::sqrt(err) == doctest::Approx(svd_tail(m, r)).epsilon(1e-8));
    }
}

TEST_CASE("reshape svd: staged convolution equals convolving the reconstruction") {
    const DenseTensor x = random_tensor({7, 6, 4}, 202);
    const DenseTensor w = random_tensor({3, 3, 4, 6}, 203);
    const SvdFactorPair f = reshape_svd_factorize(w, 3);
    const DenseTensor want = conv2d_direct(x, reconstruct(f), 1, 1);
    const DenseTensor got = reshape_svd_apply(x, f, 1, 1);
    check_close(want, got);
}

TEST_CASE("spatial svd: exact at full rank, tail-optimal when truncated") {
    const DenseTensor w = random_tensor({3, 3, 4, 5}, 205);
    const std::size_t full_rank = std::min<std::size_t>(3 * 4, 3 * 5);
    CHECK(rel_error(w, reconstruct(spatial_svd_factorize(w, full_rank))) < 1e-10);

    // separable rearrangement: row = s*D + i, col = shat*D + j
    Eigen::MatrixXd m(12, 15);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t s = 0; s < 4; ++s)
                for (std::size_t f = 0; f < 5; ++f)
                    m(s * 3 + i, f * 3 + j) = w.at({i, j, s, f});

    for (std::size_t r : {2u, 4u, 8u}) {
        const DenseTensor rec = reconstruct(spatial_svd_factorize(w, r));
        double err = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double d = w[i] - rec[i];
            err += d * d;
        }
        CHECK(std::sqrt(err) == doctest::Approx(svd_tail(m, r)).epsilon(1e-8));
    }
}

TEST_CASE("spatial svd: vertical then horizontal stages match the combined kernel") {
    const DenseTensor x = random_tensor({8, 9, 4}, 206);
    const DenseTensor w = random_tensor({3, 3, 4, 5}, 207);
    const SpatialSvdPair f = spatial_svd_factorize(w, 4);
    for (std::size_t stride : {1u, 2u})
        for (std::size_t pad : {0u, 1u}) {
            const DenseTensor want = conv2d_direct(x, reconstruct(f), stride, pad);
            const DenseTensor got = spatial_svd_apply(x, f, stride, pad);
            check_close(want, got);
        }
}

TEST_CASE("tensor train: exact at full ranks, staged convolution consistent") {
    const DenseTensor w = random_tensor({3, 3, 4, 5}, 208);
    // maximal ranks for the (S,D,D,Shat) ordering
    const std::array<std::size_t, 3> full = {4, 12, 5};
    CHECK(rel_error(w, reconstruct(tt_factorize(w, full))) < 1e-10);

    const std::array<std::size_t, 3> small = {3, 4, 3};
    const TTFactors f = tt_factorize(w, small);
    CHECK(f.g1.cols() == 3);
    CHECK(f.g2.shape() == std::vector<std::size_t>{3, 3, 4});
    CHECK(f.g3.shape() == std::vector<std::size_t>{4, 3, 3});
    CHECK(f.g4.rows() == 3);

    const DenseTensor x = random_tensor({7, 8, 4}, 209);
    const DenseTensor want = conv2d_direct(x, reconstruct(f), 1, 1);
    const DenseTensor got = tt_apply(x, f, 1, 1);
    check_close(want, got);
}

TEST_CASE("tensor train rejects infeasible ranks") {
    const DenseTensor w = random_tensor({3, 3, 4, 5}, 210);
    CHECK_THROWS_AS(tt_factorize(w, {5, 9, 5}), Error);  // r1 > S
}

TEST_CASE("lasso pruning matches the exhaustive subset oracle on a planted problem") {
    // 1x1 kernel, S=6 input channels, only channels 1 and 4 matter
    const std::size_t n = 40, S = 6, Shat = 3;
    std::mt19937 rng(211);
    std::normal_distribution<double> dist(0.0, 1.0);

    DenseTensor w({1, 1, S, Shat});
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t f = 0; f < Shat; ++f)
            w.at({0, 0, s, f}) = (s == 1 || s == 4) ? dist(rng) : 1e-8 * dist(rng);

    DenseTensor x({n, S, 1});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = dist(rng);
    DenseMatrix y(n, Shat);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < Shat; ++f) {
            double acc = 0.0;
            for (std::size_t s = 0; s < S; ++s)
                acc += x.at({i, s, 0}) * w.at({0, 0, s, f});
            y(i, f) = acc;
        }

    const ChannelSelection sel = channel_prune_lasso(x, w, y, 2);
    REQUIRE(sel.kept.size() <= 2);

    // exhaustive best 2-subset by least squares residual
    double best = 1e300;
    std::vector<std::size_t> best_set;
    for (std::size_t a = 0; a < S; ++a)
        for (std::size_t b = a + 1; b < S; ++b) {
            Eigen::MatrixXd design(n * Shat, 2);
            Eigen::VectorXd target(n * Shat);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t f = 0; f < Shat; ++f) {
                    const std::size_t row = i * Shat + f;
                    design(row, 0) = x.at({i, a, 0}) * w.at({0, 0, a, f});
                    design(row, 1) = x.at({i, b, 0}) * w.at({0, 0, b, f});
                    target(row) = y(i, f);
                }
            const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(target);
            const double res = (design * beta - target).squaredNorm();
            if (res < best) {
                best = res;
                best_set = {a, b};
            }
        }
    CHECK(best_set == std::vector<std::size_t>{1, 4});
    CHECK(sel.kept == best_set);

    // refit residual matches the oracle's least-squares residual
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < Shat; ++f) {
            double acc = 0.0;
            for (std::size_t s = 0; s < S; ++s)
                acc += x.at({i, s, 0}) * sel.refit_w.at({0, 0, s, f});
            const double d = y(i, f) - acc;
            res += d * d;
        }
    CHECK(res == doctest::Approx(best).epsilon(1e-6).scale(1.0));
}

TEST_CASE("lasso with explicit lambda shrinks the support as lambda grows") {
    const std::size_t n = 30, S = 5, Shat = 2;
    const DenseTensor w = random_tensor({1, 1, S, Shat}, 212);
    const DenseTensor x = random_tensor({n, S, 1}, 213);
    DenseMatrix y(n, Shat);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < Shat; ++f) {
            double acc = 0.0;
            for (std::size_t s = 0; s < S; ++s)
                acc += x.at({i, s, 0}) * w.at({0, 0, s, f});
            y(i, f) = acc;
        }
    const ChannelSelection loose = channel_prune_lasso(x, w, y, S, 1e-6);
    const ChannelSelection tight = channel_prune_lasso(x, w, y, S, 1e6);
    CHECK(loose.kept.size() >= tight.kept.size());
    CHECK(tight.kept.empty());
}

TEST_CASE("baseline parameter counts") {
    // d=3, s=4, shat=8
    CHECK(baseline_param_count(BaselineMethod::ReshapeSvd, 3, 4, 8, {2}) ==
          9ull * 4 * 2 + 2ull * 8);
    CHECK(baseline_param_count(BaselineMethod::SpatialSvd, 3, 4, 8, {2}) ==
          3ull * 4 * 2 + 3ull * 8 * 2);
    CHECK(baseline_param_count(BaselineMethod::TensorTrain, 3, 4, 8, {2, 3, 2}) ==
          4ull * 2 + 2ull * 3 * 3 + 3ull * 3 * 2 + 2ull * 8);
    CHECK(baseline_param_count(BaselineMethod::ChannelPrune, 3, 4, 8, {2}) ==
          9ull * 2 * 8);
}
