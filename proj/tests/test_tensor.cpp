// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>
#include <vector>

#include "tqt/error.hpp"
#include "tqt/tensor.hpp"

using namespace tqt;

namespace {

DenseTensor random_tensor(const std::vector<std::size_t>& shape, unsigned seed) {
    DenseTensor t(shape);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

// Oracle: enumerate every multi-index and place it by the documented rule.
// Mode-n fibers are columns; among the remaining modes the lowest-numbered
// one varies fastest.
DenseMatrix unfold_oracle(const DenseTensor& t, std::size_t mode) {
    std::size_t cols = 1;
    for (std::size_t k = 0; k < t.order(); ++k)
        if (k != mode) cols *= t.extent(k);
    DenseMatrix m(t.extent(mode), cols);

    std::vector<std::size_t> idx(t.order(), 0);
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        std::size_t col = 0, stride = 1;
        for (std::size_t k = 0; k < t.order(); ++k) {
            if (k == mode) continue;
            col += idx[k] * stride;
            stride *= t.extent(k);
        }
        m(idx[mode], col) = t.at(idx);
        for (std::size_t k = t.order(); k-- > 0;) {  // row-major: last index fastest
            if (++idx[k] < t.extent(k)) break;
            idx[k] = 0;
        }
    }
    return m;
}

// Oracle: naive summation for (t x_n M)(..., j, ...) = sum_i M(j,i) t(..., i, ...).
DenseTensor mode_product_oracle(const DenseTensor& t, const DenseMatrix& m,
                                std::size_t mode) {
    std::vector<std::size_t> out_shape(t.shape().begin(), t.shape().end());
    out_shape[mode] = m.rows();
    DenseTensor out(out_shape);

    std::vector<std::size_t> idx(out.order(), 0);
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        double acc = 0.0;
        std::vector<std::size_t> src(idx);
        for (std::size_t i = 0; i < t.extent(mode); ++i) {
            src[mode] = i;
            acc += m(idx[mode], i) * t.at(src);
        }
        out.at(idx) = acc;
        for (std::size_t k = out.order(); k-- > 0;) {
            if (++idx[k] < out.extent(k)) break;
            idx[k] = 0;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("row-major offsets: last index fastest") {
    DenseTensor t({2, 3, 4});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    CHECK(t.at({0, 0, 0}) == 0.0);
    CHECK(t.at({0, 0, 1}) == 1.0);
    CHECK(t.at({0, 1, 0}) == 4.0);
    CHECK(t.at({1, 0, 0}) == 12.0);
    CHECK(t.at({1, 2, 3}) == 23.0);
}

TEST_CASE("constructors reject bad shapes") {
    CHECK_THROWS_AS(DenseTensor({2, 0, 3}), Error);
    CHECK_THROWS_AS(DenseTensor(std::vector<std::size_t>{}), Error);
    CHECK_THROWS_AS(DenseTensor({2, 2}, std::vector<double>(3)), Error);
}

TEST_CASE("transpose and matmul against hand results") {
    DenseMatrix a(2, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
    DenseMatrix at = transpose(a);
    CHECK(at.rows() == 3);
    CHECK(at(2, 1) == 6.0);

    DenseMatrix p = matmul(a, at);  // [[14,32],[32,77]]
    CHECK(p(0, 0) == doctest::Approx(14.0));
    CHECK(p(0, 1) == doctest::Approx(32.0));
    CHECK(p(1, 1) == doctest::Approx(77.0));

    DenseMatrix wrong(2, 2);
    CHECK_THROWS_AS(matmul(a, wrong), Error);
}

TEST_CASE("mode unfold matches index-enumeration oracle") {
    const DenseTensor t = random_tensor({3, 4, 2, 5}, 7);
    for (std::size_t mode = 0; mode < 4; ++mode) {
        const DenseMatrix got = mode_unfold(t, mode);
        const DenseMatrix want = unfold_oracle(t, mode);
        REQUIRE(got.rows() == want.rows());
        REQUIRE(got.cols() == want.cols());
        for (std::size_t r = 0; r < got.rows(); ++r)
            for (std::size_t c = 0; c < got.cols(); ++c)
                CHECK(got(r, c) == doctest::Approx(want(r, c)).epsilon(1e-14));
    }
}

TEST_CASE("fold inverts unfold") {
    const DenseTensor t = random_tensor({2, 3, 4}, 11);
    for (std::size_t mode = 0; mode < 3; ++mode) {
        const DenseTensor back = mode_fold(mode_unfold(t, mode), mode, t.shape());
        for (std::size_t i = 0; i < t.size(); ++i)
            CHECK(back[i] == doctest::Approx(t[i]).epsilon(1e-15));
    }
}

TEST_CASE("mode product matches naive summation oracle") {
    const DenseTensor t = random_tensor({3, 4, 5}, 13);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t mode = 0; mode < 3; ++mode) {
        DenseMatrix m(2, t.extent(mode));
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
        const DenseTensor got = mode_product(t, m, mode);
        const DenseTensor want = mode_product_oracle(t, m, mode);
        REQUIRE(got.shape() == want.shape());
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("multilinear product composes single-mode products") {
    const DenseTensor t = random_tensor({3, 4, 2}, 19);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<DenseMatrix> ms;
    for (std::size_t mode = 0; mode < 3; ++mode) {
        DenseMatrix m(2, t.extent(mode));
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
        ms.push_back(m);
    }
    const DenseTensor got = multilinear_product(t, ms);
    DenseTensor want = t;
    for (std::size_t mode = 0; mode < 3; ++mode)
        want = mode_product_oracle(want, ms[mode], mode);
    REQUIRE(got.shape() == want.shape());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("frobenius norm") {
    DenseTensor t({2, 2}, {3.0, 4.0, 0.0, 0.0});
    CHECK(frobenius_norm(t) == doctest::Approx(5.0));
}

TEST_CASE("mode product validates dimensions") {
    const DenseTensor t = random_tensor({3, 4}, 29);
    DenseMatrix m(2, 5);
    CHECK_THROWS_AS(mode_product(t, m, 0), Error);
    CHECK_THROWS_AS(mode_product(t, m, 7), Error);
}
