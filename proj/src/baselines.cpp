// SPDX-License-Identifier: Apache-2.0
#include "tqt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tqt/conv.hpp"
#include "tqt/svd.hpp"

namespace tqt {

namespace {

void require_kernel4(const DenseTensor& w) {
    if (w.order() != 4)
        throw Error(ErrorCode::DimensionMismatch, "kernel must be order-4");
    if (w.extent(0) != w.extent(1))
        throw Error(ErrorCode::DimensionMismatch, "kernel must be square");
}

DenseMatrix scale_columns_sqrt(const DenseMatrix& u, const std::vector<double>& s) {
    DenseMatrix out = u;
    for (std::size_t j = 0; j < u.cols(); ++j) {
        const double f = std::sqrt(s[j]);
        for (std::size_t i = 0; i < u.rows(); ++i) out(i, j) *= f;
    }
    return out;
}

DenseMatrix scale_rows_sqrt(const std::vector<double>& s, const DenseMatrix& vt) {
    DenseMatrix out = vt;
    for (std::size_t i = 0; i < vt.rows(); ++i) {
        const double f = std::sqrt(s[i]);
        for (std::size_t j = 0; j < vt.cols(); ++j) out(i, j) *= f;
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- reshape SVD

SvdFactorPair reshape_svd_factorize(const DenseTensor& w, std::size_t r) {
    require_kernel4(w);
    const std::size_t d = w.extent(0), s = w.extent(2), s_hat = w.extent(3);
    // (D,D,S,Shat) flattens row-major to the D^2 S x Shat unfolding directly.
    DenseMatrix m(d * d * s, s_hat, w.values());
    SvdResult svd = truncated_svd(m, r);

    SvdFactorPair out;
    DenseMatrix w1 = scale_columns_sqrt(svd.u, svd.singular_values);
    out.w1 = DenseTensor({d, d, s, r}, w1.values());
    out.w2 = scale_rows_sqrt(svd.singular_values, transpose(svd.v));
    return out;
}

DenseTensor reconstruct(const SvdFactorPair& f) {
    const std::size_t d = f.w1.extent(0), s = f.w1.extent(2), r = f.w1.extent(3);
    DenseMatrix w1(d * d * s, r, f.w1.values());
    DenseMatrix m = matmul(w1, f.w2);
    return DenseTensor({d, d, s, f.w2.cols()}, m.values());
}

DenseTensor reshape_svd_apply(const DenseTensor& x, const SvdFactorPair& f,
                              std::size_t stride, std::size_t pad) {
    DenseTensor y = conv2d_direct(x, f.w1, stride, pad);
    DenseTensor k2({1, 1, f.w2.rows(), f.w2.cols()}, f.w2.values());
    return conv2d_general(y, k2, 1, 1, 0, 0);
}

// ---------------------------------------------------------------- spatial SVD

SpatialSvdPair spatial_svd_factorize(const DenseTensor& w, std::size_t r) {
    require_kernel4(w);
    const std::size_t d = w.extent(0), s = w.extent(2), s_hat = w.extent(3);
    // Rows pair (s, i_vert), columns pair (s_hat, i_horz).
    DenseMatrix m(d * s, d * s_hat);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t c = 0; c < s; ++c)
                for (std::size_t f = 0; f < s_hat; ++f)
                    m(c * d + i, f * d + j) =
                        w.at(std::array<std::size_t, 4>{i, j, c, f});
    SvdResult svd = truncated_svd(m, r);

    SpatialSvdPair out;
    DenseMatrix w1 = scale_columns_sqrt(svd.u, svd.singular_values);
    out.w_vert = DenseTensor({s, d, r}, w1.values());
    DenseMatrix w2 = scale_rows_sqrt(svd.singular_values, transpose(svd.v));
    out.w_horz = DenseTensor({r, s_hat, d}, w2.values());
    return out;
}

DenseTensor reconstruct(const SpatialSvdPair& f) {
    const std::size_t s = f.w_vert.extent(0), d = f.w_vert.extent(1);
    const std::size_t r = f.w_vert.extent(2), s_hat = f.w_horz.extent(1);
    DenseTensor w({d, d, s, s_hat});
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t c = 0; c < s; ++c)
                for (std::size_t fo = 0; fo < s_hat; ++fo) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < r; ++k)
                        acc += f.w_vert.at(std::array<std::size_t, 3>{c, i, k}) *
                               f.w_horz.at(std::array<std::size_t, 3>{k, fo, j});
                    w.at(std::array<std::size_t, 4>{i, j, c, fo}) = acc;
                }
    return w;
}

DenseTensor spatial_svd_apply(const DenseTensor& x, const SpatialSvdPair& f,
                              std::size_t stride, std::size_t pad) {
    const std::size_t s = f.w_vert.extent(0), d = f.w_vert.extent(1);
    const std::size_t r = f.w_vert.extent(2), s_hat = f.w_horz.extent(1);

    // Vertical D x 1 stage takes the vertical stride and padding.
    DenseTensor k1({d, 1, s, r});
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t c = 0; c < s; ++c)
            for (std::size_t k = 0; k < r; ++k)
                k1.at(std::array<std::size_t, 4>{i, 0, c, k}) =
                    f.w_vert.at(std::array<std::size_t, 3>{c, i, k});
    DenseTensor y1 = conv2d_general(x, k1, stride, 1, pad, 0);

    DenseTensor k2({1, d, r, s_hat});
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < r; ++k)
            for (std::size_t fo = 0; fo < s_hat; ++fo)
                k2.at(std::array<std::size_t, 4>{0, j, k, fo}) =
                    f.w_horz.at(std::array<std::size_t, 3>{k, fo, j});
    return conv2d_general(y1, k2, 1, stride, 0, pad);
}

// --------------------------------------------------------------- tensor train

TTFactors tt_factorize(const DenseTensor& w, const std::array<std::size_t, 3>& ranks) {
    require_kernel4(w);
    const std::size_t d = w.extent(0), s = w.extent(2), s_hat = w.extent(3);

    // Reorder (D,D,S,Shat) -> (S,D,D,Shat).
    DenseTensor t({s, d, d, s_hat});
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t c = 0; c < s; ++c)
                for (std::size_t f = 0; f < s_hat; ++f)
                    t.at(std::array<std::size_t, 4>{c, i, j, f}) =
                        w.at(std::array<std::size_t, 4>{i, j, c, f});

    const auto [r1, r2, r3] = ranks;
    if (r1 < 1 || r1 > std::min(s, d * d * s_hat) || r2 < 1 ||
        r2 > std::min(r1 * d, d * s_hat) || r3 < 1 || r3 > std::min(r2 * d, s_hat))
        throw Error(ErrorCode::RankOutOfRange, "TT ranks out of range");

    TTFactors out;
    // TT-SVD: successive truncated SVDs of the left unfoldings.
    DenseMatrix m1(s, d * d * s_hat, t.values());
    SvdResult svd1 = truncated_svd(m1, r1);
    out.g1 = svd1.u;
    DenseMatrix rest;
    {
        DenseMatrix sv = transpose(svd1.v);  // r1 x (d*d*s_hat)
        for (std::size_t i = 0; i < r1; ++i)
            for (std::size_t j = 0; j < sv.cols(); ++j)
                sv(i, j) *= svd1.singular_values[i];
        rest = std::move(sv);
    }

    DenseMatrix m2(r1 * d, d * s_hat, rest.values());
    SvdResult svd2 = truncated_svd(m2, r2);
    out.g2 = DenseTensor({r1, d, r2}, svd2.u.values());
    {
        DenseMatrix sv = transpose(svd2.v);  // r2 x (d*s_hat)
        for (std::size_t i = 0; i < r2; ++i)
            for (std::size_t j = 0; j < sv.cols(); ++j)
                sv(i, j) *= svd2.singular_values[i];
        rest = std::move(sv);
    }

    DenseMatrix m3(r2 * d, s_hat, rest.values());
    SvdResult svd3 = truncated_svd(m3, r3);
    out.g3 = DenseTensor({r2, d, r3}, svd3.u.values());
    DenseMatrix g4 = transpose(svd3.v);  // r3 x s_hat
    for (std::size_t i = 0; i < r3; ++i)
        for (std::size_t j = 0; j < s_hat; ++j)
            g4(i, j) *= svd3.singular_values[i];
    out.g4 = std::move(g4);
    return out;
}

DenseTensor reconstruct(const TTFactors& f) {
    const std::size_t s = f.g1.rows(), r1 = f.g1.cols();
    const std::size_t d = f.g2.extent(1), r2 = f.g2.extent(2);
    const std::size_t r3 = f.g3.extent(2), s_hat = f.g4.cols();

    DenseMatrix a = matmul(f.g1, DenseMatrix(r1, d * r2, f.g2.values()));  // s x (d r2)
    DenseMatrix b = matmul(DenseMatrix(s * d, r2, a.values()),
                           DenseMatrix(r2, d * r3, f.g3.values()));  // (s d) x (d r3)
    DenseMatrix c = matmul(DenseMatrix(s * d * d, r3, b.values()), f.g4);

    DenseTensor t({s, d, d, s_hat}, c.values());
    DenseTensor w({d, d, s, s_hat});
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t ch = 0; ch < s; ++ch)
                for (std::size_t fo = 0; fo < s_hat; ++fo)
                    w.at(std::array<std::size_t, 4>{i, j, ch, fo}) =
                        t.at(std::array<std::size_t, 4>{ch, i, j, fo});
    return w;
}

DenseTensor tt_apply(const DenseTensor& x, const TTFactors& f, std::size_t stride,
                     std::size_t pad) {
    const std::size_t s = f.g1.rows(), r1 = f.g1.cols();
    const std::size_t d = f.g2.extent(1), r2 = f.g2.extent(2);
    const std::size_t r3 = f.g3.extent(2), s_hat = f.g4.cols();

    DenseTensor k1({1, 1, s, r1}, f.g1.values());
    DenseTensor y = conv2d_general(x, k1, 1, 1, 0, 0);

    DenseTensor k2({d, 1, r1, r2});
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t a = 0; a < r1; ++a)
            for (std::size_t b = 0; b < r2; ++b)
                k2.at(std::array<std::size_t, 4>{i, 0, a, b}) =
                    f.g2.at(std::array<std::size_t, 3>{a, i, b});
    y = conv2d_general(y, k2, stride, 1, pad, 0);

    DenseTensor k3({1, d, r2, r3});
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t a = 0; a < r2; ++a)
            for (std::size_t b = 0; b < r3; ++b)
                k3.at(std::array<std::size_t, 4>{0, j, a, b}) =
                    f.g3.at(std::array<std::size_t, 3>{a, j, b});
    y = conv2d_general(y, k3, 1, stride, 0, pad);

    DenseTensor k4({1, 1, r3, s_hat}, f.g4.values());
    return conv2d_general(y, k4, 1, 1, 0, 0);
}

// -------------------------------------------------------- lasso channel prune

namespace {

std::vector<double> design_apply(const std::vector<std::vector<double>>& cols,
                                 const std::vector<double>& beta) {
    std::vector<double> out(cols.front().size(), 0.0);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (beta[i] == 0.0) continue;
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += beta[i] * cols[i][k];
    }
    return out;
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

struct IstaOutcome {
    std::vector<double> beta;
    double objective = 0.0;
    bool converged = false;
};

IstaOutcome ista_solve(const std::vector<std::vector<double>>& cols,
                       const std::vector<double>& y, double lambda, double lipschitz,
                       int max_iters, double tol) {
    const std::size_t n_ch = cols.size();
    IstaOutcome out;
    out.beta.assign(n_ch, 0.0);

    auto objective = [&](const std::vector<double>& beta) {
        std::vector<double> pred = design_apply(cols, beta);
        double fit = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double r = y[k] - pred[k];
            fit += r * r;
        }
        double l1 = 0.0;
        for (double b : beta) l1 += std::abs(b);
        return fit + lambda * l1;
    };

    double prev = objective(out.beta);
    out.objective = prev;
    const double step = 1.0 / lipschitz;
    for (int it = 0; it < max_iters; ++it) {
        std::vector<double> pred = design_apply(cols, out.beta);
        for (std::size_t i = 0; i < n_ch; ++i) {
            double grad = 0.0;
            for (std::size_t k = 0; k < y.size(); ++k)
                grad += 2.0 * cols[i][k] * (pred[k] - y[k]);
            // gradient taken at the sweep start: this is the plain ISTA step
            out.beta[i] = soft_threshold(out.beta[i] - step * grad, lambda * step);
        }
        const double obj = objective(out.beta);
        out.objective = obj;
        if (std::abs(prev - obj) < tol * std::max(1.0, std::abs(prev))) {
            out.converged = true;
            break;
        }
        prev = obj;
    }
    return out;
}

// Least squares on the kept columns via the SVD pseudo-inverse.
std::vector<double> least_squares(const std::vector<std::vector<double>>& cols,
                                  const std::vector<std::size_t>& kept,
                                  const std::vector<double>& y) {
    const std::size_t m = y.size(), k = kept.size();
    DenseMatrix a(m, k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < m; ++i) a(i, j) = cols[kept[j]][i];
    SvdResult svd = truncated_svd(a, k);
    std::vector<double> coeff(k, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        if (svd.singular_values[r] <= 1e-12 * svd.singular_values[0]) continue;
        double uty = 0.0;
        for (std::size_t i = 0; i < m; ++i) uty += svd.u(i, r) * y[i];
        const double c = uty / svd.singular_values[r];
        for (std::size_t j = 0; j < k; ++j) coeff[j] += c * svd.v(j, r);
    }
    return coeff;
}

}  // namespace

ChannelSelection channel_prune_lasso(const DenseTensor& x_samples, const DenseTensor& w,
                                     const DenseMatrix& y, std::size_t budget,
                                     double lambda, int max_iters, double tol) {
    require_kernel4(w);
    if (x_samples.order() != 3)
        throw Error(ErrorCode::DimensionMismatch, "samples must be (n, S, d^2)");
    const std::size_t n = x_samples.extent(0);
    const std::size_t s = x_samples.extent(1);
    const std::size_t dd = x_samples.extent(2);
    const std::size_t d = w.extent(0), s_hat = w.extent(3);
    if (s != w.extent(2) || dd != d * d)
        throw Error(ErrorCode::DimensionMismatch, "samples inconsistent with kernel");
    if (y.rows() != n || y.cols() != s_hat)
        throw Error(ErrorCode::DimensionMismatch, "response inconsistent with samples");
    if (budget < 1 || budget > s)
        throw Error(ErrorCode::InvalidArgument, "channel budget must be in [1, S]");

    // Channel matrices W_i (Shat x d^2), normalized; norms fold into beta.
    std::vector<DenseMatrix> w_ch(s, DenseMatrix(s_hat, dd));
    std::vector<double> w_norm(s, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t c = 0; c < s; ++c)
                for (std::size_t f = 0; f < s_hat; ++f) {
                    const double v = w.at(std::array<std::size_t, 4>{i, j, c, f});
                    w_ch[c](f, i * d + j) = v;
                    w_norm[c] += v * v;
                }
    for (std::size_t c = 0; c < s; ++c) {
        w_norm[c] = std::sqrt(w_norm[c]);
        if (w_norm[c] > 0.0)
            for (double& v : w_ch[c].values()) v /= w_norm[c];
    }

    // Design columns a_i = vec(X_i W_i^T), length n*Shat.
    std::vector<std::vector<double>> cols(s, std::vector<double>(n * s_hat, 0.0));
    for (std::size_t c = 0; c < s; ++c) {
        for (std::size_t smp = 0; smp < n; ++smp)
            for (std::size_t f = 0; f < s_hat; ++f) {
                double acc = 0.0;
                for (std::size_t k = 0; k < dd; ++k)
                    acc += x_samples.at(std::array<std::size_t, 3>{smp, c, k}) *
                           w_ch[c](f, k);
                cols[c][smp * s_hat + f] = acc;
            }
    }
    std::vector<double> yv(n * s_hat);
    for (std::size_t smp = 0; smp < n; ++smp)
        for (std::size_t f = 0; f < s_hat; ++f) yv[smp * s_hat + f] = y(smp, f);

    // Lipschitz constant of the smooth part: 2 sigma_max(A)^2.
    DenseMatrix a_full(n * s_hat, s);
    for (std::size_t c = 0; c < s; ++c)
        for (std::size_t k = 0; k < n * s_hat; ++k) a_full(k, c) = cols[c][k];
    const double sigma_max = truncated_svd(a_full, 1).singular_values[0];
    const double lipschitz = std::max(2.0 * sigma_max * sigma_max, 1e-12);

    auto support_size = [](const std::vector<double>& beta) {
        std::size_t c = 0;
        for (double b : beta)
            if (b != 0.0) ++c;
        return c;
    };

    IstaOutcome solved;
    double lambda_used = 0.0;
    if (lambda >= 0.0 && budget >= s) {
        solved = ista_solve(cols, yv, lambda, lipschitz, max_iters, tol);
        lambda_used = lambda;
    } else {
        double lo = std::max(lambda, 0.0);
        // beta = 0 is optimal at lambda >= 2 ||A^T y||_inf
        double hi = 0.0;
        for (std::size_t c = 0; c < s; ++c) {
            double dot = 0.0;
            for (std::size_t k = 0; k < yv.size(); ++k) dot += cols[c][k] * yv[k];
            hi = std::max(hi, 2.0 * std::abs(dot));
        }
        solved = ista_solve(cols, yv, lo, lipschitz, max_iters, tol);
        lambda_used = lo;
        if (support_size(solved.beta) > budget) {
            for (int it = 0; it < 50; ++it) {
                const double mid = 0.5 * (lo + hi);
                IstaOutcome trial = ista_solve(cols, yv, mid, lipschitz, max_iters, tol);
                if (support_size(trial.beta) <= budget) {
                    hi = mid;
                    solved = std::move(trial);
                    lambda_used = mid;
                } else {
                    lo = mid;
                }
                if (hi - lo < 1e-10 * std::max(1.0, hi)) break;
            }
        }
    }

    ChannelSelection sel;
    sel.lambda = lambda_used;
    sel.converged = solved.converged;
    sel.beta.assign(s, 0.0);

    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < s; ++c)
        if (solved.beta[c] != 0.0) kept.push_back(c);
    if (kept.size() > budget) {
        // bisection landed between supports; keep the largest coefficients
        std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(solved.beta[a]) > std::abs(solved.beta[b]);
        });
        kept.resize(budget);
        std::sort(kept.begin(), kept.end());
    }

    sel.refit_w = DenseTensor(w.shape());
    if (!kept.empty()) {
        const std::vector<double> coeff = least_squares(cols, kept, yv);
        double resid = 0.0;
        std::vector<double> beta_full(s, 0.0);
        for (std::size_t j = 0; j < kept.size(); ++j) beta_full[kept[j]] = coeff[j];
        std::vector<double> pred = design_apply(cols, beta_full);
        for (std::size_t k = 0; k < yv.size(); ++k) {
            const double r = yv[k] - pred[k];
            resid += r * r;
        }
        sel.objective = resid;
        sel.beta = beta_full;
        for (std::size_t j = 0; j < kept.size(); ++j) {
            const std::size_t c = kept[j];
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t jj = 0; jj < d; ++jj)
                    for (std::size_t f = 0; f < s_hat; ++f)
                        sel.refit_w.at(std::array<std::size_t, 4>{i, jj, c, f}) =
                            coeff[j] * w_ch[c](f, i * d + jj);
        }
    } else {
        double resid = 0.0;
        for (double v : yv) resid += v * v;
        sel.objective = resid;
    }
    sel.kept = std::move(kept);
    return sel;
}

std::uint64_t baseline_param_count(BaselineMethod method, std::size_t d, std::size_t s,
                                   std::size_t s_hat,
                                   const std::vector<std::size_t>& ranks) {
    const std::uint64_t dd = static_cast<std::uint64_t>(d) * d;
    switch (method) {
        case BaselineMethod::ReshapeSvd:
            if (ranks.size() != 1)
                throw Error(ErrorCode::InvalidArgument, "reshape-svd takes one rank");
            return dd * s * ranks[0] + static_cast<std::uint64_t>(ranks[0]) * s_hat;
        case BaselineMethod::SpatialSvd:
            if (ranks.size() != 1)
                throw Error(ErrorCode::InvalidArgument, "spatial-svd takes one rank");
            return static_cast<std::uint64_t>(d) * s * ranks[0] +
                   static_cast<std::uint64_t>(d) * s_hat * ranks[0];
        case BaselineMethod::TensorTrain:
            if (ranks.size() != 3)
                throw Error(ErrorCode::InvalidArgument, "tensor-train takes three ranks");
            return static_cast<std::uint64_t>(s) * ranks[0] +
                   static_cast<std::uint64_t>(ranks[0]) * d * ranks[1] +
                   static_cast<std::uint64_t>(ranks[1]) * d * ranks[2] +
                   static_cast<std::uint64_t>(ranks[2]) * s_hat;
        case BaselineMethod::ChannelPrune:
            if (ranks.size() != 1)
                throw Error(ErrorCode::InvalidArgument, "channel-prune takes a budget");
            return dd * ranks[0] * s_hat;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown baseline method");
}

}  // namespace tqt
