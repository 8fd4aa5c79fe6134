// SPDX-License-Identifier: Apache-2.0
#include "tqt/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "tqt/conv.hpp"

namespace tqt {

namespace {

constexpr double kProbFloor = 1e-12;

void check_cfg(const KDConfig& cfg) {
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
        throw Error(ErrorCode::InvalidArgument, "alpha must be in [0, 1]");
    if (cfg.tau <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
    if (cfg.lambda < 0.0)
        throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
}

void check_logits(const DenseMatrix& teacher, const DenseMatrix& student,
                  const std::vector<std::size_t>& labels) {
    if (teacher.rows() != student.rows() || teacher.cols() != student.cols())
        throw Error(ErrorCode::DimensionMismatch, "logit matrices must match");
    if (labels.size() != student.rows())
        throw Error(ErrorCode::DimensionMismatch, "one label per sample required");
    for (std::size_t lbl : labels)
        if (lbl >= student.cols())
            throw Error(ErrorCode::InvalidArgument, "label out of class range");
}

// Row-wise softmax of logits/tau.
DenseMatrix softmax(const DenseMatrix& logits, double tau) {
    DenseMatrix p(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        double mx = logits(i, 0);
        for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            p(i, j) = std::exp((logits(i, j) - mx) / tau);
            z += p(i, j);
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) p(i, j) /= z;
    }
    return p;
}

// H(p, q) = -sum p log q, averaged over samples, q clamped away from zero.
double cross_entropy(const DenseMatrix& p, const DenseMatrix& q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j)
            acc -= p(i, j) * std::log(std::max(q(i, j), kProbFloor));
    return acc / static_cast<double>(p.rows());
}

double label_cross_entropy(const DenseMatrix& q, const std::vector<std::size_t>& labels) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.rows(); ++i)
        acc -= std::log(std::max(q(i, labels[i]), kProbFloor));
    return acc / static_cast<double>(q.rows());
}

}  // namespace

double kd_loss(const DenseMatrix& teacher_logits, const DenseMatrix& student_logits,
               const std::vector<std::size_t>& true_labels, const KDConfig& cfg) {
    check_cfg(cfg);
    check_logits(teacher_logits, student_logits, true_labels);

    double loss = 0.0;
    if (cfg.alpha > 0.0) {
        const DenseMatrix qt = softmax(teacher_logits, cfg.tau);
        const DenseMatrix qs = softmax(student_logits, cfg.tau);
        loss += cfg.alpha * cfg.tau * cfg.tau * cross_entropy(qt, qs);
    }
    if (cfg.alpha < 1.0) {
        const DenseMatrix qs1 = softmax(student_logits, 1.0);
        loss += (1.0 - cfg.alpha) * label_cross_entropy(qs1, true_labels);
    }
    return loss;
}

DenseMatrix kd_loss_grad_student(const DenseMatrix& teacher_logits,
                                 const DenseMatrix& student_logits,
                                 const std::vector<std::size_t>& true_labels,
                                 const KDConfig& cfg) {
    check_cfg(cfg);
    check_logits(teacher_logits, student_logits, true_labels);

    const double inv_n = 1.0 / static_cast<double>(student_logits.rows());
    DenseMatrix grad(student_logits.rows(), student_logits.cols());

    if (cfg.alpha > 0.0) {
        const DenseMatrix qt = softmax(teacher_logits, cfg.tau);
        const DenseMatrix qs = softmax(student_logits, cfg.tau);
        // d/dz [tau^2 H(qt, softmax(z/tau))] = tau (qs - qt)
        for (std::size_t i = 0; i < grad.rows(); ++i)
            for (std::size_t j = 0; j < grad.cols(); ++j)
                grad(i, j) += cfg.alpha * cfg.tau * (qs(i, j) - qt(i, j)) * inv_n;
    }
    if (cfg.alpha < 1.0) {
        const DenseMatrix qs1 = softmax(student_logits, 1.0);
        for (std::size_t i = 0; i < grad.rows(); ++i)
            for (std::size_t j = 0; j < grad.cols(); ++j) {
                const double y = true_labels[i] == j ? 1.0 : 0.0;
                grad(i, j) += (1.0 - cfg.alpha) * (qs1(i, j) - y) * inv_n;
            }
    }
    return grad;
}

double joint_objective(const std::vector<LayerResidualSample>& layers,
                       const DenseMatrix& teacher_logits,
                       const DenseMatrix& student_logits,
                       const std::vector<std::size_t>& true_labels, const KDConfig& cfg,
                       const std::function<double(double)>& activation) {
    check_cfg(cfg);
    std::function<double(double)> sigma = activation;
    if (!sigma) sigma = [](double x) { return x > 0.0 ? x : 0.0; };

    double total = 0.0;
    for (const LayerResidualSample& layer : layers) {
        const DenseTensor w_approx = reconstruct(layer.w_approx);
        if (w_approx.shape() != layer.w.shape())
            throw Error(ErrorCode::DimensionMismatch,
                        "approximation shape differs from the kernel");
        double w_err = 0.0;
        for (std::size_t i = 0; i < layer.w.size(); ++i) {
            const double r = layer.w[i] - w_approx[i];
            w_err += r * r;
        }
        total += w_err;

        if (cfg.lambda > 0.0) {
            const DenseTensor y_approx =
                conv2d_tucker(layer.x_quant, layer.w_approx, layer.stride, layer.pad);
            if (y_approx.shape() != layer.y.shape())
                throw Error(ErrorCode::DimensionMismatch,
                            "activation residual shapes differ");
            double a_err = 0.0;
            for (std::size_t i = 0; i < layer.y.size(); ++i) {
                const double r = sigma(layer.y[i]) - sigma(y_approx[i]);
                a_err += r * r;
            }
            total += cfg.lambda * a_err;
        }
    }
    return total + kd_loss(teacher_logits, student_logits, true_labels, cfg);
}

}  // namespace tqt
