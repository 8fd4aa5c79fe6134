// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "tqt/tensor.hpp"
#include "tqt/tucker.hpp"

namespace tqt {

struct KDConfig {
    double alpha = 0.5;   // in [0,1]
    double tau = 1.0;     // > 0
    double lambda = 0.0;  // >= 0
};

/// Cross-entropy terms average over samples; probabilities are clamped at
/// 1e-12 before the log. The hard-label term uses the unscaled (tau = 1)
/// student softmax.
double kd_loss(const DenseMatrix& teacher_logits, const DenseMatrix& student_logits,
               const std::vector<std::size_t>& true_labels, const KDConfig& cfg);

/// Analytic gradient of kd_loss with respect to the student logits.
DenseMatrix kd_loss_grad_student(const DenseMatrix& teacher_logits,
                                 const DenseMatrix& student_logits,
                                 const std::vector<std::size_t>& true_labels,
                                 const KDConfig& cfg);

struct LayerResidualSample {
    DenseTensor w;            // original kernel (D,D,S,Shat)
    PartialTucker2 w_approx;  // compressed kernel factors
    DenseTensor y;            // reference output feature map
    DenseTensor x_quant;      // quantized input feature map
    std::size_t stride = 1;
    std::size_t pad = 0;
};

/// sum_n ||W - W~||_F^2 + lambda ||sigma(Y) - sigma(W~ * X~)||_F^2 + kd_loss.
/// sigma defaults to ReLU; the factorized convolution path computes W~ * X~.
double joint_objective(const std::vector<LayerResidualSample>& layers,
                       const DenseMatrix& teacher_logits,
                       const DenseMatrix& student_logits,
                       const std::vector<std::size_t>& true_labels, const KDConfig& cfg,
                       const std::function<double(double)>& activation = nullptr);

}  // namespace tqt
