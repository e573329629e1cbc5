#pragma once

#include <vector>

#include "rrank/math.hpp"

namespace rrank {

struct LossConfig {
    double alpha = 10.0;                    // weight of the robustness term
    double epsilon = 1e-7;                  // probability clamp before logs
    bool include_original_in_robust = true; // does k=0 join the divergence pairs
    bool midpoint_js = false;               // true JS with mixture midpoint instead
                                            // of the symmetrized KL (off by default)
};

struct LossBreakdown {
    double acc = 0.0;
    double rbt = 0.0;
    double total = 0.0;  // acc + alpha * rbt
};

// Per-class binary cross-entropy against a one-hot label:
//   -sum_c [y_c log p_c + (1-y_c) log(1-p_c)], p clamped to [eps, 1-eps].
// grad (optional) receives dL/d(y_hat). Throws DataError unless y is one-hot.
double accuracy_loss(const VecX& y, const VecX& y_hat, double epsilon, VecX* grad = nullptr);

// KL(a||b) after clamping both to [eps, 1-eps] and renormalizing.
// grad_a / grad_b (optional) receive gradients w.r.t. the raw inputs.
double kl_div(const VecX& a, const VecX& b, double epsilon, VecX* grad_a = nullptr,
              VecX* grad_b = nullptr);

// Symmetrized KL: (KL(a||b) + KL(b||a)) / 2. Symmetric by construction.
double js_div(const VecX& a, const VecX& b, double epsilon, VecX* grad_a = nullptr,
              VecX* grad_b = nullptr);

// Bounded variant with mixture midpoint m = (a+b)/2; used when
// LossConfig::midpoint_js is set.
double js_div_midpoint(const VecX& a, const VecX& b, double epsilon, VecX* grad_a = nullptr,
                       VecX* grad_b = nullptr);

// Pairwise divergence over the K aligned predictions of one (query, doc)
// group, averaged over the K(K-1)/2 pairs. grads (optional) must have K
// entries and receives dL/d(pred_k). Throws DataError when K < 2.
double robust_loss(const std::vector<VecX>& preds, const LossConfig& config,
                   std::vector<VecX>* grads = nullptr);

// One (query, doc) group: aligned per-role predictions plus the shared label.
struct LossGroup {
    std::vector<VecX> preds;       // one per included role, role order fixed by caller
    std::vector<bool> is_original; // aligned with preds
    VecX label;                    // one-hot, length L
};

// Hybrid objective over a batch: acc averaged over all N*K pairs, rbt averaged
// over pairs-within-group and over the N groups, total = acc + alpha * rbt.
// grads (optional) is filled congruent to groups[i].preds[k].
LossBreakdown total_loss(const std::vector<LossGroup>& groups, const LossConfig& config,
                         std::vector<std::vector<VecX>>* grads = nullptr);

}  // namespace rrank
