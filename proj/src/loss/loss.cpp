#include "rrank/loss/loss.hpp"

#include <cmath>

#include "rrank/errors.hpp"

namespace rrank {

namespace {

void check_epsilon(double epsilon, Eigen::Index l) {
    if (!(epsilon > 0.0) || epsilon >= 1.0 / static_cast<double>(l)) {
        throw DataError("epsilon must satisfy 0 < eps < 1/L");
    }
}

double clamp01(double v, double eps) {
    if (v < eps) return eps;
    if (v > 1.0 - eps) return 1.0 - eps;
    return v;
}

}  // namespace

double accuracy_loss(const VecX& y, const VecX& y_hat, double epsilon, VecX* grad) {
    if (y.size() != y_hat.size()) {
        throw DataError("accuracy_loss: label/prediction dimension mismatch");
    }
    check_epsilon(epsilon, y.size());
    int ones = 0;
    for (Eigen::Index c = 0; c < y.size(); ++c) {
        if (y[c] == 1.0) {
            ++ones;
        } else if (y[c] != 0.0) {
            throw DataError("accuracy_loss: label is not one-hot");
        }
    }
    if (ones != 1) {
        throw DataError("accuracy_loss: label is not one-hot");
    }

    double loss = 0.0;
    if (grad) grad->setZero(y.size());
    for (Eigen::Index c = 0; c < y.size(); ++c) {
        const double p = clamp01(y_hat[c], epsilon);
        loss -= y[c] * std::log(p) + (1.0 - y[c]) * std::log(1.0 - p);
        if (grad) {
            const bool active = y_hat[c] > epsilon && y_hat[c] < 1.0 - epsilon;
            (*grad)[c] = active ? (-y[c] / p + (1.0 - y[c]) / (1.0 - p)) : 0.0;
        }
    }
    return loss;
}

double kl_div(const VecX& a, const VecX& b, double epsilon, VecX* grad_a, VecX* grad_b) {
    if (a.size() != b.size()) {
        throw DataError("kl_div: dimension mismatch");
    }
    check_epsilon(epsilon, a.size());
    const ClampedSimplex ca = clamp_renormalize(a, epsilon);
    const ClampedSimplex cb = clamp_renormalize(b, epsilon);
    double kl = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        kl += ca.p[i] * std::log(ca.p[i] / cb.p[i]);
    }
    if (grad_a) {
        VecX d(a.size());
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            d[i] = std::log(ca.p[i] / cb.p[i]) + 1.0;
        }
        *grad_a = clamp_renormalize_backward(ca, d);
    }
    if (grad_b) {
        VecX d(a.size());
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            d[i] = -ca.p[i] / cb.p[i];
        }
        *grad_b = clamp_renormalize_backward(cb, d);
    }
    return kl;
}

double js_div(const VecX& a, const VecX& b, double epsilon, VecX* grad_a, VecX* grad_b) {
    VecX ga_fwd, gb_fwd, ga_rev, gb_rev;
    const double kl_ab = kl_div(a, b, epsilon, grad_a ? &ga_fwd : nullptr, grad_b ? &gb_fwd : nullptr);
    const double kl_ba = kl_div(b, a, epsilon, grad_b ? &ga_rev : nullptr, grad_a ? &gb_rev : nullptr);
    if (grad_a) *grad_a = 0.5 * ga_fwd + 0.5 * gb_rev;
    if (grad_b) *grad_b = 0.5 * gb_fwd + 0.5 * ga_rev;
    return 0.5 * kl_ab + 0.5 * kl_ba;
}

double js_div_midpoint(const VecX& a, const VecX& b, double epsilon, VecX* grad_a, VecX* grad_b) {
    if (a.size() != b.size()) {
        throw DataError("js_div_midpoint: dimension mismatch");
    }
    check_epsilon(epsilon, a.size());
    const ClampedSimplex ca = clamp_renormalize(a, epsilon);
    const ClampedSimplex cb = clamp_renormalize(b, epsilon);
    double js = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double m = 0.5 * (ca.p[i] + cb.p[i]);
        js += 0.5 * ca.p[i] * std::log(ca.p[i] / m) + 0.5 * cb.p[i] * std::log(cb.p[i] / m);
    }
    // d/d(p_a_i) reduces to log(p_a_i / m_i) / 2; the +1/2 and midpoint terms cancel.
    if (grad_a) {
        VecX d(a.size());
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            d[i] = 0.5 * std::log(ca.p[i] / (0.5 * (ca.p[i] + cb.p[i])));
        }
        *grad_a = clamp_renormalize_backward(ca, d);
    }
    if (grad_b) {
        VecX d(a.size());
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            d[i] = 0.5 * std::log(cb.p[i] / (0.5 * (ca.p[i] + cb.p[i])));
        }
        *grad_b = clamp_renormalize_backward(cb, d);
    }
    return js;
}

double robust_loss(const std::vector<VecX>& preds, const LossConfig& config,
                   std::vector<VecX>* grads) {
    const std::size_t k = preds.size();
    if (k < 2) {
        throw DataError("robust_loss requires at least 2 aligned predictions, got " +
                        std::to_string(k));
    }
    const double pair_count = static_cast<double>(k * (k - 1) / 2);
    if (grads) {
        grads->assign(k, VecX());
        for (std::size_t i = 0; i < k; ++i) (*grads)[i] = VecX::Zero(preds[i].size());
    }
    auto div = config.midpoint_js ? js_div_midpoint : js_div;
    double sum = 0.0;
    for (std::size_t m = 0; m + 1 < k; ++m) {
        for (std::size_t n = m + 1; n < k; ++n) {
            VecX gm, gn;
            sum += div(preds[m], preds[n], config.epsilon, grads ? &gm : nullptr,
                       grads ? &gn : nullptr);
            if (grads) {
                (*grads)[m] += gm / pair_count;
                (*grads)[n] += gn / pair_count;
            }
        }
    }
    return sum / pair_count;
}

LossBreakdown total_loss(const std::vector<LossGroup>& groups, const LossConfig& config,
                         std::vector<std::vector<VecX>>* grads) {
    if (groups.empty()) {
        throw DataError("total_loss: empty batch");
    }
    const std::size_t preds_per_group = groups[0].preds.size();
    std::size_t total_preds = 0;
    for (const auto& g : groups) {
        if (g.preds.size() != preds_per_group || g.preds.empty()) {
            throw DataError("total_loss: group missing a role prediction");
        }
        if (g.is_original.size() != g.preds.size()) {
            throw DataError("total_loss: is_original flags misaligned");
        }
        total_preds += g.preds.size();
    }
    if (grads) {
        grads->assign(groups.size(), {});
        for (std::size_t i = 0; i < groups.size(); ++i) {
            (*grads)[i].assign(groups[i].preds.size(), VecX());
            for (std::size_t j = 0; j < groups[i].preds.size(); ++j) {
                (*grads)[i][j] = VecX::Zero(groups[i].preds[j].size());
            }
        }
    }

    const double n_groups = static_cast<double>(groups.size());
    const double acc_norm = 1.0 / static_cast<double>(total_preds);
    double acc = 0.0;
    double rbt = 0.0;

    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& g = groups[i];
        for (std::size_t j = 0; j < g.preds.size(); ++j) {
            VecX ga;
            acc += acc_norm * accuracy_loss(g.label, g.preds[j], config.epsilon,
                                            grads ? &ga : nullptr);
            if (grads) (*grads)[i][j] += acc_norm * ga;
        }

        std::vector<VecX> robust_preds;
        std::vector<std::size_t> robust_slots;
        for (std::size_t j = 0; j < g.preds.size(); ++j) {
            if (g.is_original[j] && !config.include_original_in_robust) continue;
            robust_preds.push_back(g.preds[j]);
            robust_slots.push_back(j);
        }
        std::vector<VecX> rg;
        rbt += robust_loss(robust_preds, config, grads ? &rg : nullptr) / n_groups;
        if (grads) {
            for (std::size_t s = 0; s < robust_slots.size(); ++s) {
                (*grads)[i][robust_slots[s]] += (config.alpha / n_groups) * rg[s];
            }
        }
    }

    LossBreakdown out;
    out.acc = acc;
    out.rbt = rbt;
    out.total = acc + config.alpha * rbt;
    return out;
}

}  // namespace rrank
