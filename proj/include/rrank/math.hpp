#pragma once

#include <Eigen/Dense>

namespace rrank {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Numerically stable softmax, usable on any dense vector expression.
template <typename Derived>
VecX softmax(const Eigen::MatrixBase<Derived>& logits) {
    const VecX shifted = logits.derived().array() - logits.derived().maxCoeff();
    VecX e = shifted.array().exp();
    return e / e.sum();
}

template <typename Derived>
VecX relu(const Eigen::MatrixBase<Derived>& x) {
    return x.derived().cwiseMax(0.0);
}

// Backward through y = softmax(x): given dL/dy, returns dL/dx.
inline VecX softmax_backward(const VecX& y, const VecX& dy) {
    return y.array() * (dy.array() - y.dot(dy));
}

// Clamp a probability vector to [eps, 1-eps] and renormalize to the simplex.
// `mask` records which entries were left untouched by the clamp (1) versus
// pinned at a bound (0); `sum` is the pre-normalization total. Both are what
// the analytic gradient chain needs.
struct ClampedSimplex {
    VecX p;      // renormalized probabilities
    VecX mask;   // 1 where clamp inactive, 0 where pinned
    double sum;  // sum of clamped entries before renormalization
};

inline ClampedSimplex clamp_renormalize(const VecX& raw, double eps) {
    ClampedSimplex out;
    const Eigen::Index n = raw.size();
    VecX clamped(n);
    out.mask = VecX::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (raw[i] < eps) {
            clamped[i] = eps;
        } else if (raw[i] > 1.0 - eps) {
            clamped[i] = 1.0 - eps;
        } else {
            clamped[i] = raw[i];
            out.mask[i] = 1.0;
        }
    }
    out.sum = clamped.sum();
    out.p = clamped / out.sum;
    return out;
}

// Gradient w.r.t. the raw (pre-clamp) vector, given dL/d(renormalized p).
inline VecX clamp_renormalize_backward(const ClampedSimplex& cs, const VecX& dp) {
    const double inner = cs.p.dot(dp);
    return cs.mask.array() * (dp.array() - inner) / cs.sum;
}

}  // namespace rrank
