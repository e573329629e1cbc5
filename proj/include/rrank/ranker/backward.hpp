#pragma once

#include <vector>

#include "rrank/ranker/forward.hpp"

namespace rrank {

// Analytic gradients of the composite head. `loss_grads[i]` is dL/d(probs)
// for traces[i]; the result accumulates over the batch. An agent-k example
// contributes only to gate k and adapter k, plus the shared adapter and the
// classifier.
MmoeGrads backward(const MmoeParams& p, const std::vector<ForwardTrace>& traces,
                   const std::vector<VecX>& loss_grads);

// Accumulating variant used by the training loop.
void backward_into(const MmoeParams& p, const ForwardTrace& trace, const VecX& loss_grad,
                   MmoeGrads& acc);

// Classifier-only backward for the no-MMoE ablation.
void plain_backward_into(const ClassifierParams& c, const ForwardTrace& trace,
                         const VecX& loss_grad, ClassifierParams& acc);

}  // namespace rrank
