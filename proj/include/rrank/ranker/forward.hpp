#pragma once

#include "rrank/ranker/params.hpp"

namespace rrank {

// Everything backward() needs, captured during one forward pass.
struct ForwardTrace {
    Role role = Role::Original;
    VecX input;          // e (d)
    VecX agent_pre;      // W_down e + b_down, agent adapter (b)
    VecX agent_hidden;   // relu(agent_pre) (b)
    VecX agent_out;      // v (d)
    VecX shared_pre;     // (b)
    VecX shared_hidden;  // (b)
    VecX shared_out;     // w (d)
    VecX gate_logits;    // (2)
    VecX gate;           // g, softmax (2)
    VecX fused;          // h = g0 v + g1 w (d)
    VecX logits;         // W_c h + b_c (L)
    VecX probs;          // y_hat, softmax (L)
};

// out = e + W_up relu(W_down e + b_down) + b_up; throws DataError on a
// dimension mismatch.
VecX adapter_forward(const AdapterParams& a, const VecX& e);

// Full head for agent k: per-agent adapter, shared adapter, gate fusion,
// affine classifier, softmax.
ForwardTrace mmoe_forward(const MmoeParams& p, const VecX& e, Role k);

// Degenerate head used by the no-MMoE ablation: softmax(W_c e + b_c).
// The trace reuses the same struct with v = w = h = e and uniform gate.
ForwardTrace plain_forward(const ClassifierParams& c, const VecX& e, Role k);

// Ranking scalarization: expected grade sum_c c * probs[c]. Strictly
// increasing when probability mass moves to higher grades.
double expected_grade(const VecX& probs);

}  // namespace rrank
