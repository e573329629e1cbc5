#include "rrank/ranker/backward.hpp"

#include "rrank/errors.hpp"

namespace rrank {

namespace {

// Adapter chain: out = e + W_up relu(a) + b_up, a = W_down e + b_down.
void adapter_backward_into(const AdapterParams& params, const VecX& input, const VecX& pre,
                           const VecX& hidden, const VecX& d_out, AdapterParams& acc) {
    acc.b_up += d_out;
    acc.w_up += d_out * hidden.transpose();
    VecX d_hidden = params.w_up.transpose() * d_out;
    VecX d_pre = (pre.array() > 0.0).select(d_hidden, 0.0);
    acc.b_down += d_pre;
    acc.w_down += d_pre * input.transpose();
}

}  // namespace

void backward_into(const MmoeParams& p, const ForwardTrace& t, const VecX& loss_grad,
                   MmoeGrads& acc) {
    if (loss_grad.size() != p.dims.l) {
        throw DataError("backward: loss gradient dimension mismatch");
    }
    const auto ki = static_cast<std::size_t>(role_index(t.role));

    // softmax classifier
    const VecX d_logits = softmax_backward(t.probs, loss_grad);
    acc.classifier.w += d_logits * t.fused.transpose();
    acc.classifier.b += d_logits;
    const VecX d_fused = p.classifier.w.transpose() * d_logits;

    // fusion h = g0 v + g1 w
    VecX d_gate(2);
    d_gate[0] = t.agent_out.dot(d_fused);
    d_gate[1] = t.shared_out.dot(d_fused);
    const VecX d_agent_out = t.gate[0] * d_fused;
    const VecX d_shared_out = t.gate[1] * d_fused;

    // gate softmax over W^k e
    const VecX d_gate_logits = softmax_backward(t.gate, d_gate);
    acc.gates[ki].w += d_gate_logits * t.input.transpose();

    adapter_backward_into(p.agent_adapters[ki], t.input, t.agent_pre, t.agent_hidden, d_agent_out,
                          acc.agent_adapters[ki]);
    adapter_backward_into(p.shared_adapter, t.input, t.shared_pre, t.shared_hidden, d_shared_out,
                          acc.shared_adapter);
}

MmoeGrads backward(const MmoeParams& p, const std::vector<ForwardTrace>& traces,
                   const std::vector<VecX>& loss_grads) {
    if (traces.size() != loss_grads.size()) {
        throw DataError("backward: traces and loss_grads must align");
    }
    MmoeGrads acc = zero_grads(p.dims);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        backward_into(p, traces[i], loss_grads[i], acc);
    }
    return acc;
}

void plain_backward_into(const ClassifierParams& c, const ForwardTrace& t, const VecX& loss_grad,
                         ClassifierParams& acc) {
    const VecX d_logits = softmax_backward(t.probs, loss_grad);
    acc.w += d_logits * t.input.transpose();
    acc.b += d_logits;
    (void)c;
}

}  // namespace rrank
