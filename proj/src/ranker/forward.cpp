#include "rrank/ranker/forward.hpp"

#include "rrank/errors.hpp"

namespace rrank {

VecX adapter_forward(const AdapterParams& a, const VecX& e) {
    if (a.w_down.cols() != e.size() || a.w_up.rows() != e.size()) {
        throw DataError("adapter_forward: dimension mismatch (d=" + std::to_string(e.size()) +
                        ", w_down " + std::to_string(a.w_down.rows()) + "x" +
                        std::to_string(a.w_down.cols()) + ")");
    }
    return e + a.w_up * relu(a.w_down * e + a.b_down) + a.b_up;
}

ForwardTrace mmoe_forward(const MmoeParams& p, const VecX& e, Role k) {
    if (e.size() != p.dims.d) {
        throw DataError("mmoe_forward: input dimension " + std::to_string(e.size()) +
                        " != d=" + std::to_string(p.dims.d));
    }
    const int ki = role_index(k);
    ForwardTrace t;
    t.role = k;
    t.input = e;

    const AdapterParams& agent = p.agent_adapters[static_cast<std::size_t>(ki)];
    t.agent_pre = agent.w_down * e + agent.b_down;
    t.agent_hidden = relu(t.agent_pre);
    t.agent_out = e + agent.w_up * t.agent_hidden + agent.b_up;

    t.shared_pre = p.shared_adapter.w_down * e + p.shared_adapter.b_down;
    t.shared_hidden = relu(t.shared_pre);
    t.shared_out = e + p.shared_adapter.w_up * t.shared_hidden + p.shared_adapter.b_up;

    t.gate_logits = p.gates[static_cast<std::size_t>(ki)].w * e;
    t.gate = softmax(t.gate_logits);
    t.fused = t.gate[0] * t.agent_out + t.gate[1] * t.shared_out;

    t.logits = p.classifier.w * t.fused + p.classifier.b;
    t.probs = softmax(t.logits);
    return t;
}

ForwardTrace plain_forward(const ClassifierParams& c, const VecX& e, Role k) {
    if (c.w.cols() != e.size()) {
        throw DataError("plain_forward: input dimension " + std::to_string(e.size()) +
                        " != d=" + std::to_string(c.w.cols()));
    }
    ForwardTrace t;
    t.role = k;
    t.input = e;
    t.agent_out = e;
    t.shared_out = e;
    t.gate_logits = VecX::Zero(2);
    t.gate = VecX::Constant(2, 0.5);
    t.fused = e;
    t.logits = c.w * e + c.b;
    t.probs = softmax(t.logits);
    return t;
}

double expected_grade(const VecX& probs) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < probs.size(); ++c) {
        s += static_cast<double>(c) * probs[c];
    }
    return s;
}

}  // namespace rrank
