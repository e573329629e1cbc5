#include "rrank/ranker/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rrank/errors.hpp"
#include "rrank/rng.hpp"

namespace rrank {

namespace {

using ordered_json = nlohmann::ordered_json;

// Draw order is part of the checkpoint contract: row-major per matrix,
// agent adapters 0..4, shared adapter, gates 0..4, classifier.
MatX glorot(Rng& rng, int rows, int cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    MatX m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            m(r, c) = rng.uniform(-limit, limit);
        }
    }
    return m;
}

AdapterParams init_adapter(Rng& rng, int d, int b) {
    AdapterParams a;
    a.w_down = glorot(rng, b, d);
    a.b_down = VecX::Zero(b);
    a.w_up = glorot(rng, d, b);
    a.b_up = VecX::Zero(d);
    return a;
}

ordered_json matrix_to_json(const MatX& m) {
    auto rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json vector_to_json(const VecX& v) {
    auto arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

MatX matrix_from_json(const ordered_json& j, int rows, int cols, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows) {
        throw DataError("checkpoint: " + what + " must have " + std::to_string(rows) + " rows");
    }
    MatX m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != cols) {
            throw DataError("checkpoint: " + what + " row " + std::to_string(r) + " must have " +
                            std::to_string(cols) + " columns");
        }
        for (int c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

VecX vector_from_json(const ordered_json& j, int n, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw DataError("checkpoint: " + what + " must have " + std::to_string(n) + " entries");
    }
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

ordered_json adapter_to_json(const AdapterParams& a) {
    ordered_json j;
    j["w_down"] = matrix_to_json(a.w_down);
    j["b_down"] = vector_to_json(a.b_down);
    j["w_up"] = matrix_to_json(a.w_up);
    j["b_up"] = vector_to_json(a.b_up);
    return j;
}

AdapterParams adapter_from_json(const ordered_json& j, int d, int b, const std::string& what) {
    AdapterParams a;
    a.w_down = matrix_from_json(j.at("w_down"), b, d, what + ".w_down");
    a.b_down = vector_from_json(j.at("b_down"), b, what + ".b_down");
    a.w_up = matrix_from_json(j.at("w_up"), d, b, what + ".w_up");
    a.b_up = vector_from_json(j.at("b_up"), d, what + ".b_up");
    return a;
}

}  // namespace

MmoeParams init_params(int d, int b, int l, std::uint64_t seed) {
    if (b < 2 || b >= d) {
        throw DataError("init_params requires 2 <= b < d, got b=" + std::to_string(b) +
                        " d=" + std::to_string(d));
    }
    if (l != 3 && l != 5) {
        throw DataError("init_params requires L in {3,5}, got " + std::to_string(l));
    }
    MmoeParams p;
    p.dims = {d, b, l};
    p.seed = seed;
    Rng rng(mix64(seed, 0x706172616d73ULL));
    for (auto& adapter : p.agent_adapters) adapter = init_adapter(rng, d, b);
    p.shared_adapter = init_adapter(rng, d, b);
    for (auto& gate : p.gates) gate.w = glorot(rng, 2, d);
    p.classifier.w = glorot(rng, l, d);
    p.classifier.b = VecX::Zero(l);
    return p;
}

MmoeGrads zero_grads(const MmoeDims& dims) {
    MmoeGrads g;
    auto zero_adapter = [&] {
        AdapterParams a;
        a.w_down = MatX::Zero(dims.b, dims.d);
        a.b_down = VecX::Zero(dims.b);
        a.w_up = MatX::Zero(dims.d, dims.b);
        a.b_up = VecX::Zero(dims.d);
        return a;
    };
    for (auto& adapter : g.agent_adapters) adapter = zero_adapter();
    g.shared_adapter = zero_adapter();
    for (auto& gate : g.gates) gate.w = MatX::Zero(2, dims.d);
    g.classifier.w = MatX::Zero(dims.l, dims.d);
    g.classifier.b = VecX::Zero(dims.l);
    return g;
}

namespace {
void axpy_adapter(AdapterParams& p, const AdapterParams& g, double scale) {
    p.w_down += scale * g.w_down;
    p.b_down += scale * g.b_down;
    p.w_up += scale * g.w_up;
    p.b_up += scale * g.b_up;
}
}  // namespace

void axpy_params(MmoeParams& p, const MmoeGrads& g, double scale) {
    for (int k = 0; k < kNumRoles; ++k) {
        axpy_adapter(p.agent_adapters[k], g.agent_adapters[k], scale);
        p.gates[k].w += scale * g.gates[k].w;
    }
    axpy_adapter(p.shared_adapter, g.shared_adapter, scale);
    p.classifier.w += scale * g.classifier.w;
    p.classifier.b += scale * g.classifier.b;
}

void axpy_grads(MmoeGrads& acc, const MmoeGrads& g, double scale) {
    for (int k = 0; k < kNumRoles; ++k) {
        axpy_adapter(acc.agent_adapters[k], g.agent_adapters[k], scale);
        acc.gates[k].w += scale * g.gates[k].w;
    }
    axpy_adapter(acc.shared_adapter, g.shared_adapter, scale);
    acc.classifier.w += scale * g.classifier.w;
    acc.classifier.b += scale * g.classifier.b;
}

void scale_grads(MmoeGrads& g, double scale) {
    for (int k = 0; k < kNumRoles; ++k) {
        g.agent_adapters[k].w_down *= scale;
        g.agent_adapters[k].b_down *= scale;
        g.agent_adapters[k].w_up *= scale;
        g.agent_adapters[k].b_up *= scale;
        g.gates[k].w *= scale;
    }
    g.shared_adapter.w_down *= scale;
    g.shared_adapter.b_down *= scale;
    g.shared_adapter.w_up *= scale;
    g.shared_adapter.b_up *= scale;
    g.classifier.w *= scale;
    g.classifier.b *= scale;
}

std::string serialize_params(const MmoeParams& p, const std::string& mode) {
    ordered_json j;
    j["format"] = "rrank-checkpoint";
    j["version"] = 1;
    j["dims"] = {{"d", p.dims.d}, {"b", p.dims.b}, {"l", p.dims.l}};
    j["seed"] = p.seed;
    j["mode"] = mode;
    auto agents = ordered_json::array();
    for (const auto& a : p.agent_adapters) agents.push_back(adapter_to_json(a));
    j["agent_adapters"] = std::move(agents);
    j["shared_adapter"] = adapter_to_json(p.shared_adapter);
    auto gates = ordered_json::array();
    for (const auto& g : p.gates) gates.push_back(matrix_to_json(g.w));
    j["gates"] = std::move(gates);
    j["classifier"] = {{"w", matrix_to_json(p.classifier.w)}, {"b", vector_to_json(p.classifier.b)}};
    return j.dump() + "\n";
}

MmoeParams deserialize_params(const std::string& json_text, std::string* mode_out) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint parse error: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "rrank-checkpoint") {
            throw DataError("not an rrank checkpoint");
        }
        MmoeParams p;
        p.dims.d = j.at("dims").at("d").get<int>();
        p.dims.b = j.at("dims").at("b").get<int>();
        p.dims.l = j.at("dims").at("l").get<int>();
        if (p.dims.d < 2 || p.dims.b < 1 || (p.dims.l != 3 && p.dims.l != 5)) {
            throw DataError("checkpoint dims out of range");
        }
        p.seed = j.at("seed").get<std::uint64_t>();
        if (mode_out) *mode_out = j.at("mode").get<std::string>();
        const auto& agents = j.at("agent_adapters");
        if (static_cast<int>(agents.size()) != kNumRoles) {
            throw DataError("checkpoint must carry 5 agent adapters");
        }
        for (int k = 0; k < kNumRoles; ++k) {
            p.agent_adapters[k] = adapter_from_json(agents[static_cast<std::size_t>(k)], p.dims.d,
                                                    p.dims.b, "agent_adapters[" + std::to_string(k) + "]");
        }
        p.shared_adapter = adapter_from_json(j.at("shared_adapter"), p.dims.d, p.dims.b, "shared_adapter");
        const auto& gates = j.at("gates");
        if (static_cast<int>(gates.size()) != kNumRoles) {
            throw DataError("checkpoint must carry 5 gates");
        }
        for (int k = 0; k < kNumRoles; ++k) {
            p.gates[k].w = matrix_from_json(gates[static_cast<std::size_t>(k)], 2, p.dims.d,
                                            "gates[" + std::to_string(k) + "]");
        }
        p.classifier.w = matrix_from_json(j.at("classifier").at("w"), p.dims.l, p.dims.d, "classifier.w");
        p.classifier.b = vector_from_json(j.at("classifier").at("b"), p.dims.l, "classifier.b");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint field error: ") + e.what());
    }
}

void save_params(const MmoeParams& p, const std::string& mode, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write checkpoint: " + path);
    }
    out << serialize_params(p, mode);
}

MmoeParams load_params(const std::string& path, std::string* mode_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open checkpoint: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_params(ss.str(), mode_out);
}

}  // namespace rrank
