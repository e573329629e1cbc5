#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "rrank/core/types.hpp"
#include "rrank/math.hpp"

namespace rrank {

// Bottleneck adapter: out = e + W_up * relu(W_down * e + b_down) + b_up.
struct AdapterParams {
    MatX w_down;  // b x d
    VecX b_down;  // b
    MatX w_up;    // d x b
    VecX b_up;    // d
};

// Per-role softmax gate over (individual, shared) experts.
struct GateParams {
    MatX w;  // 2 x d
};

struct ClassifierParams {
    MatX w;  // L x d
    VecX b;  // L
};

struct MmoeDims {
    int d = 0;  // embedding dimension
    int b = 0;  // adapter bottleneck
    int l = 0;  // relevance levels
};

// Every trainable tensor of the robust head.
struct MmoeParams {
    MmoeDims dims;
    std::uint64_t seed = 0;
    std::array<AdapterParams, kNumRoles> agent_adapters;
    AdapterParams shared_adapter;
    std::array<GateParams, kNumRoles> gates;
    ClassifierParams classifier;
};

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases,
// bit-deterministic per seed. Requires 2 <= b < d and L in {3,5}.
MmoeParams init_params(int d, int b, int l, std::uint64_t seed);

// Structure congruent to MmoeParams holding gradients; see backward().
struct MmoeGrads {
    std::array<AdapterParams, kNumRoles> agent_adapters;
    AdapterParams shared_adapter;
    std::array<GateParams, kNumRoles> gates;
    ClassifierParams classifier;
};

MmoeGrads zero_grads(const MmoeDims& dims);

// In-place p -= scale * g, over every tensor.
void axpy_params(MmoeParams& p, const MmoeGrads& g, double scale);
void axpy_grads(MmoeGrads& acc, const MmoeGrads& g, double scale);
void scale_grads(MmoeGrads& g, double scale);

// Checkpoint: self-describing JSON with dims, seed, mode and all tensors in
// row-major order. Loading validates dimensional consistency.
std::string serialize_params(const MmoeParams& p, const std::string& mode);
MmoeParams deserialize_params(const std::string& json_text, std::string* mode_out = nullptr);
void save_params(const MmoeParams& p, const std::string& mode, const std::string& path);
MmoeParams load_params(const std::string& path, std::string* mode_out = nullptr);

}  // namespace rrank
