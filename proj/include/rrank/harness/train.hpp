#pragma once

#include <string>
#include <vector>

#include "rrank/harness/dataset.hpp"
#include "rrank/loss/loss.hpp"
#include "rrank/ranker/params.hpp"

namespace rrank {

enum class AblationMode {
    Full,          // adapters + gates + robust loss
    NoRobustLoss,  // w/o-L: effective alpha forced to 0
    NoMmoe,        // w/o-N: classifier directly on the embedding
    Neither,       // w/o-N+L
};

std::string ablation_mode_name(AblationMode mode);
AblationMode ablation_mode_from_name(const std::string& name);

struct TrainConfig {
    int bottleneck = 8;
    double alpha = 10.0;
    double epsilon = 1e-7;
    bool include_original_in_robust = true;
    bool midpoint_js = false;
    double learning_rate = 0.05;
    double momentum = 0.0;
    int epochs = 30;
    int batch_size = 32;  // groups per batch
    std::uint64_t seed = 42;
    AblationMode ablation_mode = AblationMode::Full;

    bool uses_mmoe() const {
        return ablation_mode == AblationMode::Full || ablation_mode == AblationMode::NoRobustLoss;
    }
    double effective_alpha() const {
        return (ablation_mode == AblationMode::NoRobustLoss ||
                ablation_mode == AblationMode::Neither)
                   ? 0.0
                   : alpha;
    }
};

struct TrainResult {
    MmoeParams params;
    std::vector<LossBreakdown> loss_curve;  // one entry per epoch (batch means)
};

// Mini-batch gradient descent on the hybrid objective. Deterministic per
// (data, config): epoch shuffling uses a dedicated stream of the seed, and
// update order is fixed. Throws DataError with diagnostics when the loss
// leaves the finite range. The recorded rbt values are always computed, even
// when the effective alpha is 0.
TrainResult train(const Dataset& data, const TrainConfig& config);

std::string serialize_loss_curve(const std::vector<LossBreakdown>& curve);

}  // namespace rrank
