#include "rrank/harness/train.hpp"

#include <cmath>

#include "rrank/core/io.hpp"
#include "rrank/errors.hpp"
#include "rrank/ranker/backward.hpp"
#include "rrank/ranker/forward.hpp"
#include "rrank/rng.hpp"

namespace rrank {

namespace {
constexpr std::uint64_t kStreamShuffle = 11;
}

std::string ablation_mode_name(AblationMode mode) {
    switch (mode) {
        case AblationMode::Full: return "full";
        case AblationMode::NoRobustLoss: return "wo-l";
        case AblationMode::NoMmoe: return "wo-n";
        case AblationMode::Neither: return "wo-nl";
    }
    throw DataError("invalid ablation mode");
}

AblationMode ablation_mode_from_name(const std::string& name) {
    if (name == "full") return AblationMode::Full;
    if (name == "wo-l") return AblationMode::NoRobustLoss;
    if (name == "wo-n") return AblationMode::NoMmoe;
    if (name == "wo-nl") return AblationMode::Neither;
    throw UsageError("unknown ablation mode: '" + name + "' (full, wo-l, wo-n, wo-nl)");
}

TrainResult train(const Dataset& data, const TrainConfig& config) {
    if (config.learning_rate < 0.0) {
        throw UsageError("learning rate must be non-negative");
    }
    if (config.epochs < 1 || config.batch_size < 1) {
        throw UsageError("epochs and batch size must be at least 1");
    }
    if (data.groups.empty()) {
        throw DataError("training data has no (query, doc) groups");
    }

    const int d = data.dim();
    const int l = data.num_levels();
    const double alpha = config.effective_alpha();
    const bool use_mmoe = config.uses_mmoe();

    LossConfig loss_config;
    loss_config.alpha = alpha;
    loss_config.epsilon = config.epsilon;
    loss_config.include_original_in_robust = config.include_original_in_robust;
    loss_config.midpoint_js = config.midpoint_js;

    TrainResult result;
    result.params = init_params(d, config.bottleneck, l, config.seed);

    std::vector<std::size_t> order(data.groups.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    MmoeGrads velocity = zero_grads(result.params.dims);
    const bool use_momentum = config.momentum > 0.0;

    std::vector<ForwardTrace> traces;
    std::vector<LossGroup> loss_groups;
    std::vector<std::vector<VecX>> loss_grads;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(mix64(config.seed, kStreamShuffle, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }

        LossBreakdown epoch_sum;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            traces.clear();
            loss_groups.clear();

            for (std::size_t gi = start; gi < end; ++gi) {
                const PairGroup& group = data.groups[order[gi]];
                LossGroup lg;
                lg.label = VecX::Zero(l);
                lg.label[group.grade] = 1.0;
                for (std::size_t r = 0; r < data.roles.size(); ++r) {
                    const auto& emb = data.embeddings.items()[group.embedding_idx[r]];
                    ForwardTrace t = use_mmoe
                                         ? mmoe_forward(result.params, emb.vec, data.roles[r])
                                         : plain_forward(result.params.classifier, emb.vec,
                                                         data.roles[r]);
                    lg.preds.push_back(t.probs);
                    lg.is_original.push_back(data.roles[r] == Role::Original);
                    traces.push_back(std::move(t));
                }
                loss_groups.push_back(std::move(lg));
            }

            const LossBreakdown batch = total_loss(loss_groups, loss_config, &loss_grads);
            if (!std::isfinite(batch.total)) {
                throw DataError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                                " (acc=" + std::to_string(batch.acc) +
                                ", rbt=" + std::to_string(batch.rbt) +
                                "); lower the learning rate or alpha");
            }
            const double weight = static_cast<double>(end - start) /
                                  static_cast<double>(order.size());
            epoch_sum.acc += batch.acc * weight;
            epoch_sum.rbt += batch.rbt * weight;
            epoch_sum.total += batch.total * weight;

            MmoeGrads grads = zero_grads(result.params.dims);
            std::size_t trace_idx = 0;
            for (std::size_t g = 0; g < loss_groups.size(); ++g) {
                for (std::size_t r = 0; r < loss_grads[g].size(); ++r, ++trace_idx) {
                    if (use_mmoe) {
                        backward_into(result.params, traces[trace_idx], loss_grads[g][r], grads);
                    } else {
                        plain_backward_into(result.params.classifier, traces[trace_idx],
                                            loss_grads[g][r], grads.classifier);
                    }
                }
            }

            if (use_momentum) {
                scale_grads(velocity, config.momentum);
                axpy_grads(velocity, grads, 1.0);
                axpy_params(result.params, velocity, -config.learning_rate);
            } else {
                axpy_params(result.params, grads, -config.learning_rate);
            }
        }
        result.loss_curve.push_back(epoch_sum);
    }
    return result;
}

std::string serialize_loss_curve(const std::vector<LossBreakdown>& curve) {
    std::string out = "epoch,acc,rbt,total\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += format_double(curve[i].acc);
        out += ',';
        out += format_double(curve[i].rbt);
        out += ',';
        out += format_double(curve[i].total);
        out += '\n';
    }
    return out;
}

}  // namespace rrank
