#pragma once

#include <string>
#include <vector>

#include "rrank/harness/dataset.hpp"
#include "rrank/harness/train.hpp"
#include "rrank/metrics/metrics.hpp"
#include "rrank/ranker/params.hpp"

namespace rrank {

struct EvalOutput {
    std::vector<RankedRun> runs;  // one per role in dataset order
    MetricReport report;
};

// Scores every (query, doc, role) triple with the checkpoint (expected grade
// under the predicted distribution), builds one run per role and computes the
// full metric report. `mode` selects the mmoe or classifier-only head.
EvalOutput evaluate(const MmoeParams& params, const std::string& mode, const Dataset& data,
                    const std::vector<int>& ns);

struct AblationRow {
    AblationMode mode = AblationMode::Full;
    MetricReport report;
    std::vector<LossBreakdown> loss_curve;
    std::string data_hash;  // identical across the four rows by construction
};

// Runs Full, wo-l, wo-n and wo-nl with identical data and seed.
std::vector<AblationRow> ablate(const Dataset& data, const TrainConfig& base,
                                const std::vector<int>& ns);

std::string ablation_to_csv(const std::vector<AblationRow>& rows, const std::vector<int>& ns);
std::string ablation_to_json(const std::vector<AblationRow>& rows, const std::vector<int>& ns);

struct SweepRow {
    double alpha = 0.0;
    double ndcg10 = 0.0;  // mean over roles
    double map = 0.0;     // mean over roles
    double vndcg10 = 0.0;
    double vnap = 0.0;
};

// One full train+evaluate per alpha, identical data and seed throughout.
std::vector<SweepRow> sweep_alpha(const Dataset& data, const TrainConfig& base,
                                  const std::vector<double>& alphas);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string sweep_to_json(const std::vector<SweepRow>& rows);

// Content hash of a dataset (embeddings + qrels), for provenance blocks.
std::string dataset_hash(const Dataset& data);

}  // namespace rrank
