#include "rrank/harness/evaluate.hpp"

#include <json.hpp>

#include "rrank/core/io.hpp"
#include "rrank/errors.hpp"
#include "rrank/hash.hpp"
#include "rrank/ranker/forward.hpp"

namespace rrank {

namespace {
using ordered_json = nlohmann::ordered_json;
}

EvalOutput evaluate(const MmoeParams& params, const std::string& mode, const Dataset& data,
                    const std::vector<int>& ns) {
    if (params.dims.d != data.dim()) {
        throw DataError("checkpoint dimension d=" + std::to_string(params.dims.d) +
                        " does not match data dimension " + std::to_string(data.dim()));
    }
    if (params.dims.l != data.num_levels()) {
        throw DataError("checkpoint levels L=" + std::to_string(params.dims.l) +
                        " does not match qrels levels " + std::to_string(data.num_levels()));
    }
    const bool use_mmoe = mode == "full" || mode == "wo-l";

    EvalOutput out;
    out.runs.resize(data.roles.size());
    for (std::size_t r = 0; r < data.roles.size(); ++r) {
        out.runs[r].role = data.roles[r];
        out.runs[r].tag = "rrank-" + role_name(data.roles[r]);
    }

    for (const auto& group : data.groups) {
        for (std::size_t r = 0; r < data.roles.size(); ++r) {
            const auto& emb = data.embeddings.items()[group.embedding_idx[r]];
            const ForwardTrace t = use_mmoe
                                       ? mmoe_forward(params, emb.vec, data.roles[r])
                                       : plain_forward(params.classifier, emb.vec, data.roles[r]);
            out.runs[r].by_qid[group.qid].push_back({group.docid, expected_grade(t.probs)});
        }
    }
    for (auto& run : out.runs) run.canonicalize();

    out.report = metric_report(out.runs, data.qrels, ns);
    return out;
}

std::vector<AblationRow> ablate(const Dataset& data, const TrainConfig& base,
                                const std::vector<int>& ns) {
    static const AblationMode kModes[] = {AblationMode::Full, AblationMode::NoRobustLoss,
                                          AblationMode::NoMmoe, AblationMode::Neither};
    const std::string hash = dataset_hash(data);
    std::vector<AblationRow> rows;
    for (AblationMode mode : kModes) {
        TrainConfig config = base;
        config.ablation_mode = mode;
        TrainResult trained = train(data, config);
        AblationRow row;
        row.mode = mode;
        row.loss_curve = std::move(trained.loss_curve);
        row.report = evaluate(trained.params, ablation_mode_name(mode), data, ns).report;
        row.data_hash = hash;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

double mean_over_runs_ndcg(const MetricReport& report, int n) {
    double sum = 0.0;
    for (const auto& run : report.runs) sum += run.ndcg.at(n);
    return sum / static_cast<double>(report.runs.size());
}

double mean_over_runs_map(const MetricReport& report) {
    double sum = 0.0;
    for (const auto& run : report.runs) sum += run.map;
    return sum / static_cast<double>(report.runs.size());
}

}  // namespace

std::string ablation_to_csv(const std::vector<AblationRow>& rows, const std::vector<int>& ns) {
    std::string out = "metric";
    for (const auto& row : rows) {
        out += ',';
        out += ablation_mode_name(row.mode);
    }
    out += '\n';
    for (int n : ns) {
        out += "ndcg@" + std::to_string(n);
        for (const auto& row : rows) {
            out += ',';
            out += format_double(mean_over_runs_ndcg(row.report, n));
        }
        out += '\n';
    }
    out += "map";
    for (const auto& row : rows) {
        out += ',';
        out += format_double(mean_over_runs_map(row.report));
    }
    out += '\n';
    for (int n : ns) {
        out += "vndcg@" + std::to_string(n) + "(e-5)";
        for (const auto& row : rows) {
            out += ',';
            out += format_double(row.report.vndcg.at(n) * 1e5);
        }
        out += '\n';
    }
    out += "vnap";
    for (const auto& row : rows) {
        out += ',';
        out += format_double(row.report.vnap);
    }
    out += '\n';
    return out;
}

std::string ablation_to_json(const std::vector<AblationRow>& rows, const std::vector<int>& ns) {
    ordered_json j = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json r;
        r["mode"] = ablation_mode_name(row.mode);
        ordered_json ndcg;
        for (int n : ns) ndcg[std::to_string(n)] = mean_over_runs_ndcg(row.report, n);
        r["ndcg"] = std::move(ndcg);
        r["map"] = mean_over_runs_map(row.report);
        ordered_json vndcg;
        for (int n : ns) vndcg[std::to_string(n)] = row.report.vndcg.at(n);
        r["vndcg"] = std::move(vndcg);
        r["vnap"] = row.report.vnap;
        r["data_hash"] = row.data_hash;
        j.push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

std::vector<SweepRow> sweep_alpha(const Dataset& data, const TrainConfig& base,
                                  const std::vector<double>& alphas) {
    if (alphas.empty()) {
        throw UsageError("sweep requires at least one alpha");
    }
    std::vector<SweepRow> rows;
    for (double alpha : alphas) {
        if (alpha < 0.0) {
            throw UsageError("alpha must be non-negative");
        }
        TrainConfig config = base;
        config.alpha = alpha;
        config.ablation_mode = alpha == 0.0 ? AblationMode::NoRobustLoss : AblationMode::Full;
        TrainResult trained = train(data, config);
        const auto report =
            evaluate(trained.params, ablation_mode_name(config.ablation_mode), data, {10}).report;
        SweepRow row;
        row.alpha = alpha;
        row.ndcg10 = mean_over_runs_ndcg(report, 10);
        row.map = mean_over_runs_map(report);
        row.vndcg10 = report.vndcg.at(10);
        row.vnap = report.vnap;
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "alpha,ndcg@10,map,vndcg@10,vnap\n";
    for (const auto& r : rows) {
        out += format_double(r.alpha);
        out += ',';
        out += format_double(r.ndcg10);
        out += ',';
        out += format_double(r.map);
        out += ',';
        out += format_double(r.vndcg10);
        out += ',';
        out += format_double(r.vnap);
        out += '\n';
    }
    return out;
}

std::string sweep_to_json(const std::vector<SweepRow>& rows) {
    ordered_json j = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json row;
        row["alpha"] = r.alpha;
        row["ndcg@10"] = r.ndcg10;
        row["map"] = r.map;
        row["vndcg@10"] = r.vndcg10;
        row["vnap"] = r.vnap;
        j.push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

std::string dataset_hash(const Dataset& data) {
    std::uint64_t h = fnv1a64(serialize_embeddings(data.embeddings));
    h = fnv1a64(serialize_qrels(data.qrels), h);
    return to_hex(h);
}

}  // namespace rrank
