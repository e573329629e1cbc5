#pragma once

#include <map>
#include <string>
#include <vector>

#include "rrank/core/types.hpp"

namespace rrank {

// NDCG@N with gain 2^grade - 1 and discount 1/log2(rank+1); ideal ranking
// taken over all judged documents of the qid. Returns 0 when the ideal DCG is
// zero. Throws DataError when the qid has no judgments at all.
double ndcg_at_n(const std::vector<std::string>& ranking, const Qrels& qrels,
                 const std::string& qid, int n);

// Average precision, binarized at grade >= 1; 0 when the qid has no relevant
// documents. Throws DataError on an unknown qid.
double average_precision(const std::vector<std::string>& ranking, const Qrels& qrels,
                         const std::string& qid);

// Mean over the run's qids.
double mean_ndcg_at_n(const RankedRun& run, const Qrels& qrels, int n);
double mean_average_precision(const RankedRun& run, const Qrels& qrels);

// VNDCG aggregation core: population variance (divide by K) of K run-level
// mean NDCG@N values. Exposed so externally computed run means can be
// cross-checked through the same code path.
double vndcg_from_run_means(const std::vector<double>& run_level_ndcg);

// Population variance of the K run-level mean NDCG@N values. All runs must
// cover identical qid sets; K >= 2.
double vndcg_at_n(const std::vector<RankedRun>& runs, const Qrels& qrels, int n);

struct NapRow {
    std::string qid;
    std::vector<double> ap;   // one per run
    std::vector<double> nap;  // empty when the query was excluded (mean AP = 0)
    double variance = 0.0;    // population variance of nap across runs
    bool included = false;
};

struct NapResult {
    std::vector<NapRow> per_query;
    double vnap = 0.0;  // mean per-query NAP variance over included queries
};

// NAP_k(q) = AP_k(q) / mean_k AP_k(q); queries with zero mean AP excluded;
// VNAP = mean over included queries of the population variance of NAP across
// the K runs. Throws DataError when every query is excluded.
NapResult nap_and_vnap(const std::vector<RankedRun>& runs, const Qrels& qrels);

struct RunMetrics {
    std::string tag;
    Role role = Role::Original;
    std::map<int, double> ndcg;  // N -> mean NDCG@N
    double map = 0.0;
};

struct MetricReport {
    std::vector<RunMetrics> runs;
    std::map<int, double> vndcg;  // N -> VNDCG@N
    double vnap = 0.0;
    std::vector<NapRow> per_query;
};

// Full effectiveness + robustness report over K aligned runs.
MetricReport metric_report(const std::vector<RankedRun>& runs, const Qrels& qrels,
                           const std::vector<int>& ns);

std::string report_to_json(const MetricReport& report);
MetricReport report_from_json(const std::string& json_text);
// Human-readable table; VNDCG rows carry an e-5 scale column.
std::string report_to_text(const MetricReport& report);

}  // namespace rrank
