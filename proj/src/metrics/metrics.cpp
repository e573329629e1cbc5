#include "rrank/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "rrank/errors.hpp"

namespace rrank {

namespace {

using ordered_json = nlohmann::ordered_json;

double gain(int grade) { return std::pow(2.0, grade) - 1.0; }
double discount(int rank_one_based) { return 1.0 / std::log2(static_cast<double>(rank_one_based) + 1.0); }

void require_same_qids(const std::vector<RankedRun>& runs) {
    if (runs.size() < 2) {
        throw DataError("robustness metrics require at least 2 runs");
    }
    const auto ref = runs.front().qids();
    for (std::size_t k = 1; k < runs.size(); ++k) {
        if (runs[k].qids() != ref) {
            throw DataError("runs do not cover identical qid sets ('" + runs[k].tag + "' differs)");
        }
    }
}

double population_variance(const std::vector<double>& xs) {
    // Exactly zero when every value is identical, so "zero iff all equal"
    // holds without rounding residue from the mean division.
    bool all_equal = true;
    for (double x : xs) all_equal = all_equal && x == xs.front();
    if (all_equal) return 0.0;
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return var / n;
}

}  // namespace

double ndcg_at_n(const std::vector<std::string>& ranking, const Qrels& qrels,
                 const std::string& qid, int n) {
    if (n < 1) {
        throw DataError("ndcg_at_n requires N >= 1");
    }
    const auto& judged = qrels.for_qid(qid);  // throws on unknown qid

    double dcg = 0.0;
    const int depth = std::min<int>(n, static_cast<int>(ranking.size()));
    for (int i = 0; i < depth; ++i) {
        auto it = judged.find(ranking[static_cast<std::size_t>(i)]);
        const int grade = it == judged.end() ? 0 : it->second;
        dcg += gain(grade) * discount(i + 1);
    }

    std::vector<int> grades;
    grades.reserve(judged.size());
    for (const auto& [docid, grade] : judged) grades.push_back(grade);
    std::sort(grades.begin(), grades.end(), std::greater<int>());
    double idcg = 0.0;
    const int ideal_depth = std::min<int>(n, static_cast<int>(grades.size()));
    for (int i = 0; i < ideal_depth; ++i) {
        idcg += gain(grades[static_cast<std::size_t>(i)]) * discount(i + 1);
    }

    return idcg == 0.0 ? 0.0 : dcg / idcg;
}

double average_precision(const std::vector<std::string>& ranking, const Qrels& qrels,
                         const std::string& qid) {
    const auto& judged = qrels.for_qid(qid);
    int total_relevant = 0;
    for (const auto& [docid, grade] : judged) {
        if (grade >= 1) ++total_relevant;
    }
    if (total_relevant == 0) return 0.0;

    double sum_precision = 0.0;
    int hits = 0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        auto it = judged.find(ranking[i]);
        if (it != judged.end() && it->second >= 1) {
            ++hits;
            sum_precision += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum_precision / static_cast<double>(total_relevant);
}

namespace {
std::vector<std::string> doc_order(const std::vector<ScoredDoc>& docs) {
    std::vector<std::string> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(d.docid);
    return out;
}
}  // namespace

double mean_ndcg_at_n(const RankedRun& run, const Qrels& qrels, int n) {
    if (run.by_qid.empty()) {
        throw DataError("empty run '" + run.tag + "'");
    }
    double sum = 0.0;
    for (const auto& [qid, docs] : run.by_qid) {
        sum += ndcg_at_n(doc_order(docs), qrels, qid, n);
    }
    return sum / static_cast<double>(run.by_qid.size());
}

double mean_average_precision(const RankedRun& run, const Qrels& qrels) {
    if (run.by_qid.empty()) {
        throw DataError("empty run '" + run.tag + "'");
    }
    double sum = 0.0;
    for (const auto& [qid, docs] : run.by_qid) {
        sum += average_precision(doc_order(docs), qrels, qid);
    }
    return sum / static_cast<double>(run.by_qid.size());
}

double vndcg_from_run_means(const std::vector<double>& run_level_ndcg) {
    if (run_level_ndcg.size() < 2) {
        throw DataError("vndcg needs at least 2 run-level values");
    }
    return population_variance(run_level_ndcg);
}

double vndcg_at_n(const std::vector<RankedRun>& runs, const Qrels& qrels, int n) {
    require_same_qids(runs);
    std::vector<double> per_run;
    per_run.reserve(runs.size());
    for (const auto& run : runs) {
        per_run.push_back(mean_ndcg_at_n(run, qrels, n));
    }
    return vndcg_from_run_means(per_run);
}

NapResult nap_and_vnap(const std::vector<RankedRun>& runs, const Qrels& qrels) {
    require_same_qids(runs);
    NapResult out;
    double var_sum = 0.0;
    std::size_t included = 0;
    for (const auto& qid : runs.front().qids()) {
        NapRow row;
        row.qid = qid;
        double mean_ap = 0.0;
        for (const auto& run : runs) {
            const double ap = average_precision(doc_order(run.by_qid.at(qid)), qrels, qid);
            row.ap.push_back(ap);
            mean_ap += ap;
        }
        mean_ap /= static_cast<double>(runs.size());
        if (mean_ap > 0.0) {
            row.included = true;
            for (double ap : row.ap) row.nap.push_back(ap / mean_ap);
            row.variance = population_variance(row.nap);
            var_sum += row.variance;
            ++included;
        }
        out.per_query.push_back(std::move(row));
    }
    if (included == 0) {
        throw DataError("every query has zero mean AP; VNAP undefined");
    }
    out.vnap = var_sum / static_cast<double>(included);
    return out;
}

MetricReport metric_report(const std::vector<RankedRun>& runs, const Qrels& qrels,
                           const std::vector<int>& ns) {
    MetricReport report;
    for (const auto& run : runs) {
        RunMetrics m;
        m.tag = run.tag;
        m.role = run.role;
        for (int n : ns) m.ndcg[n] = mean_ndcg_at_n(run, qrels, n);
        m.map = mean_average_precision(run, qrels);
        report.runs.push_back(std::move(m));
    }
    for (int n : ns) {
        report.vndcg[n] = vndcg_at_n(runs, qrels, n);
    }
    auto nap = nap_and_vnap(runs, qrels);
    report.vnap = nap.vnap;
    report.per_query = std::move(nap.per_query);
    return report;
}

std::string report_to_json(const MetricReport& report) {
    ordered_json j;
    auto runs = ordered_json::array();
    for (const auto& r : report.runs) {
        ordered_json jr;
        jr["tag"] = r.tag;
        jr["role"] = role_name(r.role);
        ordered_json ndcg;
        for (const auto& [n, v] : r.ndcg) ndcg[std::to_string(n)] = v;
        jr["ndcg"] = std::move(ndcg);
        jr["map"] = r.map;
        runs.push_back(std::move(jr));
    }
    j["runs"] = std::move(runs);
    ordered_json vndcg;
    for (const auto& [n, v] : report.vndcg) vndcg[std::to_string(n)] = v;
    j["robustness"] = {{"vndcg", std::move(vndcg)}, {"vnap", report.vnap}};
    auto per_query = ordered_json::array();
    for (const auto& row : report.per_query) {
        ordered_json jq;
        jq["qid"] = row.qid;
        jq["ap"] = row.ap;
        jq["included"] = row.included;
        if (row.included) {
            jq["nap"] = row.nap;
            jq["nap_variance"] = row.variance;
        }
        per_query.push_back(std::move(jq));
    }
    j["per_query"] = std::move(per_query);
    return j.dump(2) + "\n";
}

MetricReport report_from_json(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("report parse error: ") + e.what());
    }
    MetricReport report;
    for (const auto& jr : j.at("runs")) {
        RunMetrics m;
        m.tag = jr.at("tag").get<std::string>();
        m.role = role_from_name(jr.at("role").get<std::string>());
        for (const auto& [key, value] : jr.at("ndcg").items()) {
            m.ndcg[std::stoi(key)] = value.get<double>();
        }
        m.map = jr.at("map").get<double>();
        report.runs.push_back(std::move(m));
    }
    for (const auto& [key, value] : j.at("robustness").at("vndcg").items()) {
        report.vndcg[std::stoi(key)] = value.get<double>();
    }
    report.vnap = j.at("robustness").at("vnap").get<double>();
    for (const auto& jq : j.at("per_query")) {
        NapRow row;
        row.qid = jq.at("qid").get<std::string>();
        row.ap = jq.at("ap").get<std::vector<double>>();
        row.included = jq.at("included").get<bool>();
        if (row.included) {
            row.nap = jq.at("nap").get<std::vector<double>>();
            row.variance = jq.at("nap_variance").get<double>();
        }
        report.per_query.push_back(std::move(row));
    }
    return report;
}

std::string report_to_text(const MetricReport& report) {
    std::ostringstream out;
    char buf[64];
    out << "run metrics\n";
    for (const auto& r : report.runs) {
        out << "  " << r.tag << " (" << role_name(r.role) << ")";
        for (const auto& [n, v] : r.ndcg) {
            std::snprintf(buf, sizeof(buf), "  ndcg@%d=%.4f", n, v);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "  map=%.4f", r.map);
        out << buf << "\n";
    }
    out << "robustness (lower is better)\n";
    for (const auto& [n, v] : report.vndcg) {
        std::snprintf(buf, sizeof(buf), "  vndcg@%-3d %.4g  (%.4f e-5)\n", n, v, v * 1e5);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "  vnap      %.4f\n", report.vnap);
    out << buf;
    return out.str();
}

}  // namespace rrank
