#include "rrank/core/types.hpp"

#include <algorithm>

#include "rrank/errors.hpp"

namespace rrank {

std::string role_name(Role r) {
    switch (r) {
        case Role::Original: return "original";
        case Role::Woman: return "woman";
        case Role::Man: return "man";
        case Role::Student: return "student";
        case Role::Elder: return "elder";
    }
    throw DataError("invalid role value");
}

std::string role_noun(Role r) {
    switch (r) {
        case Role::Original: return "the original asker";
        case Role::Woman: return "a woman";
        case Role::Man: return "a man";
        case Role::Student: return "a student";
        case Role::Elder: return "an elder";
    }
    throw DataError("invalid role value");
}

Role role_from_name(const std::string& name) {
    for (Role r : kAllRoles) {
        if (role_name(r) == name) return r;
    }
    throw DataError("unknown role: '" + name + "'");
}

std::string rewrite_status_name(RewriteStatus s) {
    return s == RewriteStatus::Accepted ? "accepted" : "fallback_original";
}

RewriteStatus rewrite_status_from_name(const std::string& name) {
    if (name == "accepted") return RewriteStatus::Accepted;
    if (name == "fallback_original") return RewriteStatus::FallbackOriginal;
    throw DataError("unknown rewrite status: '" + name + "'");
}

namespace {
std::string trimmed(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}
}  // namespace

void QuerySet::add(Query q) {
    if (trimmed(q.text).empty()) {
        throw DataError("query '" + q.qid + "' has empty text");
    }
    auto key = std::make_pair(q.qid, role_index(q.role));
    if (index_.count(key)) {
        throw DataError("duplicate query (" + q.qid + ", " + role_name(q.role) + ")");
    }
    index_[key] = items_.size();
    items_.push_back(std::move(q));
}

Qrels::Qrels(int num_levels) : num_levels_(num_levels) {
    if (num_levels != 3 && num_levels != 5) {
        throw DataError("qrels num_levels must be 3 or 5, got " + std::to_string(num_levels));
    }
}

bool Qrels::set(const std::string& qid, const std::string& docid, int grade) {
    if (grade < 0 || grade >= num_levels_) {
        throw DataError("grade " + std::to_string(grade) + " out of range [0, " +
                        std::to_string(num_levels_ - 1) + "] for (" + qid + ", " + docid + ")");
    }
    auto& per_qid = grades_[qid];
    const bool overwrote = per_qid.count(docid) > 0;
    per_qid[docid] = grade;
    return overwrote;
}

int Qrels::grade(const std::string& qid, const std::string& docid) const {
    auto it = grades_.find(qid);
    if (it == grades_.end()) {
        throw DataError("unknown qid in qrels: '" + qid + "'");
    }
    auto jt = it->second.find(docid);
    return jt == it->second.end() ? 0 : jt->second;
}

bool Qrels::has_qid(const std::string& qid) const { return grades_.count(qid) > 0; }

const std::map<std::string, int>& Qrels::for_qid(const std::string& qid) const {
    auto it = grades_.find(qid);
    if (it == grades_.end()) {
        throw DataError("unknown qid in qrels: '" + qid + "'");
    }
    return it->second;
}

std::size_t Qrels::size() const {
    std::size_t n = 0;
    for (const auto& [qid, docs] : grades_) n += docs.size();
    return n;
}

void EmbeddingSet::add(PairEmbedding e) {
    if (dim_ < 0) {
        dim_ = static_cast<int>(e.vec.size());
    } else if (e.vec.size() != dim_) {
        throw DataError("embedding dimension mismatch: expected " + std::to_string(dim_) +
                        ", got " + std::to_string(e.vec.size()) + " for (" + e.qid + ", " +
                        e.docid + ", " + role_name(e.role) + ")");
    }
    if (!e.vec.allFinite()) {
        throw DataError("non-finite embedding for (" + e.qid + ", " + e.docid + ")");
    }
    auto key = std::make_tuple(e.qid, e.docid, role_index(e.role));
    if (index_.count(key)) {
        throw DataError("duplicate embedding (" + e.qid + ", " + e.docid + ", " +
                        role_name(e.role) + ")");
    }
    index_[key] = items_.size();
    items_.push_back(std::move(e));
}

const PairEmbedding* EmbeddingSet::find(const std::string& qid, const std::string& docid,
                                        Role role) const {
    auto it = index_.find(std::make_tuple(qid, docid, role_index(role)));
    return it == index_.end() ? nullptr : &items_[it->second];
}

void RankedRun::canonicalize() {
    for (auto& [qid, docs] : by_qid) {
        std::sort(docs.begin(), docs.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.docid < b.docid;
        });
        for (std::size_t i = 1; i < docs.size(); ++i) {
            if (docs[i].docid == docs[i - 1].docid) {
                throw DataError("duplicate docid '" + docs[i].docid + "' for qid '" + qid + "'");
            }
        }
    }
}

std::vector<std::string> RankedRun::qids() const {
    std::vector<std::string> out;
    out.reserve(by_qid.size());
    for (const auto& [qid, docs] : by_qid) out.push_back(qid);
    return out;
}

}  // namespace rrank
