#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rrank {

// The five agent roles. Index 0 is the untouched original query; 1..4 are the
// demographic personas used for rewriting.
enum class Role : int {
    Original = 0,
    Woman = 1,
    Man = 2,
    Student = 3,
    Elder = 4,
};

inline constexpr int kNumRoles = 5;
inline constexpr std::array<Role, kNumRoles> kAllRoles = {
    Role::Original, Role::Woman, Role::Man, Role::Student, Role::Elder};

constexpr int role_index(Role r) { return static_cast<int>(r); }

// Lowercase wire name used in all file formats: "original", "woman", ...
std::string role_name(Role r);

// Noun phrase substituted into prompts: "a woman", "an elder", ...
std::string role_noun(Role r);

// Parses a wire name; throws DataError on anything unknown.
Role role_from_name(const std::string& name);

struct Query {
    std::string qid;
    std::string text;
    Role role = Role::Original;
};

// Ordered collection of queries; (qid, role) pairs are unique.
class QuerySet {
public:
    void add(Query q);  // throws DataError on duplicate (qid, role) or empty text
    const std::vector<Query>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

private:
    std::vector<Query> items_;
    std::map<std::pair<std::string, int>, std::size_t> index_;
};

enum class RewriteStatus {
    Accepted,
    FallbackOriginal,
};

std::string rewrite_status_name(RewriteStatus s);
RewriteStatus rewrite_status_from_name(const std::string& name);

struct RewriteRecord {
    std::string qid;
    Role role = Role::Woman;
    std::string original_text;
    std::string rewritten_text;
    std::string intent_summary;
    int iterations = 1;
    int s0 = 0;  // semantic fidelity, in {-1,0,1}
    int s1 = 0;  // persona conformity, in {-1,0,1}
    RewriteStatus status = RewriteStatus::Accepted;
};

struct Document {
    std::string docid;
    std::string text;  // may be empty when embeddings are supplied externally
};

// Graded relevance judgments keyed by (qid, docid).
class Qrels {
public:
    explicit Qrels(int num_levels);

    int num_levels() const { return num_levels_; }

    // Last write wins; returns true when an existing entry was overwritten.
    bool set(const std::string& qid, const std::string& docid, int grade);

    // 0 for unjudged documents of a known qid.
    int grade(const std::string& qid, const std::string& docid) const;
    bool has_qid(const std::string& qid) const;
    // Judged (docid -> grade) map for one qid; throws DataError on unknown qid.
    const std::map<std::string, int>& for_qid(const std::string& qid) const;

    const std::map<std::string, std::map<std::string, int>>& all() const { return grades_; }
    std::size_t size() const;

    int duplicate_warnings = 0;

private:
    int num_levels_;
    std::map<std::string, std::map<std::string, int>> grades_;
};

struct PairEmbedding {
    std::string qid;
    Role role = Role::Original;
    std::string docid;
    Eigen::VectorXd vec;
};

// Embeddings with a uniform dimension and an index over (qid, docid, role).
class EmbeddingSet {
public:
    void add(PairEmbedding e);  // throws DataError on dimension mismatch or duplicate key
    const std::vector<PairEmbedding>& items() const { return items_; }
    int dim() const { return dim_; }
    std::size_t size() const { return items_.size(); }

    const PairEmbedding* find(const std::string& qid, const std::string& docid, Role role) const;

private:
    int dim_ = -1;
    std::vector<PairEmbedding> items_;
    std::map<std::tuple<std::string, std::string, int>, std::size_t> index_;
};

struct ScoredDoc {
    std::string docid;
    double score = 0.0;
};

// One system's ranking for every query, under a single role / tag.
struct RankedRun {
    Role role = Role::Original;
    std::string tag = "rrank";
    std::map<std::string, std::vector<ScoredDoc>> by_qid;

    // Orders each list by score descending, docid ascending; rejects duplicate
    // docids within a qid. Idempotent.
    void canonicalize();
    std::vector<std::string> qids() const;
};

}  // namespace rrank
