#include "rrank/harness/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "rrank/errors.hpp"

namespace rrank {

Dataset build_dataset(EmbeddingSet embeddings, Qrels qrels, const std::vector<Role>& roles) {
    if (roles.empty()) {
        throw DataError("build_dataset requires at least one role");
    }
    Dataset data;
    data.roles = roles;

    // Collect the distinct (qid, docid) pairs present in the embeddings.
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& e : embeddings.items()) {
        pairs.emplace(e.qid, e.docid);
    }

    std::string missing;
    int missing_count = 0;
    for (const auto& [qid, docid] : pairs) {
        PairGroup group;
        group.qid = qid;
        group.docid = docid;
        if (!qrels.has_qid(qid)) {
            throw DataError("qid '" + qid + "' has embeddings but no qrels entries");
        }
        group.grade = qrels.grade(qid, docid);
        for (Role role : roles) {
            const PairEmbedding* e = embeddings.find(qid, docid, role);
            if (!e) {
                if (missing_count < 10) {
                    missing += "\n  (" + qid + ", " + docid + ", " + role_name(role) + ")";
                }
                ++missing_count;
                continue;
            }
            group.embedding_idx.push_back(
                static_cast<std::size_t>(e - embeddings.items().data()));
        }
        data.groups.push_back(std::move(group));
    }
    if (missing_count > 0) {
        throw DataError("missing " + std::to_string(missing_count) +
                        " role-variant embeddings:" + missing +
                        (missing_count > 10 ? "\n  ..." : ""));
    }
    data.embeddings = std::move(embeddings);
    data.qrels = std::move(qrels);
    return data;
}

}  // namespace rrank
