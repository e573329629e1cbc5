#pragma once

#include <vector>

#include "rrank/core/types.hpp"

namespace rrank {

// One (query, doc) pair with its aligned role-variant embeddings and the
// shared relevance grade.
struct PairGroup {
    std::string qid;
    std::string docid;
    int grade = 0;
    std::vector<std::size_t> embedding_idx;  // into EmbeddingSet::items(), one per role
};

struct Dataset {
    EmbeddingSet embeddings;
    Qrels qrels;
    std::vector<Role> roles;       // role order used in every group
    std::vector<PairGroup> groups; // sorted by (qid, docid)

    Dataset() : qrels(3) {}
    int dim() const { return embeddings.dim(); }
    int num_levels() const { return qrels.num_levels(); }
};

// Joins embeddings with qrels into aligned groups covering the given roles.
// Throws DataError listing the missing (qid, docid, role) triples when
// embeddings have gaps, and on (qid, docid) pairs absent from the qrels.
Dataset build_dataset(EmbeddingSet embeddings, Qrels qrels, const std::vector<Role>& roles);

}  // namespace rrank
