#pragma once

#include <cstdint>

#include "rrank/core/types.hpp"

namespace rrank {

struct SyntheticSpec {
    int num_queries = 200;
    int docs_per_query = 20;
    int dim = 16;
    int num_levels = 3;
    double noise_scale = 0.3;
    std::uint64_t seed = 42;
};

struct SyntheticData {
    QuerySet queries;                     // originals
    std::vector<RewriteRecord> rewrites;  // persona variants, trivially accepted
    Qrels qrels;
    EmbeddingSet embeddings;              // one vector per (query, doc, role)

    SyntheticData() : qrels(3) {}
};

// Deterministic desk-scale dataset. Every (query, doc) pair gets a shared
// latent vector; each role sees that vector through a role-specific low-rank
// distortion plus fresh noise, both scaled by noise_scale (the original role
// is undistorted). Grades come from quantizing a fixed linear score of the
// latent vector, so relevance is learnable and shared across role variants.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace rrank
