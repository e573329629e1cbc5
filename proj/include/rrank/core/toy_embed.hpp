#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace rrank {

// Deterministic stand-in for a frozen pair encoder: hashes character 3-grams
// of "query <RS> doc" into d signed buckets and scales by 1/sqrt(d). Pure in
// (query_text, doc_text, d, seed); treats text as opaque UTF-8 bytes.
Eigen::VectorXd toy_embed(const std::string& query_text, const std::string& doc_text,
                          int d, std::uint64_t seed);

}  // namespace rrank
