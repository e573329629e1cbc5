#include "rrank/core/toy_embed.hpp"

#include <cmath>

#include "rrank/errors.hpp"
#include "rrank/hash.hpp"
#include "rrank/rng.hpp"

namespace rrank {

Eigen::VectorXd toy_embed(const std::string& query_text, const std::string& doc_text,
                          int d, std::uint64_t seed) {
    if (d < 2) {
        throw DataError("toy_embed requires d >= 2, got " + std::to_string(d));
    }
    if (query_text.empty() || doc_text.empty()) {
        throw DataError("toy_embed requires non-empty query and document text");
    }

    // 0x1e = ASCII record separator; keeps query and doc grams from merging
    // into each other's identity while staying part of the hashed stream.
    std::string combined = query_text;
    combined.push_back('\x1e');
    combined += doc_text;

    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    const std::uint64_t base = splitmix64(seed ^ 0x746f79656d626564ULL);
    for (std::size_t i = 0; i + 3 <= combined.size(); ++i) {
        const std::uint64_t h = fnv1a64(std::string_view(combined).substr(i, 3), base);
        const int bucket = static_cast<int>(h % static_cast<std::uint64_t>(d));
        const double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
        v[bucket] += sign;
    }
    // Signed counts can in principle cancel to zero; pin one deterministic
    // coordinate so the norm is always positive.
    if (v.isZero(0.0)) {
        v[static_cast<int>(base % static_cast<std::uint64_t>(d))] = 1.0;
    }
    return v / std::sqrt(static_cast<double>(d));
}

}  // namespace rrank
