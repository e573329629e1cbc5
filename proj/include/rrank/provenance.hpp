#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace rrank {

inline constexpr const char* kToolVersion = "1.0.0";

// Written into every output directory. Deliberately carries no timestamps:
// identical inputs and seed must produce byte-identical output trees.
struct Provenance {
    std::string subcommand;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;      // path -> content hash
    std::map<std::string, std::string> parameters;  // resolved knobs
    std::string data_hash;                          // optional in-memory dataset hash
};

std::string serialize_provenance(const Provenance& p);
void save_provenance(const Provenance& p, const std::string& dir);

}  // namespace rrank
