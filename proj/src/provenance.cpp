#include "rrank/provenance.hpp"

#include <fstream>

#include <json.hpp>

#include "rrank/errors.hpp"

namespace rrank {

std::string serialize_provenance(const Provenance& p) {
    nlohmann::ordered_json j;
    j["tool"] = "rrank";
    j["version"] = kToolVersion;
    j["subcommand"] = p.subcommand;
    j["seed"] = p.seed;
    nlohmann::ordered_json inputs;
    for (const auto& [path, hash] : p.inputs) inputs[path] = hash;
    j["inputs"] = std::move(inputs);
    nlohmann::ordered_json params;
    for (const auto& [key, value] : p.parameters) params[key] = value;
    j["parameters"] = std::move(params);
    if (!p.data_hash.empty()) j["data_hash"] = p.data_hash;
    return j.dump(2) + "\n";
}

void save_provenance(const Provenance& p, const std::string& dir) {
    const std::string path = dir + "/provenance.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write provenance: " + path);
    }
    out << serialize_provenance(p);
}

}  // namespace rrank
