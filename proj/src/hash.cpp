#include "rrank/hash.hpp"

#include <fstream>
#include <sstream>

#include "rrank/errors.hpp"

namespace rrank {

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string hash_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open file for hashing: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return to_hex(fnv1a64(ss.str()));
}

}  // namespace rrank
