#include "qrev/hash.hpp"

#include <array>

#include <fmt/format.h>
#include <openssl/sha.h>

namespace qrev {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest.data());
    std::string out;
    out.reserve(2 * digest.size());
    for (unsigned char c : digest) out += fmt::format("{:02x}", c);
    return out;
}

}  // namespace qrev
