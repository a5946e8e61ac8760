#include "hashbreak/rng.hpp"

#include <openssl/evp.h>

#include "hashbreak/errors.hpp"

namespace hashbreak {

std::uint64_t digest64(std::span<const std::uint8_t> bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1 || len < 8) {
        throw Error("SHA-256 digest failed");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | md[i];
    return v;
}

} // namespace hashbreak
