// SPDX-License-Identifier: Apache-2.0
#include "bugcause/digest.hpp"

#include <openssl/sha.h>

#include <array>
#include <cstdio>

namespace bugcause {

static std::array<unsigned char, SHA256_DIGEST_LENGTH> sha256_raw(std::string_view data) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> out{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out.data());
    return out;
}

std::string sha256_hex(std::string_view data) {
    auto raw = sha256_raw(data);
    static const char* hex = "0123456789abcdef";
    std::string s;
    s.reserve(raw.size() * 2);
    for (unsigned char b : raw) {
        s.push_back(hex[b >> 4]);
        s.push_back(hex[b & 0xf]);
    }
    return s;
}

std::uint64_t sha256_seed64(std::string_view data) {
    auto raw = sha256_raw(data);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | raw[static_cast<std::size_t>(i)];
    return v;
}

std::uint64_t derive_run_seed(std::uint64_t master_seed, std::uint64_t run_index) {
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%llu:%llu",
                          static_cast<unsigned long long>(master_seed),
                          static_cast<unsigned long long>(run_index));
    return sha256_seed64(std::string_view(buf, static_cast<std::size_t>(n)));
}

} // namespace bugcause
