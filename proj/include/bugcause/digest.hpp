// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace bugcause {

// Hex-encoded SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

// First 8 bytes of SHA-256(data), big-endian, as a 64-bit seed.
std::uint64_t sha256_seed64(std::string_view data);

// Per-run seed: SHA-256(master_seed as decimal || ":" || run index as decimal)
// truncated to 64 bits.
std::uint64_t derive_run_seed(std::uint64_t master_seed, std::uint64_t run_index);

} // namespace bugcause
