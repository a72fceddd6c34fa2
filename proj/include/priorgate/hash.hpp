#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "priorgate/types.hpp"

namespace priorgate {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t state = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    state ^= p[i];
    state *= 0x100000001b3ull;
  }
  return state;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t state = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), state);
}

/// Stable combination of two 64-bit values (platform independent).
inline std::uint64_t hash_pair(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

/// Content hash of a token id sequence, endianness independent.
inline std::uint64_t hash_token_ids(const std::vector<TokenId>& tokens) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (TokenId t : tokens) {
    unsigned char bytes[4] = {
        static_cast<unsigned char>(t & 0xff),
        static_cast<unsigned char>((t >> 8) & 0xff),
        static_cast<unsigned char>((t >> 16) & 0xff),
        static_cast<unsigned char>((t >> 24) & 0xff),
    };
    h = fnv1a64(bytes, 4, h);
  }
  return h;
}

/// block_id = stable hash of (document content hash, intra-doc block index).
inline BlockId make_block_id(DocId doc_id, std::uint64_t block_index) {
  return hash_pair(doc_id, block_index);
}

/// Uniform double in [0, 1) from 64 bits.
inline double unit_uniform(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace priorgate
