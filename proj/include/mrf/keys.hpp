#pragma once

#include <cstdint>
#include <span>

namespace mrf {

// Configuration encoding, used identically for model tensor entries, joint
// tables, sample rows and empirical tables:
//   spin -1 -> bit 0, spin +1 -> bit 1;
//   in an ordered node tuple the LAST node maps to the least significant bit.
// For a full row over nodes 1..n this means node v occupies bit (n - v).
using ConfigKey = std::uint64_t;

inline int bit_position(int n, int v) { return n - v; }

// Project a full n-node row key onto an ordered tuple of (1-based) nodes.
inline ConfigKey project_key(ConfigKey full, int n, std::span<const int> nodes) {
  ConfigKey key = 0;
  const int k = static_cast<int>(nodes.size());
  for (int i = 0; i < k; ++i) {
    key |= ((full >> bit_position(n, nodes[i])) & 1u) << (k - 1 - i);
  }
  return key;
}

// Spin value of node v in a full row key.
inline int spin_of(ConfigKey full, int n, int v) {
  return ((full >> bit_position(n, v)) & 1u) ? +1 : -1;
}

}  // namespace mrf
