#pragma once

#include <cstdint>
#include <random>

#include "rpksim/bytes.hpp"

namespace rpksim {

// Seeded byte source for key generation, hello randoms and credentials.
// Everything that varies between runs flows from one of these.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(engine_() & 0xff);
    return out;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rpksim
