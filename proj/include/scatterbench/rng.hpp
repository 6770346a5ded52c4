#pragma once

#include <cstdint>

namespace sb {

// Counter-based generator: output n of stream (seed, stream) is a SplitMix64
// finalizer applied to a keyed counter, so draws never depend on thread
// scheduling or on how many other streams were consumed.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();  // open interval (0, 1)
  double normal();   // standard normal, Box-Muller

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace sb
