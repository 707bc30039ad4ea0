#pragma once

#include <cstdint>
#include <random>

namespace sacn::harness {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent generators derived from one master seed by successive
/// splitmix64 outputs, in this fixed order.
struct SeedStreams {
  std::mt19937_64 env;      // environment resets during training
  std::mt19937_64 policy;   // behavior action sampling
  std::mt19937_64 replay;   // anchor sampling
  std::mt19937_64 learner;  // target / actor noise
  std::mt19937_64 eval;     // evaluation resets
  std::mt19937_64 init;     // network initialization

  explicit SeedStreams(std::uint64_t master) {
    std::uint64_t s = master;
    env.seed(splitmix64(s));
    policy.seed(splitmix64(s));
    replay.seed(splitmix64(s));
    learner.seed(splitmix64(s));
    eval.seed(splitmix64(s));
    init.seed(splitmix64(s));
  }
};

}  // namespace sacn::harness
