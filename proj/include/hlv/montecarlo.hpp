#pragma once

#include "hlv/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace hlv {

struct Proportion {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double freq = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval, 95% by default.
Proportion wilson(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

// Evaluates f(i, rng_i) for every trial index on `workers` threads, rng_i being the
// stream keyed by (seed, i). Outcomes are returned in index order, so the result
// does not depend on the worker count.
std::vector<std::uint8_t> run_trials(std::size_t trials, std::uint64_t seed, unsigned workers,
                                     const std::function<std::uint8_t(std::size_t, Rng&)>& f);

unsigned default_workers();

}  // namespace hlv
