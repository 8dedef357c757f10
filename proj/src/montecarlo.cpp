#include "hlv/montecarlo.hpp"

#include "hlv/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace hlv {

Proportion wilson(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) fail(ErrorCode::InvalidArgument, "trials: must be >= 1");
  if (successes > trials) fail(ErrorCode::InvalidArgument, "successes exceed trials");
  Proportion p;
  p.successes = successes;
  p.trials = trials;
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (ph + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  p.freq = ph;
  p.lo = std::max(0.0, centre - half);
  p.hi = std::min(1.0, centre + half);
  if (successes == 0) p.lo = 0.0;
  if (successes == trials) p.hi = 1.0;
  return p;
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<std::uint8_t> run_trials(std::size_t trials, std::uint64_t seed, unsigned workers,
                                     const std::function<std::uint8_t(std::size_t, Rng&)>& f) {
  std::vector<std::uint8_t> out(trials, 0);
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(trials, 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    constexpr std::size_t chunk = 64;
    for (;;) {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= trials) return;
      const std::size_t end = std::min(trials, begin + chunk);
      for (std::size_t i = begin; i < end; ++i) {
        try {
          Rng rng(seed, i);
          out[i] = f(i, rng);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(trials);
          return;
        }
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace hlv
