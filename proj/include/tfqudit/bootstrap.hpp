#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "tfqudit/types.hpp"

namespace tfq {

struct BootstrapConfig {
  std::size_t n_samples = 2000;
  std::uint64_t seed = 0;
  double sigma_multiplier = 3.0;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;  // n_samples >= 100, sigma_multiplier > 0
};

struct BootstrapSummary {
  double mean = 0.0;
  double sigma = 0.0;  // sample standard deviation over successful replicates
  double lower = 0.0;  // mean - sigma_multiplier * sigma
  double upper = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
};

using Statistic = std::function<double(std::span<const CoincidenceMatrix>)>;
using VectorStatistic = std::function<std::vector<double>(std::span<const CoincidenceMatrix>)>;

/// Replaces every cell by an independent Poisson draw with the cell count as mean.
CoincidenceMatrix poisson_resample(const CoincidenceMatrix& m, std::mt19937_64& rng);

/// Joint Poisson bootstrap: each replicate resamples all matrices, evaluates
/// the statistic, and the replicates are summarized as a Gaussian. A
/// replicate whose statistic throws or returns a non-finite value is counted
/// as failed and excluded. Replicate r draws from a generator seeded with
/// derive_seed(cfg.seed, r), so the result does not depend on thread count.
/// The statistic must be safe to call concurrently.
std::vector<BootstrapSummary> poisson_bootstrap(std::span<const CoincidenceMatrix> matrices,
                                                const VectorStatistic& statistic,
                                                std::size_t n_outputs,
                                                const BootstrapConfig& cfg);

BootstrapSummary poisson_bootstrap(std::span<const CoincidenceMatrix> matrices,
                                   const Statistic& statistic, const BootstrapConfig& cfg);

}  // namespace tfq
