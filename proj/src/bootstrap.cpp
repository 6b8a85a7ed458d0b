#include "tfqudit/bootstrap.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "tfqudit/error.hpp"
#include "tfqudit/rng.hpp"

namespace tfq {

void BootstrapConfig::validate() const {
  if (n_samples < 100) throw ConfigError("bootstrap: n_samples must be >= 100");
  if (!(sigma_multiplier > 0.0)) throw ConfigError("bootstrap: sigma_multiplier must be > 0");
}

CoincidenceMatrix poisson_resample(const CoincidenceMatrix& m, std::mt19937_64& rng) {
  // distributions for small means are reused; most cells of sparse data are 1-3
  constexpr std::size_t cached = 32;
  std::array<std::optional<std::poisson_distribution<std::uint64_t>>, cached> small;
  CountGrid out(m.dim());
  auto src = m.counts().values();
  auto dst = out.values();
  for (std::size_t k = 0; k < src.size(); ++k) {
    const std::uint64_t c = src[k];
    if (c == 0) continue;
    if (c < cached) {
      if (!small[c]) small[c].emplace(static_cast<double>(c));
      dst[k] = (*small[c])(rng);
    } else {
      std::poisson_distribution<std::uint64_t> dist(static_cast<double>(c));
      dst[k] = dist(rng);
    }
  }
  return CoincidenceMatrix(std::move(out), m.basis(), m.duration_s());
}

std::vector<BootstrapSummary> poisson_bootstrap(std::span<const CoincidenceMatrix> matrices,
                                                const VectorStatistic& statistic,
                                                std::size_t n_outputs,
                                                const BootstrapConfig& cfg) {
  cfg.validate();
  if (matrices.empty()) throw ConfigError("bootstrap: no matrices given");

  const std::size_t n = cfg.n_samples;
  // replicate-major storage; NaN marks a failed replicate
  std::vector<double> values(n * n_outputs, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> ok(n, 0);

  auto run_replicate = [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(cfg.seed, r));
    std::vector<CoincidenceMatrix> sample;
    sample.reserve(matrices.size());
    for (const auto& m : matrices) sample.push_back(poisson_resample(m, rng));
    try {
      const auto out = statistic(sample);
      if (out.size() != n_outputs) return;
      if (!std::all_of(out.begin(), out.end(), [](double v) { return std::isfinite(v); })) return;
      std::copy(out.begin(), out.end(), values.begin() + static_cast<std::ptrdiff_t>(r * n_outputs));
      ok[r] = 1;
    } catch (const std::exception&) {
      // counted as failed below
    }
  };

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t r = 0; r < n; ++r) run_replicate(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < n; r = next++) run_replicate(r);
      });
    }
  }

  std::vector<BootstrapSummary> summaries(n_outputs);
  for (std::size_t k = 0; k < n_outputs; ++k) {
    auto& s = summaries[k];
    double sum = 0.0;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n; ++r) {
      if (!ok[r]) continue;
      const double v = values[r * n_outputs + k];
      sum += v;
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
      ++s.n_ok;
    }
    s.n_failed = n - s.n_ok;
    if (s.n_ok == 0) {
      s.mean = s.sigma = s.lower = s.upper = s.min = s.max = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    s.mean = sum / static_cast<double>(s.n_ok);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (!ok[r]) continue;
      const double diff = values[r * n_outputs + k] - s.mean;
      ss += diff * diff;
    }
    s.sigma = s.n_ok > 1 ? std::sqrt(ss / static_cast<double>(s.n_ok - 1)) : 0.0;
    s.lower = s.mean - cfg.sigma_multiplier * s.sigma;
    s.upper = s.mean + cfg.sigma_multiplier * s.sigma;
  }
  return summaries;
}

BootstrapSummary poisson_bootstrap(std::span<const CoincidenceMatrix> matrices,
                                   const Statistic& statistic, const BootstrapConfig& cfg) {
  VectorStatistic wrapped = [&](std::span<const CoincidenceMatrix> ms) {
    return std::vector<double>{statistic(ms)};
  };
  return poisson_bootstrap(matrices, wrapped, 1, cfg).front();
}

}  // namespace tfq
