#include "tfqudit/coincidence.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tfqudit/error.hpp"

namespace tfq {

void BinningConfig::validate() const {
  if (tau_ps <= 0) throw ConfigError("binning: tau must be positive");
  if (n_bins < 2) throw ConfigError("binning: n_bins must be >= 2");
  if (pairing_window_ps < 0) throw ConfigError("binning: pairing window must be >= 0");
  if (pairing_window_ps > frame_ps()) {
    throw ConfigError("binning: pairing window exceeds the frame length n_bins * tau");
  }
}

BinningConfig BinningConfig::half_frame(Picoseconds tau_ps, std::size_t n_bins,
                                        Picoseconds origin_ps) {
  BinningConfig cfg{tau_ps, n_bins, origin_ps, 0};
  // Odd frames round down so the window never wraps onto the same offset twice.
  cfg.pairing_window_ps = (tau_ps * static_cast<Picoseconds>(n_bins) - 1) / 2;
  return cfg;
}

std::vector<std::pair<Picoseconds, Picoseconds>> pair_coincidences(const TagStream& a,
                                                                   const TagStream& b,
                                                                   Picoseconds window) {
  std::vector<std::pair<Picoseconds, Picoseconds>> out;
  for_each_coincidence(a.tags(), b.tags(), window,
                       [&](Picoseconds ta, Picoseconds tb) { out.emplace_back(ta, tb); });
  return out;
}

CoincidenceMatrix bin_full_frame(const TagStream& a, const TagStream& b,
                                 const BinningConfig& cfg, BasisPair basis) {
  cfg.validate();
  CountGrid grid(cfg.n_bins);
  for_each_coincidence(a.tags(), b.tags(), cfg.pairing_window_ps,
                       [&](Picoseconds ta, Picoseconds tb) {
                         ++grid(bin_index(ta, cfg), bin_index(tb, cfg));
                       });
  return CoincidenceMatrix(std::move(grid), basis, std::max(a.duration_s(), b.duration_s()));
}

CoincidenceMatrix bin_timestamps(const TagStream& a, const TagStream& b,
                                 const BinningConfig& cfg, std::size_t d, BasisPair basis) {
  if (d < 2 || d > cfg.n_bins) {
    throw ConfigError("bin_timestamps: dimension must satisfy 2 <= d <= n_bins");
  }
  return subspace_extract(bin_full_frame(a, b, cfg, basis), d);
}

std::size_t best_window_start(const CoincidenceMatrix& full, std::size_t d) {
  const std::size_t n = full.dim();
  if (d < 2 || d > n) throw ConfigError("subspace dimension must satisfy 2 <= d <= N");
  // 2-D prefix sums, (n+1) x (n+1)
  std::vector<std::uint64_t> prefix((n + 1) * (n + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint64_t& { return prefix[i * (n + 1) + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t row_sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      row_sum += full(i, j);
      at(i + 1, j + 1) = at(i, j + 1) + row_sum;
    }
  }
  std::size_t best = 0;
  std::uint64_t best_total = 0;
  for (std::size_t s = 0; s + d <= n; ++s) {
    const std::uint64_t total = at(s + d, s + d) - at(s, s + d) - at(s + d, s) + at(s, s);
    if (s == 0 || total > best_total) {
      best = s;
      best_total = total;
    }
  }
  return best;
}

CoincidenceMatrix submatrix(const CoincidenceMatrix& full, std::size_t start, std::size_t d) {
  if (d < 2 || start + d > full.dim()) throw ConfigError("submatrix window out of range");
  CountGrid grid(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) grid(i, j) = full(start + i, start + j);
  }
  return CoincidenceMatrix(std::move(grid), full.basis(), full.duration_s());
}

CoincidenceMatrix subspace_extract(const CoincidenceMatrix& full, std::size_t d) {
  if (d == full.dim()) return full;
  return submatrix(full, best_window_start(full, d), d);
}

CoincidenceMatrix merge(const CoincidenceMatrix& x, const CoincidenceMatrix& y) {
  if (x.dim() != y.dim() || x.basis() != y.basis()) {
    throw DataError("merge: matrices differ in dimension or basis pair");
  }
  CountGrid grid = x.counts();
  auto dst = grid.values();
  auto src = y.counts().values();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  return CoincidenceMatrix(std::move(grid), x.basis(), x.duration_s() + y.duration_s());
}

JointDistribution normalize(const CoincidenceMatrix& m) {
  if (m.total() == 0) throw DataError("cannot normalize an empty coincidence matrix");
  const double total = static_cast<double>(m.total());
  ProbGrid probs(m.dim());
  auto src = m.counts().values();
  auto dst = probs.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = static_cast<double>(src[k]) / total;
  return JointDistribution(std::move(probs), m.basis());
}

Marginals marginals(const JointDistribution& j) {
  const std::size_t d = j.dim();
  Marginals m{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t r = 0; r < d; ++r) {
    m.rows[r] = accurate_sum(j.probs().row(r));
    for (std::size_t c = 0; c < d; ++c) m.cols[c] += j(r, c);
  }
  return m;
}

double histogram_fwhm(std::span<const Picoseconds> differences, Picoseconds resolution_ps) {
  if (resolution_ps <= 0) throw ConfigError("peak_fwhm: resolution must be positive");
  if (differences.size() < 100) {
    throw DataError("peak_fwhm: need at least 100 coincidences, got " +
                    std::to_string(differences.size()));
  }
  const auto [lo_it, hi_it] = std::minmax_element(differences.begin(), differences.end());
  const Picoseconds lo = *lo_it;
  const std::size_t n_bins = static_cast<std::size_t>((*hi_it - lo) / resolution_ps) + 1;
  std::vector<double> hist(n_bins, 0.0);
  for (Picoseconds x : differences) ++hist[static_cast<std::size_t>((x - lo) / resolution_ps)];

  const std::size_t peak =
      static_cast<std::size_t>(std::max_element(hist.begin(), hist.end()) - hist.begin());
  const double half = hist[peak] / 2.0;
  const double r = static_cast<double>(resolution_ps);
  auto center = [&](double k) { return static_cast<double>(lo) + (k + 0.5) * r; };
  auto count = [&](std::ptrdiff_t k) {
    return (k < 0 || k >= static_cast<std::ptrdiff_t>(n_bins)) ? 0.0 : hist[k];
  };

  std::ptrdiff_t k = static_cast<std::ptrdiff_t>(peak);
  while (count(k - 1) >= half) --k;
  // crossing between k-1 (below half) and k (at or above half)
  const double left = center(static_cast<double>(k - 1)) +
                      (half - count(k - 1)) / (count(k) - count(k - 1)) * r;
  k = static_cast<std::ptrdiff_t>(peak);
  while (count(k + 1) >= half) ++k;
  const double right = center(static_cast<double>(k)) +
                       (count(k) - half) / (count(k) - count(k + 1)) * r;
  return right - left;
}

double peak_fwhm(const TagStream& a, const TagStream& b, Picoseconds resolution_ps,
                 Picoseconds window_ps) {
  std::vector<Picoseconds> diffs;
  for_each_coincidence(a.tags(), b.tags(), window_ps,
                       [&](Picoseconds ta, Picoseconds tb) { diffs.push_back(ta - tb); });
  return histogram_fwhm(diffs, resolution_ps);
}

}  // namespace tfq
