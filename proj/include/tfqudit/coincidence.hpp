#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tfqudit/types.hpp"

namespace tfq {

/// Discretization of arrival times into frames of n_bins bins of width tau.
struct BinningConfig {
  Picoseconds tau_ps = 200;
  std::size_t n_bins = 1024;
  Picoseconds frame_origin_ps = 0;
  /// Maximum |t_A - t_B| for two tags to form a coincidence.
  Picoseconds pairing_window_ps = 102'400;

  Picoseconds frame_ps() const { return tau_ps * static_cast<Picoseconds>(n_bins); }

  /// Throws ConfigError on tau <= 0, n_bins < 2, or a window longer than a frame.
  void validate() const;

  /// Config whose pairing window is half a frame, so cyclic bin offsets are
  /// each reached exactly once.
  static BinningConfig half_frame(Picoseconds tau_ps, std::size_t n_bins,
                                  Picoseconds origin_ps = 0);
};

/// Bin index of a time stamp within its frame.
inline std::size_t bin_index(Picoseconds t, const BinningConfig& cfg) {
  const Picoseconds frame = cfg.frame_ps();
  Picoseconds rel = (t - cfg.frame_origin_ps) % frame;
  if (rel < 0) rel += frame;
  return static_cast<std::size_t>(rel / cfg.tau_ps);
}

namespace detail {

struct Candidate {
  Picoseconds distance;
  std::uint32_t a;
  std::uint32_t b;
};

template <class Visitor>
void resolve_cluster(std::vector<Candidate>& cluster, std::span<const Picoseconds> a,
                     std::span<const Picoseconds> b, std::vector<bool>& used_a,
                     std::vector<bool>& used_b, Visitor& visit) {
  if (cluster.size() == 1) {
    const auto& c = cluster.front();
    used_a[c.a] = true;
    used_b[c.b] = true;
    visit(a[c.a], b[c.b]);
    return;
  }
  std::sort(cluster.begin(), cluster.end(), [](const Candidate& x, const Candidate& y) {
    if (x.distance != y.distance) return x.distance < y.distance;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  for (const auto& c : cluster) {
    if (used_a[c.a] || used_b[c.b]) continue;
    used_a[c.a] = true;
    used_b[c.b] = true;
    visit(a[c.a], b[c.b]);
  }
}

}  // namespace detail

/// Greedy nearest-neighbor pairing of two sorted tag sequences.
///
/// Candidate pairs are all (a_i, b_j) with |a_i - b_j| <= window. Candidates
/// are accepted in order of increasing distance (ties: lower a index, then
/// lower b index) as long as neither tag has been used. The candidate graph
/// is processed one connected cluster at a time, which gives the same result
/// as a global sort with memory bounded by the largest cluster.
///
/// `visit(t_a, t_b)` is called once per accepted pair.
template <class Visitor>
void for_each_coincidence(std::span<const Picoseconds> a, std::span<const Picoseconds> b,
                          Picoseconds window, Visitor&& visit) {
  if (a.empty() || b.empty()) return;
  std::vector<bool> used_a(a.size(), false);
  std::vector<bool> used_b(b.size(), false);
  std::vector<detail::Candidate> cluster;
  std::size_t lo = 0;
  std::size_t cluster_max_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (lo < b.size() && b[lo] < a[i] - window) ++lo;
    std::size_t hi = lo;
    while (hi < b.size() && b[hi] <= a[i] + window) ++hi;
    if (hi == lo) continue;
    if (!cluster.empty() && lo > cluster_max_b) {
      detail::resolve_cluster(cluster, a, b, used_a, used_b, visit);
      cluster.clear();
    }
    for (std::size_t j = lo; j < hi; ++j) {
      const Picoseconds d = a[i] > b[j] ? a[i] - b[j] : b[j] - a[i];
      cluster.push_back({d, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
    cluster_max_b = std::max(cluster_max_b, hi - 1);
  }
  if (!cluster.empty()) detail::resolve_cluster(cluster, a, b, used_a, used_b, visit);
}

/// Paired coincidences (t_a, t_b), ordered as accepted.
std::vector<std::pair<Picoseconds, Picoseconds>> pair_coincidences(
    const TagStream& a, const TagStream& b, Picoseconds window);

/// Bins all coincidences into the full n_bins x n_bins frame matrix.
CoincidenceMatrix bin_full_frame(const TagStream& a, const TagStream& b,
                                 const BinningConfig& cfg, BasisPair basis = BasisPair::TT);

/// Bins coincidences and extracts the d x d subspace with maximal count.
CoincidenceMatrix bin_timestamps(const TagStream& a, const TagStream& b,
                                 const BinningConfig& cfg, std::size_t d,
                                 BasisPair basis = BasisPair::TT);

/// Start bin of the contiguous d-window (same on both axes) with the largest
/// total. Ties resolve to the smallest start.
std::size_t best_window_start(const CoincidenceMatrix& full, std::size_t d);

/// d x d submatrix starting at `start` on both axes.
CoincidenceMatrix submatrix(const CoincidenceMatrix& full, std::size_t start, std::size_t d);

/// Max-count contiguous d x d window of a full frame matrix.
CoincidenceMatrix subspace_extract(const CoincidenceMatrix& full, std::size_t d);

/// Element-wise sum of matrices with equal dimension and basis; durations add.
CoincidenceMatrix merge(const CoincidenceMatrix& x, const CoincidenceMatrix& y);

/// counts / total. Throws DataError when the matrix is empty.
JointDistribution normalize(const CoincidenceMatrix& m);

struct Marginals {
  std::vector<double> rows;  // Alice, summed over Bob's outcome
  std::vector<double> cols;  // Bob, summed over Alice's outcome
};

Marginals marginals(const JointDistribution& j);

/// FWHM of the t_A - t_B histogram with bin width `resolution_ps`, crossing
/// points found by linear interpolation at half maximum. Requires at least
/// 100 coincidences within `window_ps`.
double peak_fwhm(const TagStream& a, const TagStream& b, Picoseconds resolution_ps,
                 Picoseconds window_ps = 2000);

/// Same estimator on precomputed differences.
double histogram_fwhm(std::span<const Picoseconds> differences, Picoseconds resolution_ps);

}  // namespace tfq
