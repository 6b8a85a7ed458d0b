#include "tfqudit/witness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tfqudit/error.hpp"

namespace tfq {

namespace {

void require_same_dim(const JointDistribution& a, const JointDistribution& b) {
  if (a.dim() != b.dim()) {
    throw DataError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
}

template <class Grid>
std::vector<double> diagonal_sums_by_shift(const Grid& g) {
  const std::size_t d = g.dim();
  std::vector<double> sums(d, 0.0);
  for (std::size_t m = 0; m < d; ++m) {
    const auto row = g.row(m);
    for (std::size_t n = 0; n < d; ++n) {
      sums[n >= m ? n - m : n + d - m] += static_cast<double>(row[n]);
    }
  }
  return sums;
}

}  // namespace

TargetState::TargetState(std::vector<double> schmidt_coeffs) : coeffs_(std::move(schmidt_coeffs)) {
  if (coeffs_.empty()) throw ConfigError("target state needs at least one coefficient");
  double norm = 0.0;
  for (std::size_t m = 0; m < coeffs_.size(); ++m) {
    if (!(coeffs_[m] >= 0.0)) throw ConfigError("Schmidt coefficients must be nonnegative");
    if (m > 0 && coeffs_[m] > coeffs_[m - 1]) {
      throw ConfigError("Schmidt coefficients must be sorted nonincreasing");
    }
    norm += coeffs_[m] * coeffs_[m];
  }
  if (std::abs(norm - 1.0) > 1e-12) throw ConfigError("Schmidt coefficients are not normalized");
  uniform_ = std::all_of(coeffs_.begin(), coeffs_.end(),
                         [&](double c) { return c == coeffs_.front(); });
  cumulative_.assign(coeffs_.size() + 1, 0.0);
  const double d = static_cast<double>(coeffs_.size());
  for (std::size_t k = 1; k <= coeffs_.size(); ++k) {
    cumulative_[k] = uniform_ ? static_cast<double>(k) / d
                              : cumulative_[k - 1] + coeffs_[k - 1] * coeffs_[k - 1];
  }
}

TargetState TargetState::maximally_entangled(std::size_t d) {
  if (d < 1) throw ConfigError("target dimension must be >= 1");
  return TargetState(std::vector<double>(d, 1.0 / std::sqrt(static_cast<double>(d))));
}

double TargetState::schmidt_bound(std::size_t k) const {
  return cumulative_[std::min(k, coeffs_.size())];
}

double fidelity_diagonal(const JointDistribution& tt, const TargetState& target) {
  if (tt.dim() != target.dim()) throw DataError("target dimension does not match data");
  double sum = 0.0;
  for (std::size_t m = 0; m < tt.dim(); ++m) {
    const double l2 = target.is_maximally_entangled()
                          ? 1.0 / static_cast<double>(tt.dim())
                          : target.coeffs()[m] * target.coeffs()[m];
    sum += l2 * tt(m, m);
  }
  return sum;
}

double f2_tilde(const JointDistribution& tt, const JointDistribution& ff) {
  require_same_dim(tt, ff);
  const std::size_t d = tt.dim();
  const double inv_d = 1.0 / static_cast<double>(d);

  double conj_diag = 0.0;
  for (std::size_t j = 0; j < d; ++j) conj_diag += ff(j, j);

  const double population = accurate_sum(tt.probs().values());

  std::vector<double> s(d, 0.0);
  std::vector<double> q(d, 0.0);
  for (std::size_t m = 0; m < d; ++m) {
    const auto row = tt.probs().row(m);
    for (std::size_t n = 0; n < d; ++n) {
      const std::size_t k = m >= n ? m - n : m + d - n;
      s[k] += std::sqrt(row[n]);
      q[k] += row[n];
    }
  }
  double coherence = 0.0;
  for (std::size_t k = 1; k < d; ++k) coherence += s[k] * s[k] - q[k];

  return conj_diag - inv_d * population - inv_d * coherence;
}

std::size_t certify_schmidt_number(double fidelity_bound, const TargetState& target) {
  const std::size_t d = target.dim();
  // largest k in [0, d] with B_k < F
  std::size_t lo = 0;
  std::size_t hi = d + 1;  // invariant: B_lo < F unless lo == 0, and B_hi >= F
  if (!(target.schmidt_bound(0) < fidelity_bound)) return 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (target.schmidt_bound(mid) < fidelity_bound) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::clamp<std::size_t>(lo + 1, 1, d);
}

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

double conditional_entropy(const JointDistribution& j) {
  const std::size_t d = j.dim();
  std::vector<double> cols(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    const auto row = j.probs().row(r);
    for (std::size_t c = 0; c < d; ++c) cols[c] += row[c];
  }
  return shannon_entropy(j.probs().values()) - shannon_entropy(cols);
}

DistillableBound distillable_entanglement(const JointDistribution& tt,
                                          const JointDistribution& ff, double max_overlap) {
  require_same_dim(tt, ff);
  if (!(max_overlap > 0.0 && max_overlap <= 1.0)) {
    throw NumericError("maximal basis overlap must lie in (0, 1]");
  }
  const double raw = std::log2(1.0 / max_overlap) - conditional_entropy(tt) - conditional_entropy(ff);
  return {raw, std::max(raw, 0.0)};
}

Alignment align_diagonal(const JointDistribution& j) {
  const std::size_t d = j.dim();
  const auto sums = diagonal_sums_by_shift(j.probs());
  const std::size_t shift =
      static_cast<std::size_t>(std::max_element(sums.begin(), sums.end()) - sums.begin());
  if (shift == 0) return {j, 0};
  ProbGrid out(d);
  for (std::size_t m = 0; m < d; ++m) {
    for (std::size_t n = 0; n < d; ++n) out(m, n) = j(m, (n + shift) % d);
  }
  return {JointDistribution(std::move(out), j.basis()), shift};
}

std::size_t best_diagonal_shift(const CoincidenceMatrix& m) {
  const auto sums = diagonal_sums_by_shift(m.counts());
  return static_cast<std::size_t>(std::max_element(sums.begin(), sums.end()) - sums.begin());
}

CoincidenceMatrix shift_columns(const CoincidenceMatrix& m, std::size_t shift) {
  const std::size_t d = m.dim();
  shift %= d;
  if (shift == 0) return m;
  CountGrid out(d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) out(r, c) = m(r, (c + shift) % d);
  }
  return CoincidenceMatrix(std::move(out), m.basis(), m.duration_s());
}

WitnessReport certify(const JointDistribution& tt, const JointDistribution& ff,
                      const TargetState& target, double max_overlap) {
  require_same_dim(tt, ff);
  WitnessReport r;
  r.d = tt.dim();
  r.f1 = fidelity_diagonal(tt, target);
  r.f2_tilde = f2_tilde(tt, ff);
  r.f_tilde = r.f1 + r.f2_tilde;
  r.d_ent = certify_schmidt_number(r.f_tilde, target);
  r.h_tt = conditional_entropy(tt);
  r.h_ff = conditional_entropy(ff);
  r.max_overlap = max_overlap;
  const auto ed = distillable_entanglement(tt, ff, max_overlap);
  r.e_d = ed.raw;
  r.e_d_clamped = ed.clamped;
  return r;
}

}  // namespace tfq
