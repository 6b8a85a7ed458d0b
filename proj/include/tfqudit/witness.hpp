#pragma once

#include <cstddef>
#include <vector>

#include "tfqudit/types.hpp"

namespace tfq {

/// Pure bipartite target state given by its Schmidt coefficients, sorted
/// nonincreasing with unit 2-norm.
class TargetState {
 public:
  explicit TargetState(std::vector<double> schmidt_coeffs);
  static TargetState maximally_entangled(std::size_t d);

  std::size_t dim() const noexcept { return coeffs_.size(); }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  bool is_maximally_entangled() const noexcept { return uniform_; }

  /// Largest fidelity reachable by states of Schmidt number <= k: sum of the
  /// k largest squared coefficients.
  double schmidt_bound(std::size_t k) const;

 private:
  std::vector<double> coeffs_;
  std::vector<double> cumulative_;  // cumulative_[k] = bound for Schmidt number k
  bool uniform_ = false;
};

/// Diagonal fidelity contribution sum_m lambda_m^2 p_mm from the time basis.
double fidelity_diagonal(const JointDistribution& tt, const TargetState& target);

/// Lower bound on the off-diagonal fidelity contribution for the maximally
/// entangled target, from the time-basis (tt) and frequency-basis (ff)
/// distributions. O(d^2): the coherence penalty is summed per cyclic offset
/// class k = m - n (mod d) as (1/d) sum_{k != 0} (S_k^2 - Q_k) with
/// S_k = sum_m sqrt(p_{m, m-k}) and Q_k = sum_m p_{m, m-k}.
double f2_tilde(const JointDistribution& tt, const JointDistribution& ff);

/// Certified Schmidt number: one more than the largest k with
/// fidelity_bound > B_k, clamped to [1, d].
std::size_t certify_schmidt_number(double fidelity_bound, const TargetState& target);

/// Shannon entropy in bits, 0 log 0 = 0.
double shannon_entropy(std::span<const double> p);

/// H(A|B) = H(A,B) - H(B) in bits, B being the column index.
double conditional_entropy(const JointDistribution& j);

struct DistillableBound {
  double raw;      // may be negative
  double clamped;  // max(raw, 0)
};

/// -log2(max_overlap) - H(A_T|B_T) - H(A_F|B_F).
DistillableBound distillable_entanglement(const JointDistribution& tt,
                                          const JointDistribution& ff, double max_overlap);

struct Alignment {
  JointDistribution aligned;
  std::size_t shift;
};

/// Cyclic column shift s maximizing sum_m p_{m, (m+s) mod d}; the returned
/// distribution has entries q_{m,n} = p_{m,(n+s) mod d}. Ties pick the
/// smallest shift.
Alignment align_diagonal(const JointDistribution& j);

/// Diagonal-sum-maximizing shift of a count matrix (same rule as above).
std::size_t best_diagonal_shift(const CoincidenceMatrix& m);

/// Applies q_{m,n} = c_{m,(n+s) mod d}.
CoincidenceMatrix shift_columns(const CoincidenceMatrix& m, std::size_t shift);

struct WitnessReport {
  std::size_t d = 0;
  double f1 = 0.0;
  double f2_tilde = 0.0;
  double f_tilde = 0.0;
  std::size_t d_ent = 1;
  double e_d = 0.0;          // raw bound
  double e_d_clamped = 0.0;
  double h_tt = 0.0;         // H(A_T|B_T)
  double h_ff = 0.0;         // H(A_F|B_F)
  double max_overlap = 0.0;
  std::size_t shift_tt = 0;
  std::size_t shift_ff = 0;
};

/// Full certification on already aligned distributions.
WitnessReport certify(const JointDistribution& tt, const JointDistribution& ff,
                      const TargetState& target, double max_overlap);

}  // namespace tfq
