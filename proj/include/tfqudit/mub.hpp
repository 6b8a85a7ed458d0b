#pragma once

#include <cstddef>

#include "tfqudit/types.hpp"

namespace tfq {

struct MubReport {
  double delta_m = 0.0;
  std::size_t d = 0;
  BasisPair basis = BasisPair::TF;
  double max_overlap_hypothesis = 0.0;  // 1/d
};

/// Half the Frobenius distance between a cross-basis distribution and the
/// uniform matrix (1/d^2) * ones.
MubReport delta_m(const JointDistribution& cross);

struct ConsistencyResult {
  bool pass = false;
  double statistic = 0.0;  // Pearson chi-square against the uniform multinomial
  double dof = 0.0;
  double p_value = 1.0;
};

/// Pearson chi-square goodness-of-fit of cross-basis counts against the
/// uniform multinomial; passes iff p-value >= alpha.
ConsistencyResult mub_consistency_test(const CoincidenceMatrix& cross, double alpha);

struct MubThresholds {
  double max_delta_m = 0.05;
  double alpha = 0.01;
};

enum class MubVerdict { adopted, rejected, insufficient_data };

struct MubAssessment {
  MubReport report;
  ConsistencyResult test;
  MubVerdict verdict = MubVerdict::insufficient_data;
  /// Overlap used downstream: 1/d unless the hypothesis is rejected, in which
  /// case the largest empirical conditional probability max_ij p(j|i).
  double max_overlap = 0.0;
};

MubAssessment assess_mub(const CoincidenceMatrix& cross, const MubThresholds& thresholds = {});

const char* to_string(MubVerdict v);

}  // namespace tfq
