#include "tfqudit/mub.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "tfqudit/coincidence.hpp"
#include "tfqudit/error.hpp"

namespace tfq {

MubReport delta_m(const JointDistribution& cross) {
  const std::size_t d = cross.dim();
  const double uniform = 1.0 / static_cast<double>(d * d);
  double sum_sq = 0.0;
  for (double p : cross.probs().values()) {
    const double diff = p - uniform;
    sum_sq += diff * diff;
  }
  return {0.5 * std::sqrt(sum_sq), d, cross.basis(), 1.0 / static_cast<double>(d)};
}

ConsistencyResult mub_consistency_test(const CoincidenceMatrix& cross, double alpha) {
  if (cross.total() == 0) throw DataError("consistency test needs a nonempty matrix");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("significance level must lie in (0, 1)");
  const double cells = static_cast<double>(cross.dim() * cross.dim());
  const double expected = static_cast<double>(cross.total()) / cells;
  double stat = 0.0;
  for (auto c : cross.counts().values()) {
    const double diff = static_cast<double>(c) - expected;
    stat += diff * diff;
  }
  stat /= expected;
  ConsistencyResult r;
  r.statistic = stat;
  r.dof = cells - 1.0;
  r.p_value = boost::math::gamma_q(r.dof / 2.0, stat / 2.0);
  r.pass = r.p_value >= alpha;
  return r;
}

MubAssessment assess_mub(const CoincidenceMatrix& cross, const MubThresholds& thresholds) {
  MubAssessment a;
  const std::size_t d = cross.dim();
  a.report = MubReport{0.0, d, cross.basis(), 1.0 / static_cast<double>(d)};
  a.max_overlap = 1.0 / static_cast<double>(d);
  if (cross.total() == 0) return a;

  a.report = delta_m(normalize(cross));
  a.test = mub_consistency_test(cross, thresholds.alpha);
  if (a.report.delta_m <= thresholds.max_delta_m && a.test.pass) {
    a.verdict = MubVerdict::adopted;
    return a;
  }
  a.verdict = MubVerdict::rejected;
  double worst = a.max_overlap;
  for (std::size_t i = 0; i < d; ++i) {
    const auto row = cross.counts().row(i);
    std::uint64_t row_total = 0;
    std::uint64_t row_max = 0;
    for (auto c : row) {
      row_total += c;
      row_max = std::max(row_max, c);
    }
    if (row_total > 0) {
      worst = std::max(worst, static_cast<double>(row_max) / static_cast<double>(row_total));
    }
  }
  a.max_overlap = worst;
  return a;
}

const char* to_string(MubVerdict v) {
  switch (v) {
    case MubVerdict::adopted: return "adopted";
    case MubVerdict::rejected: return "rejected";
    case MubVerdict::insufficient_data: return "insufficient_data";
  }
  return "?";
}

}  // namespace tfq
