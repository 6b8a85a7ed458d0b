#include "tfqudit/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tfqudit/error.hpp"

namespace tfq {

std::string_view to_string(BasisPair basis) {
  switch (basis) {
    case BasisPair::TT: return "TT";
    case BasisPair::FF: return "FF";
    case BasisPair::TF: return "TF";
    case BasisPair::FT: return "FT";
  }
  return "??";
}

BasisPair basis_pair_from_string(std::string_view name) {
  if (name == "TT") return BasisPair::TT;
  if (name == "FF") return BasisPair::FF;
  if (name == "TF") return BasisPair::TF;
  if (name == "FT") return BasisPair::FT;
  throw DataError("unknown basis pair '" + std::string(name) + "'");
}

TagStream::TagStream(std::uint8_t channel, std::vector<Picoseconds> tags, double duration_s)
    : channel_(channel), tags_(std::move(tags)), duration_s_(duration_s) {
  if (!(duration_s_ > 0.0) || !std::isfinite(duration_s_)) {
    throw DataError("tag stream duration must be positive");
  }
  if (!std::is_sorted(tags_.begin(), tags_.end())) {
    throw DataError("tag stream for channel " + std::to_string(channel_) + " is not sorted");
  }
  if (!tags_.empty() && (tags_.front() < 0 || tags_.back() > duration_ps())) {
    throw DataError("tag stream for channel " + std::to_string(channel_) +
                    " has tags outside [0, duration]");
  }
}

Picoseconds TagStream::duration_ps() const {
  return static_cast<Picoseconds>(std::llround(duration_s_ * 1e12));
}

CoincidenceMatrix::CoincidenceMatrix(CountGrid counts, BasisPair basis, double duration_s)
    : counts_(std::move(counts)), basis_(basis), duration_s_(duration_s) {
  if (counts_.dim() < 2) throw DataError("coincidence matrix dimension must be >= 2");
  const auto v = counts_.values();
  total_ = std::accumulate(v.begin(), v.end(), std::uint64_t{0});
}

double accurate_sum(std::span<const double> values) {
  // Neumaier summation
  double sum = 0.0;
  double comp = 0.0;
  for (double x : values) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

JointDistribution::JointDistribution(ProbGrid probs, BasisPair basis)
    : probs_(std::move(probs)), basis_(basis) {
  if (probs_.dim() < 1) throw DataError("joint distribution must be non-empty");
  for (double p : probs_.values()) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DataError("joint distribution entries must be finite and nonnegative");
    }
  }
  const double total = accurate_sum(probs_.values());
  if (std::abs(total - 1.0) > 1e-10) {
    throw DataError("joint distribution does not sum to 1 (sum = " + std::to_string(total) + ")");
  }
}

}  // namespace tfq
