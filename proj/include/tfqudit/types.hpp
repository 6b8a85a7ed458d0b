#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tfq {

/// Arrival time in integer picoseconds.
using Picoseconds = std::int64_t;

/// Detector channel labels used by the simulator and the tag file formats.
/// Other channel numbers are allowed in files; these four are the defaults.
namespace channel {
inline constexpr std::uint8_t alice_time = 0;
inline constexpr std::uint8_t alice_freq = 1;
inline constexpr std::uint8_t bob_time = 2;
inline constexpr std::uint8_t bob_freq = 3;
}  // namespace channel

enum class BasisPair { TT, FF, TF, FT };

std::string_view to_string(BasisPair basis);
BasisPair basis_pair_from_string(std::string_view name);

/// Dense row-major d x d matrix.
template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t dim, T fill = T{})
      : dim_(dim), data_(dim * dim, fill) {}
  SquareMatrix(std::size_t dim, std::vector<T> values)
      : dim_(dim), data_(std::move(values)) {}

  std::size_t dim() const noexcept { return dim_; }

  T& operator()(std::size_t row, std::size_t col) { return data_[row * dim_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const {
    return data_[row * dim_ + col];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * dim_, dim_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }

  std::span<const T> values() const noexcept { return data_; }
  std::span<T> values() noexcept { return data_; }

  bool operator==(const SquareMatrix&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<T> data_;
};

using CountGrid = SquareMatrix<std::uint64_t>;
using ProbGrid = SquareMatrix<double>;

/// Ordered detection records of one detector channel.
class TagStream {
 public:
  /// Throws DataError unless tags are sorted, nonnegative and within the
  /// acquisition window, and duration_s > 0.
  TagStream(std::uint8_t channel, std::vector<Picoseconds> tags, double duration_s);

  std::uint8_t channel() const noexcept { return channel_; }
  std::span<const Picoseconds> tags() const noexcept { return tags_; }
  std::size_t size() const noexcept { return tags_.size(); }
  bool empty() const noexcept { return tags_.empty(); }
  double duration_s() const noexcept { return duration_s_; }
  Picoseconds duration_ps() const;

 private:
  std::uint8_t channel_;
  std::vector<Picoseconds> tags_;
  double duration_s_;
};

/// Binned coincidence counts for one basis pair. Immutable after construction.
class CoincidenceMatrix {
 public:
  CoincidenceMatrix(CountGrid counts, BasisPair basis, double duration_s);

  std::size_t dim() const noexcept { return counts_.dim(); }
  const CountGrid& counts() const noexcept { return counts_; }
  std::uint64_t operator()(std::size_t i, std::size_t j) const { return counts_(i, j); }
  BasisPair basis() const noexcept { return basis_; }
  double duration_s() const noexcept { return duration_s_; }
  std::uint64_t total() const noexcept { return total_; }

 private:
  CountGrid counts_;
  BasisPair basis_;
  double duration_s_;
  std::uint64_t total_ = 0;
};

/// Normalized joint outcome distribution for one basis pair.
class JointDistribution {
 public:
  /// Throws DataError if any entry is negative or the sum is not 1.
  JointDistribution(ProbGrid probs, BasisPair basis);

  std::size_t dim() const noexcept { return probs_.dim(); }
  const ProbGrid& probs() const noexcept { return probs_; }
  double operator()(std::size_t i, std::size_t j) const { return probs_(i, j); }
  BasisPair basis() const noexcept { return basis_; }

 private:
  ProbGrid probs_;
  BasisPair basis_;
};

/// Compensated sum, used wherever probabilities of large grids are added up.
double accurate_sum(std::span<const double> values);

}  // namespace tfq
