#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tfqudit/coincidence.hpp"
#include "tfqudit/error.hpp"
#include "tfqudit/simulation.hpp"

using namespace tfq;

namespace {

TagStream stream(std::uint8_t ch, std::vector<Picoseconds> t, double dur = 1e-3) {
  return TagStream(ch, std::move(t), dur);
}

}  // namespace

TEST_CASE("binning: empty streams give an all-zero matrix") {
  const auto m = bin_timestamps(stream(0, {}), stream(2, {}), BinningConfig{}, 8);
  CHECK(m.dim() == 8);
  CHECK(m.total() == 0);
}

TEST_CASE("binning: single pair lands in (5, 5)") {
  BinningConfig cfg{200, 1024, 0, 1000};
  const auto full = bin_full_frame(stream(0, {1000}), stream(2, {1010}), cfg);
  CHECK(full.total() == 1);
  CHECK(full(5, 5) == 1);
}

TEST_CASE("binning: config validation") {
  CHECK_THROWS_AS(BinningConfig({0, 16, 0, 0}).validate(), ConfigError);
  CHECK_THROWS_AS(BinningConfig({10, 1, 0, 0}).validate(), ConfigError);
  CHECK_THROWS_AS(BinningConfig({10, 16, 0, 161}).validate(), ConfigError);
  CHECK_NOTHROW(BinningConfig::half_frame(10, 16).validate());
}

TEST_CASE("tag streams reject unsorted or out-of-window tags") {
  CHECK_THROWS_AS(stream(0, {5, 3}), DataError);
  CHECK_THROWS_AS(stream(0, {-1}), DataError);
  CHECK_THROWS_AS(TagStream(0, {1}, 0.0), DataError);
}

TEST_CASE("pairing: nearest neighbour, each tag used once") {
  // b=105 is closer to a=100 than a=112 is; a=112 then takes b=118
  const auto pairs = pair_coincidences(stream(0, {100, 112}), stream(2, {105, 118}), 20);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == std::pair<Picoseconds, Picoseconds>{100, 105});
  CHECK(pairs[1] == std::pair<Picoseconds, Picoseconds>{112, 118});

  const auto one = pair_coincidences(stream(0, {100}), stream(2, {90, 104}), 20);
  REQUIRE(one.size() == 1);
  CHECK(one[0].second == 104);
}

TEST_CASE("binning: zero-jitter ideal pairs are strictly diagonal") {
  const auto out = sim::simulate(sim::ideal(1e6, 1.0, 3));
  // zero jitter: partners arrive at the same picosecond, so a zero-width
  // window keeps exactly the true pairs
  const auto full = bin_full_frame(out.alice_time(), out.bob_time(), BinningConfig{200, 1024, 0, 0});
  REQUIRE(full.total() > 200'000);
  std::uint64_t off = 0;
  for (std::size_t i = 0; i < full.dim(); ++i)
    for (std::size_t j = 0; j < full.dim(); ++j)
      if (i != j) off += full(i, j);
  CHECK(off == 0);
}

TEST_CASE("binning: strictly diagonal for well separated pairs") {
  std::vector<Picoseconds> a, b;
  for (Picoseconds t = 1000; t < 100'000'000; t += 1'000'003) {
    a.push_back(t);
    b.push_back(t);
  }
  const auto full = bin_full_frame(stream(0, a), stream(2, b), BinningConfig::half_frame(200, 1024));
  std::uint64_t diag = 0;
  for (std::size_t i = 0; i < full.dim(); ++i) diag += full(i, i);
  CHECK(diag == a.size());
  CHECK(full.total() == a.size());
}

TEST_CASE("subspace extraction") {
  SUBCASE("d = N is the identity") {
    const auto m = oracle::counts({{1, 2}, {3, 4}});
    CHECK(subspace_extract(m, 2).counts() == m.counts());
  }
  SUBCASE("unique block at [10, 12]") {
    CountGrid g(16);
    for (std::size_t i = 10; i <= 12; ++i)
      for (std::size_t j = 10; j <= 12; ++j) g(i, j) = 5;
    const CoincidenceMatrix m(std::move(g), BasisPair::TT, 1.0);
    CHECK(best_window_start(m, 3) == 10);
    CHECK(subspace_extract(m, 3).total() == 45);
  }
  SUBCASE("matches exhaustive scan on random sparse matrices") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> cell(0, 15), val(1, 9);
    for (int trial = 0; trial < 200; ++trial) {
      CountGrid g(16);
      for (int k = 0; k < 20; ++k) g(cell(rng), cell(rng)) += val(rng);
      const CoincidenceMatrix m(std::move(g), BasisPair::TT, 1.0);
      for (std::size_t d : {2u, 5u, 9u}) CHECK(best_window_start(m, d) == oracle::best_window_scan(m, d));
    }
  }
  SUBCASE("extracted total dominates every window, N <= 64") {
    std::mt19937_64 rng(5);
    std::poisson_distribution<int> pois(0.3);
    CountGrid g(64);
    for (auto& x : g.values()) x = pois(rng);
    const CoincidenceMatrix m(std::move(g), BasisPair::TT, 1.0);
    for (std::size_t d = 2; d <= 64; d += 7) {
      const auto best = subspace_extract(m, d).total();
      for (std::size_t s = 0; s + d <= 64; ++s) CHECK(submatrix(m, s, d).total() <= best);
    }
  }
  CHECK_THROWS_AS(subspace_extract(oracle::counts({{1, 2}, {3, 4}}), 3), ConfigError);
}

TEST_CASE("normalize and marginals") {
  const auto a = normalize(oracle::counts({{1, 0}, {0, 1}}));
  CHECK(a(0, 0) == 0.5);
  CHECK(a(0, 1) == 0.0);
  const auto b = normalize(oracle::counts({{3, 1}, {1, 3}}));
  CHECK(b(0, 0) == 0.375);
  CHECK(b(1, 0) == 0.125);
  CHECK_THROWS_AS(normalize(oracle::counts({{0, 0}, {0, 0}})), DataError);

  const auto ma = marginals(a);
  CHECK(ma.rows == std::vector<double>{0.5, 0.5});
  CHECK(ma.cols == std::vector<double>{0.5, 0.5});
  const auto mu = marginals(normalize(oracle::counts({{1, 1}, {1, 1}})));
  CHECK(mu.rows == std::vector<double>{0.5, 0.5});

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> val(0, 1000);
  CountGrid g(37);
  for (auto& x : g.values()) x = val(rng);
  const CoincidenceMatrix m(g, BasisPair::TT, 1.0);
  const auto p = normalize(m);
  CHECK(std::abs(accurate_sum(p.probs().values()) - 1.0) < 1e-12);
  const auto mg = marginals(p);
  CHECK(std::abs(accurate_sum(mg.rows) - 1.0) < 1e-12);
  CHECK(std::abs(accurate_sum(mg.cols) - 1.0) < 1e-12);

  // scale invariance
  CountGrid g3 = g;
  for (auto& x : g3.values()) x *= 3;
  const auto p3 = normalize(CoincidenceMatrix(g3, BasisPair::TT, 1.0));
  for (std::size_t k = 0; k < g.values().size(); ++k)
    CHECK(p3.probs().values()[k] == doctest::Approx(p.probs().values()[k]).epsilon(1e-15));
}

TEST_CASE("binning is translation covariant and additive over segments") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<Picoseconds> t(0, 50'000'000);
  std::normal_distribution<double> jit(0, 300);
  std::vector<Picoseconds> a, b;
  for (int i = 0; i < 20000; ++i) a.push_back(t(rng));
  std::sort(a.begin(), a.end());
  for (auto x : a) b.push_back(std::max<Picoseconds>(0, x + static_cast<Picoseconds>(jit(rng))));
  std::sort(b.begin(), b.end());
  const BinningConfig cfg = BinningConfig::half_frame(200, 64);
  const auto base = bin_full_frame(stream(0, a, 1e-4), stream(2, b, 1e-4), cfg);

  const Picoseconds k = 3;
  std::vector<Picoseconds> a2 = a, b2 = b;
  for (auto& x : a2) x += k * cfg.tau_ps;
  for (auto& x : b2) x += k * cfg.tau_ps;
  const auto shifted = bin_full_frame(stream(0, a2, 1e-4), stream(2, b2, 1e-4), cfg);
  CHECK(shifted.total() == base.total());
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) CHECK(shifted((i + k) % 64, (j + k) % 64) == base(i, j));

  // move the upper segment by whole frames, further than the pairing window,
  // so bin indices are kept and no pair straddles the cut
  std::vector<Picoseconds> a_lo, a_hi, b_lo, b_hi;
  const Picoseconds cut = 25'000'000;
  const Picoseconds shift = (2 * cfg.pairing_window_ps / cfg.frame_ps() + 1) * cfg.frame_ps();
  for (auto x : a) (x < cut ? a_lo : a_hi).push_back(x < cut ? x : x + shift);
  for (auto x : b) (x < cut ? b_lo : b_hi).push_back(x < cut ? x : x + shift);
  std::vector<Picoseconds> a_all = a_lo, b_all = b_lo;
  a_all.insert(a_all.end(), a_hi.begin(), a_hi.end());
  b_all.insert(b_all.end(), b_hi.begin(), b_hi.end());
  const auto whole = bin_full_frame(stream(0, a_all, 1e-4), stream(2, b_all, 1e-4), cfg);
  const auto lo = bin_full_frame(stream(0, a_lo, 1e-4), stream(2, b_lo, 1e-4), cfg);
  const auto hi = bin_full_frame(stream(0, a_hi, 1e-4), stream(2, b_hi, 1e-4), cfg);
  CHECK(merge(lo, hi).counts() == whole.counts());
}

TEST_CASE("peak FWHM") {
  SUBCASE("Gaussian offsets, sigma = 14 ps") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 14.0);
    std::vector<Picoseconds> diffs;
    for (int i = 0; i < 200'000; ++i) diffs.push_back(std::llround(g(rng)));
    CHECK(histogram_fwhm(diffs, 1) == doctest::Approx(2.3548200450309493 * 14).epsilon(0.05));
  }
  SUBCASE("zero jitter gives a delta peak") {
    std::vector<Picoseconds> a;
    for (Picoseconds t = 0; t < 1'000'000; t += 5000) a.push_back(t);
    CHECK(peak_fwhm(stream(0, a), stream(2, a), 4) <= 4.0);
  }
  CHECK_THROWS_AS(histogram_fwhm(std::vector<Picoseconds>{1, 2, 3}, 1), DataError);
}
