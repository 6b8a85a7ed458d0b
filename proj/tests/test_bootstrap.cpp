#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tfqudit/bootstrap.hpp"
#include "tfqudit/error.hpp"

using namespace tfq;

namespace {

double total(std::span<const CoincidenceMatrix> m) { return static_cast<double>(m[0].total()); }

CoincidenceMatrix single_cell(std::uint64_t n) { return oracle::counts({{n, 0}, {0, 0}}); }

}  // namespace

TEST_CASE("bootstrap of a constant statistic has zero spread") {
  const std::vector<CoincidenceMatrix> m{single_cell(100)};
  BootstrapConfig cfg;
  cfg.n_samples = 200;
  const auto s = poisson_bootstrap(m, Statistic([](auto) { return 3.5; }), cfg);
  CHECK(s.mean == 3.5);
  CHECK(s.sigma == 0.0);
  CHECK(s.lower == 3.5);
  CHECK(s.n_ok == 200);
}

TEST_CASE("Poisson sigma of the total count is sqrt(lambda)") {
  const std::vector<CoincidenceMatrix> m{oracle::counts({{2500, 2500}, {2500, 2500}})};
  BootstrapConfig cfg;
  cfg.n_samples = 2000;
  cfg.seed = 12;
  const auto s = poisson_bootstrap(m, Statistic(total), cfg);
  CHECK(s.sigma == doctest::Approx(100.0).epsilon(0.05));
  CHECK(s.mean == doctest::Approx(1e4).epsilon(0.01));
  CHECK(s.upper - s.lower == doctest::Approx(6 * s.sigma));
}

TEST_CASE("bootstrap is deterministic per seed and independent of thread count") {
  const std::vector<CoincidenceMatrix> m{oracle::counts({{40, 3}, {5, 60}})};
  auto stat = Statistic([](std::span<const CoincidenceMatrix> x) {
    return static_cast<double>(x[0](0, 0)) / static_cast<double>(x[0].total());
  });
  BootstrapConfig cfg;
  cfg.n_samples = 500;
  cfg.seed = 99;
  cfg.threads = 1;
  const auto a = poisson_bootstrap(m, stat, cfg);
  cfg.threads = 4;
  const auto b = poisson_bootstrap(m, stat, cfg);
  CHECK(a.mean == b.mean);
  CHECK(a.sigma == b.sigma);
  CHECK(a.min == b.min);
  cfg.seed = 100;
  const auto c = poisson_bootstrap(m, stat, cfg);
  CHECK(c.sigma != a.sigma);
}

TEST_CASE("failed replicates are excluded and counted") {
  const std::vector<CoincidenceMatrix> m{single_cell(2)};
  BootstrapConfig cfg;
  cfg.n_samples = 300;
  // P(Poisson(2) = 0) ~ 0.135
  const auto s = poisson_bootstrap(m, Statistic([](std::span<const CoincidenceMatrix> x) {
                                     if (x[0].total() == 0) throw DataError("empty");
                                     return 1.0;
                                   }),
                                   cfg);
  CHECK(s.n_failed > 10);
  CHECK(s.n_ok + s.n_failed == 300);
}

TEST_CASE("bootstrap config validation") {
  const std::vector<CoincidenceMatrix> m{single_cell(2)};
  BootstrapConfig cfg;
  cfg.n_samples = 10;
  CHECK_THROWS_AS(poisson_bootstrap(m, Statistic(total), cfg), ConfigError);
  cfg.n_samples = 100;
  cfg.sigma_multiplier = 0;
  CHECK_THROWS_AS(poisson_bootstrap(m, Statistic(total), cfg), ConfigError);
}

TEST_CASE("3-sigma interval covers the true mean in >= 99% of meta-trials") {
  // true lambda = 400 per cell; each trial observes one Poisson draw and
  // bootstraps around it
  std::mt19937_64 rng(2024);
  std::poisson_distribution<std::uint64_t> pois(400.0);
  int covered = 0;
  const int trials = 500;
  BootstrapConfig cfg;
  cfg.n_samples = 200;
  cfg.threads = 1;
  for (int t = 0; t < trials; ++t) {
    const std::vector<CoincidenceMatrix> m{oracle::counts({{pois(rng), pois(rng)}, {pois(rng), pois(rng)}})};
    cfg.seed = static_cast<std::uint64_t>(t);
    const auto s = poisson_bootstrap(m, Statistic(total), cfg);
    covered += (s.lower <= 1600.0 && 1600.0 <= s.upper) ? 1 : 0;
  }
  CHECK(covered >= 495);
}
