#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tfqudit/coincidence.hpp"
#include "tfqudit/error.hpp"
#include "tfqudit/witness.hpp"

using namespace tfq;

namespace {

JointDistribution ideal(std::size_t d, BasisPair b = BasisPair::TT) {
  ProbGrid p(d);
  for (std::size_t i = 0; i < d; ++i) p(i, i) = 1.0 / static_cast<double>(d);
  return JointDistribution(std::move(p), b);
}

JointDistribution uniform(std::size_t d, BasisPair b = BasisPair::TT) {
  return JointDistribution(ProbGrid(d, 1.0 / static_cast<double>(d * d)), b);
}

// (1 - noise) * ideal + noise * uniform
JointDistribution noisy(std::size_t d, double noise) {
  ProbGrid p(d, noise / static_cast<double>(d * d));
  for (std::size_t i = 0; i < d; ++i) p(i, i) += (1 - noise) / static_cast<double>(d);
  return JointDistribution(std::move(p), BasisPair::TT);
}

JointDistribution cyclic_relabel(const JointDistribution& j, std::size_t s) {
  const std::size_t d = j.dim();
  ProbGrid p(d);
  for (std::size_t m = 0; m < d; ++m)
    for (std::size_t n = 0; n < d; ++n) p((m + s) % d, (n + s) % d) = j(m, n);
  return JointDistribution(std::move(p), j.basis());
}

}  // namespace

TEST_CASE("F1") {
  const auto me2 = TargetState::maximally_entangled(2);
  CHECK(fidelity_diagonal(ideal(7), TargetState::maximally_entangled(7)) == doctest::Approx(1.0 / 7));
  CHECK(fidelity_diagonal(oracle::from_grid({{0.4, 0.1}, {0.1, 0.4}}), me2) == doctest::Approx(0.4));

  std::mt19937_64 rng(1);
  const auto g = oracle::random_grid(5, rng);
  const TargetState t({0.7, 0.5, 0.4, 0.3, std::sqrt(1 - 0.49 - 0.25 - 0.16 - 0.09)});
  CHECK(fidelity_diagonal(oracle::from_grid(g), t) ==
        doctest::Approx(oracle::f1_direct(g, t.coeffs())).epsilon(1e-14));
  CHECK_THROWS_AS(fidelity_diagonal(ideal(4), me2), DataError);
}

TEST_CASE("F2 tilde closed cases") {
  for (std::size_t d : {2u, 3u, 8u, 61u}) {
    CHECK(f2_tilde(ideal(d), ideal(d, BasisPair::FF)) == doctest::Approx(1.0 - 1.0 / d).epsilon(1e-14));
  }
  // uniform tt and ff: each of the d - 1 offset classes contributes (1 - 1/d) / d
  for (std::size_t d : {2u, 3u, 10u}) {
    const double dd = static_cast<double>(d);
    CHECK(f2_tilde(uniform(d), uniform(d, BasisPair::FF)) ==
          doctest::Approx(-(dd - 1) * (dd - 1) / (dd * dd)).epsilon(1e-14));
  }
  CHECK(f2_tilde(uniform(3), uniform(3, BasisPair::FF)) == doctest::Approx(-4.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("F2 tilde: offset-class reduction equals the quadruple loop") {
  std::mt19937_64 rng(20240517);
  for (std::size_t d = 2; d <= 8; ++d) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto tt = oracle::random_grid(d, rng);
      const auto ff = oracle::random_grid(d, rng);
      const double fast = f2_tilde(oracle::from_grid(tt), oracle::from_grid(ff, BasisPair::FF));
      CHECK(std::abs(fast - oracle::f2_tilde_bruteforce(tt, ff)) <= 1e-10);
    }
  }
}

TEST_CASE("Schmidt number certification") {
  CHECK(certify_schmidt_number(0.654, TargetState::maximally_entangled(1021)) == 668);
  for (std::size_t d : {2u, 17u, 1021u}) {
    const auto t = TargetState::maximally_entangled(d);
    CHECK(certify_schmidt_number(1.0, t) == d);
    CHECK(certify_schmidt_number(1.0 / d, t) == 1);
    CHECK(certify_schmidt_number(0.0, t) == 1);
  }
  // boundary: F equal to B_k does not certify k + 1
  CHECK(certify_schmidt_number(3.0 / 8.0, TargetState::maximally_entangled(8)) == 3);
  CHECK(certify_schmidt_number(3.0 / 8.0 + 1e-12, TargetState::maximally_entangled(8)) == 4);

  // nonuniform target: B_k is the cumulative squared coefficient
  const TargetState t({std::sqrt(0.5), std::sqrt(0.3), std::sqrt(0.2)});
  CHECK(certify_schmidt_number(0.49, t) == 1);
  CHECK(certify_schmidt_number(0.51, t) == 2);
  CHECK(certify_schmidt_number(0.81, t) == 3);
  CHECK_THROWS_AS(TargetState({0.5, 0.9}), ConfigError);
  CHECK_THROWS_AS(TargetState({0.5, 0.5}), ConfigError);
}

TEST_CASE("certification is monotone in F") {
  const auto t = TargetState::maximally_entangled(331);
  std::size_t prev = 1;
  for (double f = 0.0; f <= 1.0; f += 1e-4) {
    const auto k = certify_schmidt_number(f, t);
    CHECK(k >= prev);
    prev = k;
  }
}

TEST_CASE("conditional entropy") {
  CHECK(conditional_entropy(ideal(9)) == doctest::Approx(0.0));
  CHECK(conditional_entropy(uniform(9)) == doctest::Approx(std::log2(9.0)));
  const oracle::Grid g{{0.45, 0.05}, {0.05, 0.45}};
  CHECK(conditional_entropy(oracle::from_grid(g)) == doctest::Approx(0.469).epsilon(1e-3));
  CHECK(conditional_entropy(oracle::from_grid(g)) == doctest::Approx(oracle::conditional_entropy(g)).epsilon(1e-14));
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto r = oracle::random_grid(6, rng);
    CHECK(conditional_entropy(oracle::from_grid(r)) == doctest::Approx(oracle::conditional_entropy(r)).epsilon(1e-12));
  }
}

TEST_CASE("distillable entanglement bound") {
  for (std::size_t d : {2u, 8u, 331u}) {
    const auto e = distillable_entanglement(ideal(d), ideal(d, BasisPair::FF), 1.0 / d);
    CHECK(e.raw == doctest::Approx(std::log2(static_cast<double>(d))).epsilon(1e-14));
  }
  const auto g = oracle::from_grid({{0.45, 0.05}, {0.05, 0.45}});
  const auto e = distillable_entanglement(g, g, 0.5);
  CHECK(e.raw == doctest::Approx(1 - 2 * oracle::conditional_entropy({{0.45, 0.05}, {0.05, 0.45}})));
  CHECK(e.raw == doctest::Approx(0.062).epsilon(0.02));

  const auto bad = distillable_entanglement(uniform(4), uniform(4), 0.25);
  CHECK(bad.raw < 0);
  CHECK(bad.clamped == 0.0);
  CHECK_THROWS_AS(distillable_entanglement(ideal(4), ideal(4), 0.0), NumericError);

  // symmetric noise strictly lowers the bound
  double prev = distillable_entanglement(ideal(16), ideal(16), 1.0 / 16).raw;
  for (double noise : {0.01, 0.05, 0.2, 0.5}) {
    const double now = distillable_entanglement(noisy(16, noise), noisy(16, noise), 1.0 / 16).raw;
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("diagonal alignment") {
  const auto a = align_diagonal(ideal(7));
  CHECK(a.shift == 0);
  CHECK(a.aligned.probs() == ideal(7).probs());

  ProbGrid p(7);
  for (std::size_t m = 0; m < 7; ++m) p(m, (m + 3) % 7) = 1.0 / 7;
  const auto b = align_diagonal(JointDistribution(p, BasisPair::TT));
  CHECK(b.shift == 3);
  CHECK(b.aligned.probs() == ideal(7).probs());

  std::mt19937_64 rng(4);
  for (int i = 0; i < 30; ++i) {
    const auto g = oracle::random_grid(9, rng);
    const auto j = oracle::from_grid(g);
    const auto al = align_diagonal(j);
    double before = 0, after = 0, best = 0;
    for (std::size_t m = 0; m < 9; ++m) before += j(m, m), after += al.aligned(m, m);
    for (std::size_t s = 0; s < 9; ++s) {
      double t = 0;
      for (std::size_t m = 0; m < 9; ++m) t += j(m, (m + s) % 9);
      best = std::max(best, t);
    }
    CHECK(after >= before);
    CHECK(after == doctest::Approx(best).epsilon(1e-14));
  }

  // count-matrix version agrees
  CountGrid c(5);
  for (std::size_t m = 0; m < 5; ++m) c(m, (m + 2) % 5) = 10;
  const CoincidenceMatrix cm(c, BasisPair::FF, 1.0);
  CHECK(best_diagonal_shift(cm) == 2);
  CHECK(shift_columns(cm, 2)(4, 4) == 10);
}

TEST_CASE("full certification invariants") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 2 + i % 9;
    const auto tt = oracle::from_grid(oracle::random_grid(d, rng));
    const auto ff = oracle::from_grid(oracle::random_grid(d, rng), BasisPair::FF);
    const auto r = certify(tt, ff, TargetState::maximally_entangled(d), 1.0 / d);
    CHECK(r.f_tilde == doctest::Approx(r.f1 + r.f2_tilde).epsilon(1e-15));
    CHECK(r.f_tilde <= 1 + 1e-9);
    CHECK(r.d_ent >= 1);
    CHECK(r.d_ent <= d);
    CHECK(r.e_d <= std::log2(static_cast<double>(d)) + 1e-12);

    // same cyclic relabeling on both parties
    const std::size_t s = 1 + i % (d - 1 > 0 ? d - 1 : 1);
    const auto r2 = certify(cyclic_relabel(tt, s), cyclic_relabel(ff, s),
                            TargetState::maximally_entangled(d), 1.0 / d);
    CHECK(r2.f1 == doctest::Approx(r.f1).epsilon(1e-12));
    CHECK(r2.f2_tilde == doctest::Approx(r.f2_tilde).epsilon(1e-12));
    CHECK(r2.h_tt == doctest::Approx(r.h_tt).epsilon(1e-12));
    CHECK(r2.e_d == doctest::Approx(r.e_d).epsilon(1e-12));
  }
  const auto id = certify(ideal(16), ideal(16, BasisPair::FF), TargetState::maximally_entangled(16), 1.0 / 16);
  CHECK(id.f_tilde == 1.0);
  CHECK(id.d_ent == 16);
  CHECK(id.e_d == doctest::Approx(4.0));
}
