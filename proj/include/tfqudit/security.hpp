#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfqudit/types.hpp"

namespace tfq {

enum class ThetaForm {
  printed,      // alpha/(alpha-1) * log2(1/(4 eps_pa) + 2/alpha) + ceil(log2(1/eps_ev))
  alternative,  // alpha/(alpha-1) * log2(1/(4 eps_pa)) + 2/alpha + ceil(log2(1/eps_ev))
};

enum class Regime { asymptotic, collective, coherent };

std::string_view to_string(ThetaForm f);
std::string_view to_string(Regime r);
ThetaForm theta_form_from_string(std::string_view s);
Regime regime_from_string(std::string_view s);

struct SecurityParams {
  double eps_at = 0.5e-10;
  double eps_pa = 0.5e-10;
  double eps_ev = 0.5e-10;
  double eps_tilde = 1e-10;
  std::optional<double> alpha;  // unset: default_alpha(n, d)
  ThetaForm theta_form = ThetaForm::printed;

  void validate() const;
};

struct ProtocolConfig {
  double n_total = 1e8;         // rounds N (coincidences before sifting)
  double q = 0.5;               // probability of the frequency basis per party
  std::size_t d = 2;
  double f_ec = 1.1;
  double coincidence_rate = 0;  // rounds per second; 0 leaves rate_bps at 0

  void validate() const;
  /// Key rounds n = floor(N (1-q)^2).
  double n_key() const;
  /// Test rounds k_W = floor(N q^2).
  double n_test() const;
};

struct KeyComponents {
  double W = 0.0;
  double mu = 0.0;
  double h_min = 0.0;      // per-round entropy used by b_stat
  double b_stat = 0.0;
  double lambda_ec = 0.0;
  double theta = 0.0;
  double log2_g = 0.0;     // coherent only
  double alpha = 0.0;
  double n = 0.0;
  double k_w = 0.0;
};

struct KeyRateResult {
  Regime regime = Regime::collective;
  double ell = 0.0;            // bits
  double rate_per_round = 0.0; // ell / N
  double rate_bps = 0.0;       // ell / T with T = N / coincidence_rate
  double eps_secrecy = 0.0;
  double eps_correctness = 0.0;
  KeyComponents components;
};

/// Sum of the diagonal of an aligned frequency-basis distribution.
double w_observable(const JointDistribution& ff);

/// Hoeffding widening sqrt(2/k_w * ln(2/eps_at)).
double hoeffding_mu(double k_w, double eps_at);

/// log2 d - 2 log2(sqrt(W-mu) + sqrt((d-1)(1-W+mu))). Returned raw, also
/// below W - mu = 1/d. Throws NumericError for W - mu < 0.
double h_min(double W, double mu, std::size_t d);

/// Minimum of h_min over the confidence set [W - mu, 1]: h_min(W, mu, d)
/// when W - mu >= 1/d, otherwise 0.
double h_min_confidence(double W, double mu, std::size_t d);

/// 1 + 1/log2(2d + 1), exclusive.
double alpha_upper_bound(std::size_t d);

/// min(1 + 1/sqrt(n), alpha_upper_bound(d) - 1e-6).
double default_alpha(double n, std::size_t d);

/// n h - n (alpha - 1) log2(d + 1)^2 with h = h_min_confidence(W, mu, d).
/// Throws ConfigError unless 1 < alpha < alpha_upper_bound(d).
double b_stat(double n, double W, double mu, std::size_t d, double alpha);

double theta(double alpha, double eps_pa, double eps_ev, ThetaForm form = ThetaForm::printed);

/// n * f_ec * H(A_T|B_T).
double ec_leakage(double n, const JointDistribution& tt, double f_ec);
double ec_leakage(double n, double h_tt, double f_ec);

/// log2 binom(n + x - 1, n) via log-gamma.
double log2_postselection_factor(double n, double x);

KeyRateResult key_length_collective(const ProtocolConfig& cfg, const SecurityParams& sec,
                                    double W, double mu, double lambda_ec);
KeyRateResult key_length_coherent(const ProtocolConfig& cfg, const SecurityParams& sec,
                                  double W, double mu, double lambda_ec);

/// Infinite-block limit of the collective key rate per round:
/// max(0, h_min_confidence(W, 0, d) - f_ec H(A_T|B_T)).
double asymptotic_rate(double W, double h_tt, std::size_t d, double f_ec);
double asymptotic_rate(const JointDistribution& tt, const JointDistribution& ff, double f_ec);

/// Two-basis Shannon bound max(0, log2 d - H(A_F|B_F) - f_ec H(A_T|B_T)).
double entropic_bound(double h_tt, double h_ff, std::size_t d, double f_ec);

/// Per-dimension statistics a key-rate evaluation needs.
struct RateInputs {
  std::size_t d = 2;
  double w = 1.0;
  double h_tt = 0.0;
  double h_ff = 0.0;
  double coincidence_rate = 0.0;  // rounds per second
};

/// Key length for one parameter point. N, q and f_ec come from `protocol`;
/// d and the coincidence rate from `in`. mu follows from k_W.
KeyRateResult evaluate_key_rate(const RateInputs& in, const ProtocolConfig& protocol,
                                const SecurityParams& sec, Regime regime);

enum class SweepVariable { dimension, block_size, splitting_ratio };

std::string_view to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(std::string_view s);

struct SweepPoint {
  double value = 0.0;
  KeyRateResult result;
};

struct SweepTable {
  SweepVariable variable = SweepVariable::dimension;
  Regime regime = Regime::collective;
  std::vector<SweepPoint> points;
  std::size_t argmax = 0;  // first point with the largest rate

  const SweepPoint& best() const { return points.at(argmax); }
};

/// One entry of `inputs` per dimension.
SweepTable sweep_dimension(std::span<const RateInputs> inputs, const ProtocolConfig& protocol,
                           const SecurityParams& sec, Regime regime);
SweepTable sweep_block_size(const RateInputs& in, std::span<const double> n_grid,
                            const ProtocolConfig& protocol, const SecurityParams& sec,
                            Regime regime);
SweepTable sweep_splitting_ratio(const RateInputs& in, std::span<const double> q_grid,
                                 const ProtocolConfig& protocol, const SecurityParams& sec,
                                 Regime regime);

/// CSV with header variable,value,regime,ell,rate_per_round,rate_bps,W,mu,
/// h_min,b_stat,lambda_ec,theta,log2_g,alpha,n,k_w.
std::string sweep_csv(const SweepTable& table);

}  // namespace tfq
