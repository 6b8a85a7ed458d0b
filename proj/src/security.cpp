#include "tfqudit/security.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "tfqudit/error.hpp"
#include "tfqudit/witness.hpp"

namespace tfq {

namespace {

void require_probability(double eps, const char* name) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1)");
}

double rate_score(const KeyRateResult& r, double coincidence_rate) {
  return coincidence_rate > 0.0 ? r.rate_bps : r.rate_per_round;
}

void finish_rates(KeyRateResult& r, const ProtocolConfig& cfg) {
  r.rate_per_round = r.ell / cfg.n_total;
  r.rate_bps = cfg.coincidence_rate > 0.0 ? r.ell * cfg.coincidence_rate / cfg.n_total : 0.0;
}

KeyRateResult finite_key(const ProtocolConfig& cfg, const SecurityParams& sec, double W,
                         double mu, double lambda_ec, Regime regime) {
  cfg.validate();
  sec.validate();
  KeyRateResult r;
  r.regime = regime;
  auto& c = r.components;
  c.W = W;
  c.mu = mu;
  c.n = cfg.n_key();
  c.k_w = cfg.n_test();
  c.lambda_ec = lambda_ec;
  r.eps_secrecy = sec.eps_at + sec.eps_pa;
  r.eps_correctness = sec.eps_ev;
  if (c.n < 1.0) {
    finish_rates(r, cfg);
    return r;
  }
  c.alpha = sec.alpha ? *sec.alpha : default_alpha(c.n, cfg.d);
  c.h_min = h_min_confidence(W, mu, cfg.d);
  c.b_stat = b_stat(c.n, W, mu, cfg.d, c.alpha);
  c.theta = theta(c.alpha, sec.eps_pa, sec.eps_ev, sec.theta_form);
  double ell = c.b_stat - c.lambda_ec - c.theta;
  if (regime == Regime::coherent) {
    const double x = std::pow(static_cast<double>(cfg.d), 4);
    c.log2_g = log2_postselection_factor(c.n, x);
    ell -= 2.0 * c.log2_g + 2.0 * std::log2(1.0 / sec.eps_tilde);
  }
  r.ell = std::max(0.0, ell);
  finish_rates(r, cfg);
  return r;
}

template <class Vary>
SweepTable run_sweep(SweepVariable var, Regime regime, std::size_t count, Vary&& vary) {
  if (count == 0) throw ConfigError("sweep grid is empty");
  SweepTable t;
  t.variable = var;
  t.regime = regime;
  t.points.reserve(count);
  double best = -1.0;
  for (std::size_t i = 0; i < count; ++i) {
    auto [value, result, rate] = vary(i);
    const double s = rate_score(result, rate);
    if (s > best) {
      best = s;
      t.argmax = i;
    }
    t.points.push_back({value, result});
  }
  return t;
}

struct Varied {
  double value;
  KeyRateResult result;
  double coincidence_rate;
};

}  // namespace

std::string_view to_string(ThetaForm f) {
  return f == ThetaForm::printed ? "printed" : "alternative";
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::asymptotic: return "asymptotic";
    case Regime::collective: return "collective";
    case Regime::coherent: return "coherent";
  }
  return "?";
}

ThetaForm theta_form_from_string(std::string_view s) {
  if (s == "printed") return ThetaForm::printed;
  if (s == "alternative") return ThetaForm::alternative;
  throw ConfigError("unknown theta form: " + std::string(s));
}

Regime regime_from_string(std::string_view s) {
  if (s == "asymptotic") return Regime::asymptotic;
  if (s == "collective") return Regime::collective;
  if (s == "coherent") return Regime::coherent;
  throw ConfigError("unknown regime: " + std::string(s));
}

void SecurityParams::validate() const {
  require_probability(eps_at, "eps_at");
  require_probability(eps_pa, "eps_pa");
  require_probability(eps_ev, "eps_ev");
  require_probability(eps_tilde, "eps_tilde");
  if (alpha && !(*alpha > 1.0)) throw ConfigError("alpha must be > 1");
}

void ProtocolConfig::validate() const {
  if (!(n_total >= 1.0) || !std::isfinite(n_total)) throw ConfigError("n_total must be >= 1");
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("splitting ratio q must lie in (0, 1)");
  if (d < 2) throw ConfigError("dimension must be >= 2");
  if (!(f_ec >= 1.0)) throw ConfigError("f_ec must be >= 1");
  if (!(coincidence_rate >= 0.0)) throw ConfigError("coincidence_rate must be >= 0");
}

double ProtocolConfig::n_key() const { return std::floor(n_total * (1.0 - q) * (1.0 - q)); }

double ProtocolConfig::n_test() const { return std::floor(n_total * q * q); }

double w_observable(const JointDistribution& ff) {
  double w = 0.0;
  for (std::size_t i = 0; i < ff.dim(); ++i) w += ff(i, i);
  return std::min(w, 1.0);
}

double hoeffding_mu(double k_w, double eps_at) {
  require_probability(eps_at, "eps_at");
  if (!(k_w >= 1.0)) throw NumericError("Hoeffding bound needs at least one test round");
  return std::sqrt(2.0 / k_w * std::log(2.0 / eps_at));
}

double h_min(double W, double mu, std::size_t d) {
  if (d < 2) throw ConfigError("dimension must be >= 2");
  if (!std::isfinite(W) || !std::isfinite(mu)) throw NumericError("h_min of a non-finite W or mu");
  const double lower = W - mu;
  if (lower < 0.0) throw NumericError("W - mu < 0: insufficient statistics");
  if (lower > 1.0 + 1e-12) throw NumericError("W - mu exceeds 1");
  const double dd = static_cast<double>(d);
  const double rest = std::max(0.0, 1.0 - lower);
  return std::log2(dd) -
         2.0 * std::log2(std::sqrt(std::min(lower, 1.0)) + std::sqrt((dd - 1.0) * rest));
}

double h_min_confidence(double W, double mu, std::size_t d) {
  if (W - mu < 1.0 / static_cast<double>(d)) return 0.0;
  return h_min(W, mu, d);
}

double alpha_upper_bound(std::size_t d) {
  return 1.0 + 1.0 / std::log2(2.0 * static_cast<double>(d) + 1.0);
}

double default_alpha(double n, std::size_t d) {
  if (!(n >= 1.0)) throw NumericError("no key rounds left after sifting");
  return std::min(1.0 + 1.0 / std::sqrt(n), alpha_upper_bound(d) - 1e-6);
}

double b_stat(double n, double W, double mu, std::size_t d, double alpha) {
  if (!(alpha > 1.0 && alpha < alpha_upper_bound(d))) {
    throw ConfigError("alpha outside (1, 1 + 1/log2(2d+1))");
  }
  const double l = std::log2(static_cast<double>(d) + 1.0);
  return n * h_min_confidence(W, mu, d) - n * (alpha - 1.0) * l * l;
}

double theta(double alpha, double eps_pa, double eps_ev, ThetaForm form) {
  require_probability(eps_pa, "eps_pa");
  require_probability(eps_ev, "eps_ev");
  if (!(alpha > 1.0)) throw ConfigError("alpha must be > 1");
  const double factor = alpha / (alpha - 1.0);
  const double verify = std::ceil(std::log2(1.0 / eps_ev));
  if (form == ThetaForm::printed) {
    return factor * std::log2(1.0 / (4.0 * eps_pa) + 2.0 / alpha) + verify;
  }
  return factor * std::log2(1.0 / (4.0 * eps_pa)) + 2.0 / alpha + verify;
}

double ec_leakage(double n, double h_tt, double f_ec) {
  if (!(f_ec >= 1.0)) throw ConfigError("f_ec must be >= 1");
  return n * f_ec * std::max(h_tt, 0.0);
}

double ec_leakage(double n, const JointDistribution& tt, double f_ec) {
  return ec_leakage(n, conditional_entropy(tt), f_ec);
}

double log2_postselection_factor(double n, double x) {
  if (!(n >= 0.0) || !(x >= 1.0)) throw NumericError("postselection factor needs n >= 0, x >= 1");
  if (n == 0.0) return 0.0;
  const double ln = boost::math::lgamma(n + x) - boost::math::lgamma(n + 1.0) -
                    boost::math::lgamma(x);
  return std::max(0.0, ln / std::numbers::ln2);
}

KeyRateResult key_length_collective(const ProtocolConfig& cfg, const SecurityParams& sec,
                                    double W, double mu, double lambda_ec) {
  return finite_key(cfg, sec, W, mu, lambda_ec, Regime::collective);
}

KeyRateResult key_length_coherent(const ProtocolConfig& cfg, const SecurityParams& sec,
                                  double W, double mu, double lambda_ec) {
  return finite_key(cfg, sec, W, mu, lambda_ec, Regime::coherent);
}

double asymptotic_rate(double W, double h_tt, std::size_t d, double f_ec) {
  if (!(f_ec >= 1.0)) throw ConfigError("f_ec must be >= 1");
  return std::max(0.0, h_min_confidence(W, 0.0, d) - f_ec * std::max(h_tt, 0.0));
}

double asymptotic_rate(const JointDistribution& tt, const JointDistribution& ff, double f_ec) {
  if (tt.dim() != ff.dim()) throw DataError("dimension mismatch");
  return asymptotic_rate(w_observable(ff), conditional_entropy(tt), tt.dim(), f_ec);
}

double entropic_bound(double h_tt, double h_ff, std::size_t d, double f_ec) {
  return std::max(0.0, std::log2(static_cast<double>(d)) - h_ff - f_ec * h_tt);
}

KeyRateResult evaluate_key_rate(const RateInputs& in, const ProtocolConfig& protocol,
                                const SecurityParams& sec, Regime regime) {
  if (!(in.w >= 0.0 && in.w <= 1.0)) throw ConfigError("W must lie in [0, 1]");
  if (!std::isfinite(in.h_tt) || !std::isfinite(in.h_ff)) throw ConfigError("conditional entropies must be finite");
  ProtocolConfig cfg = protocol;
  cfg.d = in.d;
  cfg.coincidence_rate = in.coincidence_rate;
  cfg.validate();
  if (regime == Regime::asymptotic) {
    KeyRateResult r;
    r.regime = regime;
    const double rate = asymptotic_rate(in.w, in.h_tt, in.d, cfg.f_ec);
    r.ell = rate * cfg.n_total;
    r.components.W = in.w;
    r.components.h_min = h_min_confidence(in.w, 0.0, in.d);
    r.components.n = cfg.n_total;
    finish_rates(r, cfg);
    r.rate_per_round = rate;
    return r;
  }
  const double k_w = cfg.n_test();
  const double mu = hoeffding_mu(std::max(k_w, 1.0), sec.eps_at);
  const double lambda = ec_leakage(cfg.n_key(), in.h_tt, cfg.f_ec);
  return finite_key(cfg, sec, in.w, k_w >= 1.0 ? mu : 1.0, lambda, regime);
}

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::dimension: return "dimension";
    case SweepVariable::block_size: return "block_size";
    case SweepVariable::splitting_ratio: return "splitting_ratio";
  }
  return "?";
}

SweepVariable sweep_variable_from_string(std::string_view s) {
  if (s == "dimension") return SweepVariable::dimension;
  if (s == "block_size") return SweepVariable::block_size;
  if (s == "splitting_ratio") return SweepVariable::splitting_ratio;
  throw ConfigError("unknown sweep variable: " + std::string(s));
}

SweepTable sweep_dimension(std::span<const RateInputs> inputs, const ProtocolConfig& protocol,
                           const SecurityParams& sec, Regime regime) {
  return run_sweep(SweepVariable::dimension, regime, inputs.size(), [&](std::size_t i) {
    return Varied{static_cast<double>(inputs[i].d),
                  evaluate_key_rate(inputs[i], protocol, sec, regime), inputs[i].coincidence_rate};
  });
}

SweepTable sweep_block_size(const RateInputs& in, std::span<const double> n_grid,
                            const ProtocolConfig& protocol, const SecurityParams& sec,
                            Regime regime) {
  return run_sweep(SweepVariable::block_size, regime, n_grid.size(), [&](std::size_t i) {
    ProtocolConfig p = protocol;
    p.n_total = n_grid[i];
    return Varied{n_grid[i], evaluate_key_rate(in, p, sec, regime), in.coincidence_rate};
  });
}

SweepTable sweep_splitting_ratio(const RateInputs& in, std::span<const double> q_grid,
                                 const ProtocolConfig& protocol, const SecurityParams& sec,
                                 Regime regime) {
  return run_sweep(SweepVariable::splitting_ratio, regime, q_grid.size(), [&](std::size_t i) {
    ProtocolConfig p = protocol;
    p.q = q_grid[i];
    return Varied{q_grid[i], evaluate_key_rate(in, p, sec, regime), in.coincidence_rate};
  });
}

std::string sweep_csv(const SweepTable& table) {
  std::string out =
      "variable,value,regime,ell,rate_per_round,rate_bps,W,mu,h_min,b_stat,lambda_ec,theta,"
      "log2_g,alpha,n,k_w\n";
  char buf[512];
  for (const auto& p : table.points) {
    const auto& r = p.result;
    const auto& c = r.components;
    std::snprintf(buf, sizeof buf,
                  "%s,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g\n",
                  std::string(to_string(table.variable)).c_str(), p.value,
                  std::string(to_string(r.regime)).c_str(), r.ell, r.rate_per_round, r.rate_bps,
                  c.W, c.mu, c.h_min, c.b_stat, c.lambda_ec, c.theta, c.log2_g, c.alpha, c.n,
                  c.k_w);
    out += buf;
  }
  return out;
}

}  // namespace tfq
