#include "tfqudit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tfqudit/error.hpp"
#include "tfqudit/rng.hpp"

namespace tfq::sim {

double LossBudget::arm_path_loss_db() const {
  return fiber_coupling + fiber_bench + longpass_filter + bandpass_filter +
         polarization_controller + polarizing_splitter + connectors;
}

namespace {

double db_to_transmission(double db) { return std::pow(10.0, -db / 10.0); }

double effective_dispersion(const SimConfig& cfg, int arm) {
  const double d = cfg.dispersion[arm].dispersion_ps_per_nm;
  return arm == 1 ? d - cfg.residual_dispersion_ps_per_nm : d;
}

void check(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("simulation config: ") + what);
}

}  // namespace

void SimConfig::validate() const {
  check(source.pair_rate > 0.0 && std::isfinite(source.pair_rate), "pair_rate must be > 0");
  check(source.spectral_fwhm_ghz > 0.0, "spectral_fwhm must be > 0");
  check(source.correlation_time_ps >= 0.0, "correlation_time must be >= 0");
  check(source.center_wavelength_nm > 0.0, "center wavelength must be > 0");
  for (const auto& det : detectors) {
    check(det.efficiency >= 0.0 && det.efficiency <= 1.0, "efficiency must lie in [0, 1]");
    check(det.jitter_fwhm_ps >= 0.0, "jitter_fwhm must be >= 0");
    check(det.dark_rate >= 0.0, "dark_rate must be >= 0");
  }
  for (int arm = 0; arm < 2; ++arm) {
    check(dispersion[arm].loss_db >= 0.0, "dispersion loss must be >= 0 dB");
    check(path_loss_db[arm] >= 0.0, "path loss must be >= 0 dB");
    check(std::abs(effective_dispersion(*this, arm)) > 0.0,
          "dispersion must be nonzero when the F basis is used");
  }
  check(basis_split > 0.0 && basis_split < 1.0, "basis_split must lie in (0, 1)");
  check(duration_s > 0.0 && std::isfinite(duration_s), "duration must be > 0");
  check(segment_s > 0.0, "segment length must be > 0");
}

double SimConfig::path_efficiency(int arm, bool freq_basis) const {
  const auto& det = detectors[arm * 2 + (freq_basis ? 1 : 0)];
  double eta = db_to_transmission(path_loss_db[arm]) * det.efficiency;
  if (freq_basis) eta *= db_to_transmission(dispersion[arm].loss_db);
  return eta;
}

double bandwidth_nm(double fwhm_ghz, double center_nm) {
  return center_nm * center_nm * fwhm_ghz / speed_of_light;
}

SimOutput simulate(const SimConfig& cfg) {
  cfg.validate();

  const double duration_ps = cfg.duration_s * 1e12;
  const Picoseconds duration_int = static_cast<Picoseconds>(std::llround(duration_ps));
  const double lambda_sigma_nm =
      bandwidth_nm(cfg.source.spectral_fwhm_ghz, cfg.source.center_wavelength_nm) / fwhm_per_sigma;
  const double corr_sigma = cfg.source.correlation_time_ps / fwhm_per_sigma;
  const std::array<double, 2> disp{effective_dispersion(cfg, 0), effective_dispersion(cfg, 1)};
  const std::array<double, 2> path{db_to_transmission(cfg.path_loss_db[0]),
                                   db_to_transmission(cfg.path_loss_db[1])};
  const std::array<double, 2> disp_t{db_to_transmission(cfg.dispersion[0].loss_db),
                                     db_to_transmission(cfg.dispersion[1].loss_db)};
  std::array<double, 4> jitter_sigma{};
  for (int k = 0; k < 4; ++k) jitter_sigma[k] = cfg.detectors[k].jitter_fwhm_ps / fwhm_per_sigma;

  std::array<std::vector<Picoseconds>, 4> tags;
  const auto n_segments = static_cast<std::uint64_t>(std::ceil(cfg.duration_s / cfg.segment_s));

  for (std::uint64_t seg = 0; seg < n_segments; ++seg) {
    std::mt19937_64 rng(derive_seed(cfg.seed, seg));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double start = static_cast<double>(seg) * cfg.segment_s * 1e12;
    const double stop = std::min(duration_ps, start + cfg.segment_s * 1e12);
    const double len_s = (stop - start) * 1e-12;

    std::poisson_distribution<std::uint64_t> n_pairs_dist(cfg.source.pair_rate * len_s);
    const std::uint64_t n_pairs = n_pairs_dist(rng);
    for (std::uint64_t p = 0; p < n_pairs; ++p) {
      const double t0 = start + uni(rng) * (stop - start);
      const double delay = corr_sigma * normal(rng);
      const double dlambda = lambda_sigma_nm * normal(rng);
      // signal to Alice, idler to Bob; anti-correlated detuning
      const std::array<double, 2> t_arm{t0 + 0.5 * delay, t0 - 0.5 * delay};
      const std::array<double, 2> dl_arm{dlambda, -dlambda};
      for (int arm = 0; arm < 2; ++arm) {
        if (uni(rng) >= path[arm]) continue;
        const bool freq = uni(rng) < cfg.basis_split;
        if (freq && uni(rng) >= disp_t[arm]) continue;
        const int det = arm * 2 + (freq ? 1 : 0);
        if (uni(rng) >= cfg.detectors[det].efficiency) continue;
        double t = t_arm[arm] + cfg.detectors[det].delay_ps;
        if (freq) t += disp[arm] * dl_arm[arm];
        t += jitter_sigma[det] * normal(rng);
        tags[det].push_back(static_cast<Picoseconds>(std::llround(t)));
      }
    }
    for (int det = 0; det < 4; ++det) {
      const double rate = cfg.detectors[det].dark_rate;
      if (rate <= 0.0) continue;
      std::poisson_distribution<std::uint64_t> n_dark_dist(rate * len_s);
      const std::uint64_t n_dark = n_dark_dist(rng);
      for (std::uint64_t k = 0; k < n_dark; ++k) {
        tags[det].push_back(static_cast<Picoseconds>(std::llround(start + uni(rng) * (stop - start))));
      }
    }
  }

  auto finish = [&](int det) {
    auto& v = tags[det];
    std::erase_if(v, [&](Picoseconds t) { return t < 0 || t > duration_int; });
    std::sort(v.begin(), v.end());
    return TagStream(static_cast<std::uint8_t>(det), std::move(v), cfg.duration_s);
  };
  return SimOutput{{finish(0), finish(1), finish(2), finish(3)}};
}

Resolution effective_resolution(const DispersionModel& disp, double jitter_fwhm_ps,
                                double center_nm) {
  if (disp.dispersion_ps_per_nm == 0.0) {
    throw NumericError("effective resolution undefined for zero dispersion");
  }
  const double nm = jitter_fwhm_ps / std::abs(disp.dispersion_ps_per_nm);
  // dnu = c dlambda / lambda^2; nm and GHz units cancel to the factor below
  const double ghz = speed_of_light * nm / (center_nm * center_nm);
  return {nm, ghz};
}

double predicted_tt_fwhm(const SimConfig& cfg) {
  const double a = cfg.detectors[channel::alice_time].jitter_fwhm_ps;
  const double b = cfg.detectors[channel::bob_time].jitter_fwhm_ps;
  const double c = cfg.source.correlation_time_ps;
  return std::sqrt(a * a + b * b + c * c);
}

double predicted_ff_fwhm(const SimConfig& cfg) {
  const double a = cfg.detectors[channel::alice_freq].jitter_fwhm_ps;
  const double b = cfg.detectors[channel::bob_freq].jitter_fwhm_ps;
  const double c = cfg.source.correlation_time_ps;
  const double residual = (effective_dispersion(cfg, 0) + effective_dispersion(cfg, 1)) *
                          bandwidth_nm(cfg.source.spectral_fwhm_ghz, cfg.source.center_wavelength_nm);
  return std::sqrt(a * a + b * b + c * c + residual * residual);
}

double fit_residual_dispersion(const SimConfig& cfg, double target_ps) {
  const double a = cfg.detectors[channel::alice_freq].jitter_fwhm_ps;
  const double b = cfg.detectors[channel::bob_freq].jitter_fwhm_ps;
  const double c = cfg.source.correlation_time_ps;
  const double floor2 = a * a + b * b + c * c;
  if (target_ps * target_ps < floor2) {
    throw ConfigError("target FF width is below the jitter-limited width");
  }
  const double needed =
      std::sqrt(target_ps * target_ps - floor2) /
      bandwidth_nm(cfg.source.spectral_fwhm_ghz, cfg.source.center_wavelength_nm);
  // mismatch (D_A + D_B - r) must equal -needed
  return cfg.dispersion[0].dispersion_ps_per_nm + cfg.dispersion[1].dispersion_ps_per_nm + needed;
}

SimConfig paper_calibrated(std::uint64_t seed) {
  const LossBudget losses;
  SimConfig cfg;
  cfg.source.pair_rate = 2e6;
  cfg.source.spectral_fwhm_ghz = 250.0;
  cfg.source.correlation_time_ps = 1.0;
  // per-detector system jitter so that two detectors give a 32.9 ps peak
  const double jitter = 32.9 / std::sqrt(2.0);
  for (auto& det : cfg.detectors) det = DetectorModel{jitter, 0.8, 100.0, 0.0};
  cfg.dispersion = {DispersionModel{10'000.0, losses.compensator},
                    DispersionModel{-10'000.0, losses.emulator}};
  cfg.path_loss_db = {losses.arm_path_loss_db(), losses.arm_path_loss_db()};
  cfg.basis_split = 0.5;
  cfg.duration_s = 3.0;
  cfg.seed = seed;
  cfg.residual_dispersion_ps_per_nm = fit_residual_dispersion(cfg, 125.5);
  return cfg;
}

SimConfig cross_basis(std::uint64_t seed) {
  SimConfig cfg = paper_calibrated(seed);
  cfg.source.pair_rate = 4.6e6;
  cfg.path_loss_db = {0.0, 0.0};
  cfg.dispersion[0].loss_db = 0.0;
  cfg.dispersion[1].loss_db = 0.0;
  return cfg;
}

SimConfig ideal(double pair_rate, double duration_s, std::uint64_t seed) {
  SimConfig cfg;
  cfg.source.pair_rate = pair_rate;
  cfg.source.correlation_time_ps = 0.0;
  for (auto& det : cfg.detectors) det = DetectorModel{0.0, 1.0, 0.0, 0.0};
  cfg.dispersion = {DispersionModel{10'000.0, 0.0}, DispersionModel{-10'000.0, 0.0}};
  cfg.duration_s = duration_s;
  cfg.seed = seed;
  return cfg;
}

}  // namespace tfq::sim
