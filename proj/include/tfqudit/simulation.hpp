#pragma once

#include <array>
#include <cstdint>

#include "tfqudit/types.hpp"

namespace tfq::sim {

inline constexpr double speed_of_light = 299'792'458.0;  // m/s
inline constexpr double fwhm_per_sigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

struct SourceModel {
  double pair_rate = 1e5;             // emitted pairs per second
  double spectral_fwhm_ghz = 250.0;   // single-photon bandwidth
  double correlation_time_ps = 1.0;   // intrinsic signal-idler delay spread (FWHM)
  double center_wavelength_nm = 1560.0;
};

struct DetectorModel {
  double jitter_fwhm_ps = 15.0;
  double efficiency = 0.8;
  double dark_rate = 0.0;  // counts per second
  double delay_ps = 0.0;   // fixed cable/electronics offset
};

struct DispersionModel {
  double dispersion_ps_per_nm = 10'000.0;
  double loss_db = 3.0;
};

/// Characterized optical losses of the two-party setup, in dB. The 50:50
/// basis-choice splitters are not listed: routing is modeled by the basis
/// split probability instead.
struct LossBudget {
  double fiber_coupling = 3.0;
  double fiber_bench = 0.97;
  double longpass_filter = 0.8;
  double bandpass_filter = 0.2;
  double polarization_controller = 1.0;  // one per arm
  double polarizing_splitter = 1.1;
  double connectors = 1.0;
  double compensator = 3.67;  // Alice's frequency arm
  double emulator = 2.61;     // Bob's frequency arm
  double detector = 1.0;      // folded into detector efficiency, not added here

  /// Loss every photon sees before the basis choice.
  double arm_path_loss_db() const;
};

/// Detector index order: alice_time, alice_freq, bob_time, bob_freq (matches
/// the tfq::channel constants).
struct SimConfig {
  SourceModel source;
  std::array<DetectorModel, 4> detectors{};
  std::array<DispersionModel, 2> dispersion{DispersionModel{10'000.0, 3.0},
                                            DispersionModel{-10'000.0, 3.0}};
  std::array<double, 2> path_loss_db{0.0, 0.0};  // per arm, before the basis choice
  /// Extra dispersion added to Bob's module (ps/nm); the FF difference time
  /// then retains a spread of residual * delta_lambda.
  double residual_dispersion_ps_per_nm = 0.0;
  double basis_split = 0.5;  // probability of routing each photon to F
  double duration_s = 1.0;
  std::uint64_t seed = 0;
  double segment_s = 0.25;  // generation shard length

  /// Throws ConfigError on invalid parameters.
  void validate() const;

  /// Total detection probability of a photon in the given arm and basis
  /// (excluding the basis-choice probability).
  double path_efficiency(int arm, bool freq_basis) const;
};

struct SimOutput {
  std::array<TagStream, 4> streams;

  const TagStream& alice_time() const { return streams[channel::alice_time]; }
  const TagStream& alice_freq() const { return streams[channel::alice_freq]; }
  const TagStream& bob_time() const { return streams[channel::bob_time]; }
  const TagStream& bob_freq() const { return streams[channel::bob_freq]; }
};

/// Generates the four detector streams. Deterministic in (config, seed).
SimOutput simulate(const SimConfig& cfg);

struct Resolution {
  double nm;
  double ghz;
};

/// Spectral resolution of a dispersive time-to-frequency mapping:
/// jitter / |dispersion|, converted to frequency at `center_nm`.
Resolution effective_resolution(const DispersionModel& disp, double jitter_fwhm_ps,
                                double center_nm = 1560.0);

/// Wavelength FWHM (nm) of a Gaussian spectrum of `fwhm_ghz` at `center_nm`.
double bandwidth_nm(double fwhm_ghz, double center_nm);

/// Predicted FWHMs of the coincidence peaks (Gaussian model).
double predicted_tt_fwhm(const SimConfig& cfg);
double predicted_ff_fwhm(const SimConfig& cfg);

/// Residual dispersion that makes the predicted FF peak FWHM equal `target_ps`.
/// Throws ConfigError if the target is below the jitter-only width.
double fit_residual_dispersion(const SimConfig& cfg, double target_ps);

/// Defaults of the two-basis setup: correlation peaks of 32.9 ps (TT) and
/// 125.5 ps (FF, via fitted residual dispersion), 250 GHz bandwidth,
/// +-10000 ps/nm modules, loss budget above, 3 s acquisition.
SimConfig paper_calibrated(std::uint64_t seed);

/// Bright variant of paper_calibrated for cross-basis (TF/FT) acquisitions:
/// only detector efficiency remains as loss, and the pair rate is raised so
/// a 3 s run yields about 10^6 cross-basis coincidences.
SimConfig cross_basis(std::uint64_t seed);

/// Same optics without losses, darks, jitter or residual dispersion.
SimConfig ideal(double pair_rate, double duration_s, std::uint64_t seed);

}  // namespace tfq::sim
