#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tfqudit/bootstrap.hpp"
#include "tfqudit/coincidence.hpp"
#include "tfqudit/io.hpp"
#include "tfqudit/mub.hpp"
#include "tfqudit/security.hpp"
#include "tfqudit/serialize.hpp"
#include "tfqudit/witness.hpp"

namespace tfq {

struct PipelineInputs {
  std::string tags;        // tag file holding the four detector channels
  std::string cross_tags;  // separate TF/FT acquisition; empty: use `tags`
  std::string matrices;    // directory of full-frame matrices; replaces tags
};

struct BasisBinning {
  BinningConfig tt = BinningConfig::half_frame(200, 1024);
  BinningConfig ff = BinningConfig::half_frame(800, 1024);
  BinningConfig cross = BinningConfig::half_frame(10, 1021);
};

struct SweepSettings {
  std::vector<double> block_sizes{1e8, 1e11};  // N of the dimension sweeps
  std::vector<double> splitting_ratios;        // empty: 0.01, 0.02, ..., 0.50
  double splitting_block_size = 1e11;
  std::vector<double> block_grid;              // empty: 1e6 .. 1e14, 4 per decade
  std::vector<Regime> regimes{Regime::asymptotic, Regime::collective, Regime::coherent};
};

struct PipelineConfig {
  PipelineInputs inputs;
  BasisBinning binning;
  std::vector<std::size_t> dimensions{3, 7, 13, 31, 61, 127, 251, 331, 419, 509, 1021};
  SecurityParams security;
  ProtocolConfig protocol;  // n_total, q and f_ec of the per-dimension key rates
  BootstrapConfig bootstrap;
  bool bootstrap_enabled = true;
  MubThresholds mub;
  SweepSettings sweeps;
  /// Basis-choice probability during acquisition; TT coincidences are a
  /// fraction (1 - q)^2 of all rounds.
  double data_basis_split = 0.5;
  std::string out_dir = "out";
  bool resume = true;

  void validate() const;
};

void to_json(json& j, const PipelineConfig& c);
void from_json(const json& j, PipelineConfig& c);

/// Full-frame matrices of the four basis pairs. Cross-basis ones are optional.
struct FrameMatrices {
  std::optional<CoincidenceMatrix> tt, ff, tf, ft;
};

/// Bins tags into full frames. Cross-basis pairs come from `cross` when given.
FrameMatrices bin_frames(const io::TagSet& tags, const io::TagSet* cross,
                         const BasisBinning& binning);

/// Writes the present matrices as <dir>/{TT,FF,TF,FT}.csv (sparse).
void save_frames(const FrameMatrices& frames, const std::filesystem::path& dir);
/// Reads whichever of <dir>/{TT,FF,TF,FT}.csv exist; TT and FF are required.
FrameMatrices load_frames(const std::filesystem::path& dir);

struct UncertaintyReport {
  BootstrapSummary f1, f2_tilde, f_tilde, e_d, w, h_tt, h_ff;
  std::size_t d_ent_lower = 1;  // certificate at the lower end of the F interval
};

struct DimensionResult {
  std::size_t d = 0;
  bool ok = false;
  std::string error;
  int error_code = 0;
  WitnessReport witness;
  std::optional<MubAssessment> mub_tf, mub_ft;
  RateInputs rate_inputs;
  std::vector<KeyRateResult> key_rates;  // one per configured regime
  std::optional<UncertaintyReport> uncertainty;
  std::uint64_t tt_total = 0;
  std::uint64_t ff_total = 0;
};

/// Extract, align, check MUB overlap, certify and evaluate key rates for one
/// dimension. Errors are recorded in the result, never thrown.
DimensionResult analyze_dimension(const FrameMatrices& frames, std::size_t d,
                                  const PipelineConfig& cfg);

/// Same analysis on already extracted d x d matrices. `tiling` scales the
/// TT coincidence rate from one d-window to the whole frame (n_bins / d).
DimensionResult analyze_submatrices(const CoincidenceMatrix& tt, const CoincidenceMatrix& ff,
                                    const CoincidenceMatrix* tf, const CoincidenceMatrix* ft,
                                    const PipelineConfig& cfg, double tiling = 1.0);

struct PipelineResult {
  std::vector<DimensionResult> dimensions;
  std::vector<SweepTable> sweeps;
  bool partial = false;
  int exit_code = 0;  // first failing stage's code, 0 when all succeeded
  json summary;
};

/// Runs bin -> align -> mub-check -> certify -> keyrate for every dimension
/// and writes the bundle under cfg.out_dir:
///   matrices/{TT,FF,TF,FT}.csv    full frames (reused on rerun when resume is set)
///   reports/d<dddd>.json          per-dimension report
///   sweeps/*.csv                  witness, E_D and key-rate tables
///   summary.json
PipelineResult run_pipeline(const PipelineConfig& cfg);

void to_json(json& j, const DimensionResult& r);
void to_json(json& j, const UncertaintyReport& u);

/// Rows d,f1,f2_tilde,f_tilde,... for every successful dimension.
std::string witness_csv(const std::vector<DimensionResult>& dims);

}  // namespace tfq
