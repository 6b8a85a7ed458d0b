#include "tfqudit/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstdio>
#include <set>

#include "tfqudit/error.hpp"
#include "tfqudit/rng.hpp"

namespace tfq {

namespace fs = std::filesystem;

namespace {

constexpr const char* frame_names[4] = {"TT", "FF", "TF", "FT"};

std::string num(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> default_splitting_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 50; ++i) g.push_back(i / 100.0);
  return g;
}

std::vector<double> default_block_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 32; ++i) g.push_back(std::round(std::pow(10.0, 6.0 + i / 4.0)));
  return g;
}

std::string block_label(double n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0e", n);
  std::string s = buf;
  s.erase(std::remove(s.begin(), s.end(), '+'), s.end());
  return s;
}

const TagStream& require_channel(const io::TagSet& tags, std::uint8_t ch) {
  auto it = tags.find(ch);
  if (it == tags.end()) throw DataError("tag file has no channel " + std::to_string(ch));
  return it->second;
}

std::array<std::optional<CoincidenceMatrix>*, 4> slots(FrameMatrices& f) {
  return {&f.tt, &f.ff, &f.tf, &f.ft};
}

std::array<const std::optional<CoincidenceMatrix>*, 4> slots(const FrameMatrices& f) {
  return {&f.tt, &f.ff, &f.tf, &f.ft};
}

json binning_stamp(const PipelineConfig& cfg) {
  return json{{"inputs", {{"tags", cfg.inputs.tags}, {"cross_tags", cfg.inputs.cross_tags}}},
              {"tt", cfg.binning.tt},
              {"ff", cfg.binning.ff},
              {"cross", cfg.binning.cross}};
}

FrameMatrices acquire_frames(const PipelineConfig& cfg) {
  if (!cfg.inputs.matrices.empty()) return load_frames(cfg.inputs.matrices);

  const fs::path dir = fs::path(cfg.out_dir) / "matrices";
  const fs::path stamp = dir / "binning.json";
  const json want = binning_stamp(cfg);
  if (cfg.resume && fs::exists(stamp) && fs::exists(dir / "TT.csv") && fs::exists(dir / "FF.csv")) {
    if (parse_json(io::read_text(stamp), "binning stamp") == want) return load_frames(dir);
  }

  const auto tags = io::read_tags(cfg.inputs.tags);
  std::optional<io::TagSet> cross;
  if (!cfg.inputs.cross_tags.empty()) cross = io::read_tags(cfg.inputs.cross_tags);
  auto frames = bin_frames(tags, cross ? &*cross : nullptr, cfg.binning);
  save_frames(frames, dir);
  io::write_atomic(stamp, dump(want));
  return frames;
}

UncertaintyReport bootstrap_witness(const CoincidenceMatrix& tt, const CoincidenceMatrix& ff,
                                    double overlap, const PipelineConfig& cfg) {
  const auto target = TargetState::maximally_entangled(tt.dim());
  VectorStatistic stat = [&](std::span<const CoincidenceMatrix> m) {
    const auto ptt = normalize(m[0]);
    const auto pff = normalize(m[1]);
    const auto r = certify(ptt, pff, target, overlap);
    return std::vector<double>{r.f1, r.f2_tilde, r.f_tilde, r.e_d, w_observable(pff), r.h_tt,
                               r.h_ff};
  };
  BootstrapConfig bc = cfg.bootstrap;
  bc.seed = derive_seed(cfg.bootstrap.seed, tt.dim());
  const std::vector<CoincidenceMatrix> mats{tt, ff};
  const auto s = poisson_bootstrap(mats, stat, 7, bc);
  UncertaintyReport u{s[0], s[1], s[2], s[3], s[4], s[5], s[6], 1};
  if (std::isfinite(s[2].lower)) u.d_ent_lower = certify_schmidt_number(s[2].lower, target);
  return u;
}

}  // namespace

void PipelineConfig::validate() const {
  binning.tt.validate();
  binning.ff.validate();
  binning.cross.validate();
  security.validate();
  protocol.validate();
  if (bootstrap_enabled) bootstrap.validate();
  if (dimensions.empty()) throw ConfigError("dimension list is empty");
  const std::size_t limit = std::min(binning.tt.n_bins, binning.ff.n_bins);
  for (auto d : dimensions) {
    if (d < 2 || d > limit) {
      throw ConfigError("dimension " + std::to_string(d) + " outside [2, " +
                        std::to_string(limit) + "]");
    }
  }
  if (!(data_basis_split > 0.0 && data_basis_split < 1.0)) {
    throw ConfigError("data_basis_split must lie in (0, 1)");
  }
  if (!(mub.max_delta_m >= 0.0) || !(mub.alpha > 0.0 && mub.alpha < 1.0)) {
    throw ConfigError("invalid MUB thresholds");
  }
  if (inputs.matrices.empty() && inputs.tags.empty()) {
    throw ConfigError("either inputs.tags or inputs.matrices is required");
  }
  auto must_exist = [](const std::string& p, const char* what) {
    if (!p.empty() && !fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p);
  };
  must_exist(inputs.tags, "tag file");
  must_exist(inputs.cross_tags, "cross-basis tag file");
  must_exist(inputs.matrices, "matrix directory");
  for (double n : sweeps.block_sizes) {
    if (!(n >= 1.0)) throw ConfigError("sweep block sizes must be >= 1");
  }
}

void to_json(json& j, const PipelineConfig& c) {
  std::vector<std::string> regimes;
  for (auto r : c.sweeps.regimes) regimes.emplace_back(to_string(r));
  j = json{{"inputs",
            {{"tags", c.inputs.tags},
             {"cross_tags", c.inputs.cross_tags},
             {"matrices", c.inputs.matrices}}},
           {"binning", {{"tt", c.binning.tt}, {"ff", c.binning.ff}, {"cross", c.binning.cross}}},
           {"dimensions", c.dimensions},
           {"security", c.security},
           {"protocol", c.protocol},
           {"bootstrap", c.bootstrap},
           {"bootstrap_enabled", c.bootstrap_enabled},
           {"mub", c.mub},
           {"sweeps",
            {{"block_sizes", c.sweeps.block_sizes},
             {"splitting_ratios", c.sweeps.splitting_ratios},
             {"splitting_block_size", c.sweeps.splitting_block_size},
             {"block_grid", c.sweeps.block_grid},
             {"regimes", regimes}}},
           {"data_basis_split", c.data_basis_split},
           {"out_dir", c.out_dir},
           {"resume", c.resume}};
}

void from_json(const json& j, PipelineConfig& c) {
  if (!j.is_object()) throw ConfigError("pipeline config: expected a JSON object");
  static const std::set<std::string> known{
      "inputs", "binning", "dimensions", "security", "protocol", "bootstrap",
      "bootstrap_enabled", "mub", "sweeps", "data_basis_split", "out_dir", "resume",
      "simulation", "preset", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("pipeline config: unknown key '" + key + "'");
  }
  auto get = [&](const char* key, auto& out) {
    if (auto it = j.find(key); it != j.end()) {
      try {
        it->get_to(out);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
      }
    }
  };
  if (auto it = j.find("inputs"); it != j.end()) {
    for (const auto& [key, v] : it->items()) {
      if (key == "tags") c.inputs.tags = json_as<std::string>(v, "inputs.tags");
      else if (key == "cross_tags") c.inputs.cross_tags = json_as<std::string>(v, "inputs.cross_tags");
      else if (key == "matrices") c.inputs.matrices = json_as<std::string>(v, "inputs.matrices");
      else throw ConfigError("inputs: unknown key '" + key + "'");
    }
  }
  if (auto it = j.find("binning"); it != j.end()) {
    for (const auto& [key, v] : it->items()) {
      if (key == "tt") v.get_to(c.binning.tt);
      else if (key == "ff") v.get_to(c.binning.ff);
      else if (key == "cross") v.get_to(c.binning.cross);
      else throw ConfigError("binning: unknown key '" + key + "'");
    }
  }
  get("dimensions", c.dimensions);
  get("security", c.security);
  get("protocol", c.protocol);
  get("bootstrap", c.bootstrap);
  get("bootstrap_enabled", c.bootstrap_enabled);
  get("mub", c.mub);
  get("data_basis_split", c.data_basis_split);
  get("out_dir", c.out_dir);
  get("resume", c.resume);
  if (auto it = j.find("sweeps"); it != j.end()) {
    for (const auto& [key, v] : it->items()) {
      if (key == "block_sizes") c.sweeps.block_sizes = json_as<std::vector<double>>(v, key);
      else if (key == "splitting_ratios") c.sweeps.splitting_ratios = json_as<std::vector<double>>(v, key);
      else if (key == "splitting_block_size") c.sweeps.splitting_block_size = json_as<double>(v, key);
      else if (key == "block_grid") c.sweeps.block_grid = json_as<std::vector<double>>(v, key);
      else if (key == "regimes") {
        c.sweeps.regimes.clear();
        for (const auto& r : json_as<std::vector<std::string>>(v, key)) {
          c.sweeps.regimes.push_back(regime_from_string(r));
        }
      } else {
        throw ConfigError("sweeps: unknown key '" + key + "'");
      }
    }
  }
}

FrameMatrices bin_frames(const io::TagSet& tags, const io::TagSet* cross,
                         const BasisBinning& binning) {
  FrameMatrices f;
  const auto& at = require_channel(tags, channel::alice_time);
  const auto& af = require_channel(tags, channel::alice_freq);
  const auto& bt = require_channel(tags, channel::bob_time);
  const auto& bf = require_channel(tags, channel::bob_freq);
  f.tt = bin_full_frame(at, bt, binning.tt, BasisPair::TT);
  f.ff = bin_full_frame(af, bf, binning.ff, BasisPair::FF);
  const io::TagSet& c = cross ? *cross : tags;
  f.tf = bin_full_frame(require_channel(c, channel::alice_time),
                        require_channel(c, channel::bob_freq), binning.cross, BasisPair::TF);
  f.ft = bin_full_frame(require_channel(c, channel::alice_freq),
                        require_channel(c, channel::bob_time), binning.cross, BasisPair::FT);
  return f;
}

void save_frames(const FrameMatrices& frames, const fs::path& dir) {
  fs::create_directories(dir);
  const auto s = slots(frames);
  for (int k = 0; k < 4; ++k) {
    if (*s[k]) io::write_matrix(dir / (std::string(frame_names[k]) + ".csv"), **s[k], io::MatrixFormat::sparse);
  }
}

FrameMatrices load_frames(const fs::path& dir) {
  FrameMatrices f;
  auto s = slots(f);
  for (int k = 0; k < 4; ++k) {
    const fs::path p = dir / (std::string(frame_names[k]) + ".csv");
    if (fs::exists(p)) {
      s[k]->emplace(io::read_matrix(p));
      if (to_string((*s[k])->basis()) != frame_names[k]) {
        throw DataError(p.string() + ": basis pair does not match file name");
      }
    } else if (k < 2) {
      throw DataError("missing matrix file " + p.string());
    }
  }
  return f;
}

DimensionResult analyze_submatrices(const CoincidenceMatrix& tt_sub, const CoincidenceMatrix& ff_sub,
                                    const CoincidenceMatrix* tf, const CoincidenceMatrix* ft,
                                    const PipelineConfig& cfg, double tiling) {
  DimensionResult r;
  r.d = tt_sub.dim();
  try {
    if (ff_sub.dim() != r.d) throw DataError("TT and FF dimensions differ");
    r.tt_total = tt_sub.total();
    r.ff_total = ff_sub.total();

    const std::size_t s_tt = best_diagonal_shift(tt_sub);
    const std::size_t s_ff = best_diagonal_shift(ff_sub);
    const auto tt = shift_columns(tt_sub, s_tt);
    const auto ff = shift_columns(ff_sub, s_ff);

    double overlap = 1.0 / static_cast<double>(r.d);
    if (tf) {
      r.mub_tf = assess_mub(*tf, cfg.mub);
      overlap = std::max(overlap, r.mub_tf->max_overlap);
    }
    if (ft) {
      r.mub_ft = assess_mub(*ft, cfg.mub);
      overlap = std::max(overlap, r.mub_ft->max_overlap);
    }

    const auto ptt = normalize(tt);
    const auto pff = normalize(ff);
    r.witness = certify(ptt, pff, TargetState::maximally_entangled(r.d), overlap);
    r.witness.shift_tt = s_tt;
    r.witness.shift_ff = s_ff;

    const double q = cfg.data_basis_split;
    const double tt_rate = static_cast<double>(tt.total()) / tt.duration_s();
    r.rate_inputs = RateInputs{r.d, w_observable(pff), r.witness.h_tt, r.witness.h_ff,
                               tt_rate * tiling / ((1.0 - q) * (1.0 - q))};
    for (auto regime : cfg.sweeps.regimes) {
      r.key_rates.push_back(evaluate_key_rate(r.rate_inputs, cfg.protocol, cfg.security, regime));
    }
    if (cfg.bootstrap_enabled) r.uncertainty = bootstrap_witness(tt, ff, overlap, cfg);
    r.ok = true;
  } catch (const Error& e) {
    r.error = e.what();
    r.error_code = e.exit_code();
  } catch (const std::exception& e) {
    r.error = e.what();
    r.error_code = static_cast<int>(ErrorKind::numeric);
  }
  return r;
}

DimensionResult analyze_dimension(const FrameMatrices& frames, std::size_t d,
                                  const PipelineConfig& cfg) {
  try {
    if (!frames.tt || !frames.ff) throw DataError("TT and FF frames are required");
    const auto tt = subspace_extract(*frames.tt, d);
    const auto ff = subspace_extract(*frames.ff, d);
    std::optional<CoincidenceMatrix> tf, ft;
    if (frames.tf && d <= frames.tf->dim()) tf = subspace_extract(*frames.tf, d);
    if (frames.ft && d <= frames.ft->dim()) ft = subspace_extract(*frames.ft, d);
    const double tiling = static_cast<double>(frames.tt->dim()) / static_cast<double>(d);
    return analyze_submatrices(tt, ff, tf ? &*tf : nullptr, ft ? &*ft : nullptr, cfg, tiling);
  } catch (const Error& e) {
    DimensionResult r;
    r.d = d;
    r.error = e.what();
    r.error_code = e.exit_code();
    return r;
  }
}

void to_json(json& j, const UncertaintyReport& u) {
  j = json{{"f1", u.f1},   {"f2_tilde", u.f2_tilde}, {"f_tilde", u.f_tilde},
           {"e_d", u.e_d}, {"w", u.w},               {"h_tt", u.h_tt},
           {"h_ff", u.h_ff}, {"d_ent_lower", u.d_ent_lower}};
}

void to_json(json& j, const DimensionResult& r) {
  j = json{{"d", r.d}, {"ok", r.ok}};
  if (!r.ok) {
    j["error"] = r.error;
    j["error_code"] = r.error_code;
    return;
  }
  j["witness"] = r.witness;
  j["mub_tf"] = r.mub_tf ? json(*r.mub_tf) : json(nullptr);
  j["mub_ft"] = r.mub_ft ? json(*r.mub_ft) : json(nullptr);
  j["W"] = r.rate_inputs.w;
  j["coincidence_rate"] = r.rate_inputs.coincidence_rate;
  j["tt_total"] = r.tt_total;
  j["ff_total"] = r.ff_total;
  j["key_rates"] = r.key_rates;
  j["uncertainty"] = r.uncertainty ? json(*r.uncertainty) : json(nullptr);
}

std::string witness_csv(const std::vector<DimensionResult>& dims) {
  std::string out =
      "d,f1,f2_tilde,f_tilde,f_tilde_sigma,d_ent,d_ent_lower,e_d,e_d_clamped,e_d_sigma,h_tt,"
      "h_ff,W,delta_m_tf,delta_m_ft,max_overlap,tt_total,ff_total,coincidence_rate\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : dims) {
    if (!r.ok) continue;
    const auto& w = r.witness;
    const auto& u = r.uncertainty;
    out += std::to_string(r.d) + "," + num(w.f1) + "," + num(w.f2_tilde) + "," + num(w.f_tilde) +
           "," + num(u ? u->f_tilde.sigma : nan) + "," + std::to_string(w.d_ent) + "," +
           (u ? std::to_string(u->d_ent_lower) : std::string()) + "," + num(w.e_d) + "," +
           num(w.e_d_clamped) + "," + num(u ? u->e_d.sigma : nan) + "," + num(w.h_tt) + "," +
           num(w.h_ff) + "," + num(r.rate_inputs.w) + "," +
           num(r.mub_tf ? r.mub_tf->report.delta_m : nan) + "," +
           num(r.mub_ft ? r.mub_ft->report.delta_m : nan) + "," + num(w.max_overlap) + "," +
           std::to_string(r.tt_total) + "," + std::to_string(r.ff_total) + "," +
           num(r.rate_inputs.coincidence_rate) + "\n";
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult res;
  const fs::path out = cfg.out_dir;
  fs::create_directories(out / "reports");
  fs::create_directories(out / "sweeps");

  const FrameMatrices frames = acquire_frames(cfg);

  std::vector<RateInputs> rate_inputs;
  for (auto d : cfg.dimensions) {
    auto r = analyze_dimension(frames, d, cfg);
    char name[32];
    std::snprintf(name, sizeof name, "d%04zu.json", d);
    io::write_atomic(out / "reports" / name, dump(json(r)));
    if (r.ok) {
      rate_inputs.push_back(r.rate_inputs);
    } else {
      res.partial = true;
      if (res.exit_code == 0) res.exit_code = r.error_code;
    }
    res.dimensions.push_back(std::move(r));
  }
  io::write_atomic(out / "sweeps" / "witness_vs_d.csv", witness_csv(res.dimensions));

  json sweeps = json::array();
  auto emit = [&](SweepTable table, const std::string& file, double block) {
    io::write_atomic(out / "sweeps" / file, sweep_csv(table));
    const auto& best = table.best();
    sweeps.push_back(json{{"variable", std::string(to_string(table.variable))},
                          {"regime", std::string(to_string(table.regime))},
                          {"block_size", block},
                          {"file", "sweeps/" + file},
                          {"best_value", best.value},
                          {"best_rate_bps", best.result.rate_bps},
                          {"best_rate_per_round", best.result.rate_per_round}});
    res.sweeps.push_back(std::move(table));
  };

  std::optional<RateInputs> best_inputs;
  if (!rate_inputs.empty()) {
    for (double n : cfg.sweeps.block_sizes) {
      ProtocolConfig p = cfg.protocol;
      p.n_total = n;
      for (auto regime : cfg.sweeps.regimes) {
        emit(sweep_dimension(rate_inputs, p, cfg.security, regime),
             "dimension_" + std::string(to_string(regime)) + "_N" + block_label(n) + ".csv", n);
      }
    }
    ProtocolConfig p = cfg.protocol;
    p.n_total = cfg.sweeps.splitting_block_size;
    const auto by_d = sweep_dimension(rate_inputs, p, cfg.security, Regime::collective);
    best_inputs = rate_inputs[by_d.argmax];

    const auto q_grid = cfg.sweeps.splitting_ratios.empty() ? default_splitting_grid()
                                                            : cfg.sweeps.splitting_ratios;
    const auto n_grid = cfg.sweeps.block_grid.empty() ? default_block_grid() : cfg.sweeps.block_grid;
    for (auto regime : cfg.sweeps.regimes) {
      if (regime != Regime::asymptotic) {
        emit(sweep_splitting_ratio(*best_inputs, q_grid, p, cfg.security, regime),
             "splitting_ratio_" + std::string(to_string(regime)) + ".csv", p.n_total);
      }
      emit(sweep_block_size(*best_inputs, n_grid, cfg.protocol, cfg.security, regime),
           "block_size_" + std::string(to_string(regime)) + ".csv", 0.0);
    }
  }

  json dims = json::array();
  std::optional<std::size_t> ed_best;
  double ed_max = -std::numeric_limits<double>::infinity();
  for (const auto& r : res.dimensions) {
    json row{{"d", r.d}, {"ok", r.ok}};
    if (r.ok) {
      row["f_tilde"] = r.witness.f_tilde;
      row["d_ent"] = r.witness.d_ent;
      row["e_d"] = r.witness.e_d;
      row["W"] = r.rate_inputs.w;
      if (r.witness.e_d > ed_max) {
        ed_max = r.witness.e_d;
        ed_best = r.d;
      }
    } else {
      row["error"] = r.error;
    }
    dims.push_back(std::move(row));
  }

  res.summary = json{{"format_version", 1},
                     {"config", cfg},
                     {"dimensions", dims},
                     {"sweeps", sweeps},
                     {"e_d_argmax_d", ed_best ? json(*ed_best) : json(nullptr)},
                     {"key_rate_dimension", best_inputs ? json(best_inputs->d) : json(nullptr)},
                     {"partial", res.partial},
                     {"exit_code", res.exit_code}};
  io::write_atomic(out / "summary.json", dump(res.summary));
  return res;
}

}  // namespace tfq
