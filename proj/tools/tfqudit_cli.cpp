// tfqudit command-line tool. Every subcommand writes its result under --out
// and echoes a JSON summary on stdout. Exit codes: 0 ok, 2 config, 3 data,
// 4 numeric.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tfqudit/coincidence.hpp"
#include "tfqudit/error.hpp"
#include "tfqudit/io.hpp"
#include "tfqudit/pipeline.hpp"
#include "tfqudit/serialize.hpp"
#include "tfqudit/simulation.hpp"

namespace fs = std::filesystem;
using namespace tfq;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = "out";
};

json load_config(const Globals& g) {
  if (g.config.empty()) return json::object();
  if (!fs::exists(g.config)) throw ConfigError("config file not found: " + g.config);
  json j = parse_json(io::read_text(g.config), g.config);
  if (!j.is_object()) throw ConfigError(g.config + ": expected a JSON object");
  return j;
}

PipelineConfig pipeline_config(const Globals& g) {
  PipelineConfig cfg = json_as<PipelineConfig>(load_config(g), "config");
  cfg.out_dir = g.out;
  if (g.seed) cfg.bootstrap.seed = *g.seed;
  return cfg;
}

void emit(const fs::path& file, const json& j) {
  fs::create_directories(file.parent_path());
  const std::string text = dump(j);
  io::write_atomic(file, text);
  std::cout << text;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse grid value '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("sweep grid is empty");
  return out;
}

CoincidenceMatrix load_sub(const std::string& path, std::optional<std::size_t> d) {
  auto m = io::read_matrix(path);
  if (d && *d != m.dim()) {
    if (*d > m.dim()) throw ConfigError("--d exceeds matrix dimension of " + path);
    m = subspace_extract(m, *d);
  }
  return m;
}

// ---- simulate --------------------------------------------------------------

struct SimulateOpts {
  std::string preset;
  std::optional<double> duration;
  std::optional<double> pair_rate;
  std::string format = "binary";
  std::string name = "tags";
};

int run_simulate(const Globals& g, const SimulateOpts& o) {
  const json conf = load_config(g);
  std::string preset = o.preset;
  if (preset.empty()) preset = conf.value("preset", std::string("paper"));
  std::uint64_t seed = g.seed.value_or(conf.value("seed", std::uint64_t{1}));

  sim::SimConfig sc;
  if (preset == "paper") {
    sc = sim::paper_calibrated(seed);
  } else if (preset == "cross") {
    sc = sim::cross_basis(seed);
  } else if (preset == "ideal") {
    sc = sim::ideal(1e6, 1.0, seed);
  } else {
    throw ConfigError("unknown preset '" + preset + "' (paper, cross, ideal)");
  }
  if (auto it = conf.find("simulation"); it != conf.end()) {
    try {
      it->get_to(sc);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("simulation: ") + e.what());
    }
  }
  if (g.seed) sc.seed = *g.seed;
  if (o.duration) sc.duration_s = *o.duration;
  if (o.pair_rate) sc.source.pair_rate = *o.pair_rate;
  sc.validate();

  const auto result = sim::simulate(sc);
  const fs::path out = g.out;
  fs::create_directories(out);
  io::TagFormat format;
  std::string ext;
  if (o.format == "binary") {
    format = io::TagFormat::binary;
    ext = ".tfq";
  } else if (o.format == "csv") {
    format = io::TagFormat::csv;
    ext = ".csv";
  } else {
    throw ConfigError("unknown tag format '" + o.format + "' (binary, csv)");
  }
  const fs::path tag_file = out / (o.name + ext);
  io::write_tags(tag_file, {result.streams.begin(), result.streams.end()}, format);

  json counts = json::object();
  for (const auto& s : result.streams) counts[std::to_string(s.channel())] = s.size();
  json summary{{"preset", preset},
               {"tags", tag_file.string()},
               {"counts", counts},
               {"simulation", sc},
               {"predicted_tt_fwhm_ps", sim::predicted_tt_fwhm(sc)},
               {"predicted_ff_fwhm_ps", sim::predicted_ff_fwhm(sc)}};
  // bin width ~1/16 of the expected peak keeps the maximum from being a lone spike
  auto measure = [&](const TagStream& a, const TagStream& b, double predicted) -> json {
    try {
      const auto res = std::max<Picoseconds>(1, std::llround(predicted / 16));
      return peak_fwhm(a, b, res);
    } catch (const DataError&) {
      return nullptr;
    }
  };
  summary["measured_tt_fwhm_ps"] = measure(result.alice_time(), result.bob_time(), sim::predicted_tt_fwhm(sc));
  summary["measured_ff_fwhm_ps"] = measure(result.alice_freq(), result.bob_freq(), sim::predicted_ff_fwhm(sc));
  emit(out / (o.name + ".sim.json"), summary);
  return 0;
}

// ---- bin -------------------------------------------------------------------

struct BinOpts {
  std::string tags;
  std::string cross_tags;
  std::vector<std::size_t> dims;
};

int run_bin(const Globals& g, const BinOpts& o) {
  PipelineConfig cfg = pipeline_config(g);
  if (!o.tags.empty()) cfg.inputs.tags = o.tags;
  if (!o.cross_tags.empty()) cfg.inputs.cross_tags = o.cross_tags;
  if (cfg.inputs.tags.empty()) throw ConfigError("bin needs --tags or inputs.tags");
  cfg.binning.tt.validate();
  cfg.binning.ff.validate();
  cfg.binning.cross.validate();

  const auto tags = io::read_tags(cfg.inputs.tags);
  std::optional<io::TagSet> cross;
  if (!cfg.inputs.cross_tags.empty()) cross = io::read_tags(cfg.inputs.cross_tags);
  const auto frames = bin_frames(tags, cross ? &*cross : nullptr, cfg.binning);
  const fs::path dir = fs::path(g.out) / "matrices";
  save_frames(frames, dir);

  json totals = json::object();
  const std::pair<const char*, const std::optional<CoincidenceMatrix>*> named[] = {
      {"TT", &frames.tt}, {"FF", &frames.ff}, {"TF", &frames.tf}, {"FT", &frames.ft}};
  for (auto [name, m] : named) {
    if (*m) totals[name] = (*m)->total();
  }
  json extracted = json::array();
  for (auto d : o.dims) {
    char sub[16];
    std::snprintf(sub, sizeof sub, "d%04zu", d);
    for (auto [name, m] : named) {
      if (!*m || d > (*m)->dim()) continue;
      io::write_matrix(dir / sub / (std::string(name) + ".csv"), subspace_extract(**m, d),
                       io::MatrixFormat::sparse);
    }
    extracted.push_back(d);
  }
  emit(dir / "bin.json", json{{"directory", dir.string()},
                              {"totals", totals},
                              {"extracted", extracted},
                              {"binning", {{"tt", cfg.binning.tt},
                                           {"ff", cfg.binning.ff},
                                           {"cross", cfg.binning.cross}}}});
  return 0;
}

// ---- mub-check -------------------------------------------------------------

struct MubOpts {
  std::vector<std::string> matrices;
  std::optional<std::size_t> d;
};

int run_mub(const Globals& g, const MubOpts& o) {
  const PipelineConfig cfg = pipeline_config(g);
  json results = json::array();
  bool any_rejected = false;
  for (const auto& path : o.matrices) {
    const auto m = load_sub(path, o.d);
    const auto a = assess_mub(m, cfg.mub);
    any_rejected |= a.verdict == MubVerdict::rejected;
    json entry = a;
    entry["file"] = path;
    results.push_back(entry);
  }
  emit(fs::path(g.out) / "mub.json",
       json{{"thresholds", cfg.mub}, {"results", results}, {"all_adopted", !any_rejected}});
  return 0;
}

// ---- certify ---------------------------------------------------------------

struct CertifyOpts {
  std::string tt, ff, tf, ft;
  std::optional<std::size_t> d;
  std::optional<std::size_t> samples;
  bool no_bootstrap = false;
};

int run_certify(const Globals& g, const CertifyOpts& o) {
  PipelineConfig cfg = pipeline_config(g);
  if (o.no_bootstrap) cfg.bootstrap_enabled = false;
  if (o.samples) cfg.bootstrap.n_samples = *o.samples;
  if (cfg.bootstrap_enabled) cfg.bootstrap.validate();
  const auto tt_full = io::read_matrix(o.tt);
  const auto tt = load_sub(o.tt, o.d);
  const auto ff = load_sub(o.ff, o.d);
  std::optional<CoincidenceMatrix> tf, ft;
  if (!o.tf.empty()) tf = load_sub(o.tf, tt.dim());
  if (!o.ft.empty()) ft = load_sub(o.ft, tt.dim());
  const double tiling = static_cast<double>(tt_full.dim()) / static_cast<double>(tt.dim());
  const auto r = analyze_submatrices(tt, ff, tf ? &*tf : nullptr, ft ? &*ft : nullptr, cfg, tiling);
  emit(fs::path(g.out) / "certify.json", json(r));
  return r.ok ? 0 : r.error_code;
}

// ---- keyrate / sweep inputs -------------------------------------------------

struct RateOpts {
  std::string tt, ff;
  std::string matrices;
  std::optional<std::size_t> d;
  std::optional<double> w, h_tt, h_ff, rate;
  std::optional<double> n_total, q;
  std::string regime = "all";
};

RateInputs rate_inputs_from(const RateOpts& o, const PipelineConfig& cfg) {
  if (o.w || o.h_tt) {
    if (!o.w || !o.h_tt || !o.d) throw ConfigError("--w, --h-tt and --d must be given together");
    return RateInputs{*o.d, *o.w, *o.h_tt, o.h_ff.value_or(0.0), o.rate.value_or(0.0)};
  }
  if (o.tt.empty() || o.ff.empty()) throw ConfigError("give --tt/--ff matrices or --w/--h-tt/--d");
  PipelineConfig c = cfg;
  c.bootstrap_enabled = false;
  const auto tt_full = io::read_matrix(o.tt);
  const auto tt = load_sub(o.tt, o.d);
  const auto ff = load_sub(o.ff, o.d);
  const auto r = analyze_submatrices(tt, ff, nullptr, nullptr, c,
                                     static_cast<double>(tt_full.dim()) / tt.dim());
  if (!r.ok) throw Error(static_cast<ErrorKind>(r.error_code), r.error);
  RateInputs in = r.rate_inputs;
  if (o.rate) in.coincidence_rate = *o.rate;
  return in;
}

std::vector<Regime> regimes_from(const std::string& s) {
  if (s == "all") return {Regime::asymptotic, Regime::collective, Regime::coherent};
  return {regime_from_string(s)};
}

int run_keyrate(const Globals& g, const RateOpts& o) {
  const PipelineConfig cfg = pipeline_config(g);
  ProtocolConfig p = cfg.protocol;
  if (o.n_total) p.n_total = *o.n_total;
  if (o.q) p.q = *o.q;
  const auto in = rate_inputs_from(o, cfg);
  p.d = in.d;
  json results = json::array();
  for (auto regime : regimes_from(o.regime)) {
    results.push_back(evaluate_key_rate(in, p, cfg.security, regime));
  }
  emit(fs::path(g.out) / "keyrate.json",
       json{{"d", in.d},
            {"W", in.w},
            {"h_tt", in.h_tt},
            {"coincidence_rate", in.coincidence_rate},
            {"protocol", p},
            {"security", cfg.security},
            {"results", results}});
  return 0;
}

struct SweepOpts {
  RateOpts rate;
  std::string variable = "dimension";
  std::string grid;
};

int run_sweep(const Globals& g, const SweepOpts& o) {
  PipelineConfig cfg = pipeline_config(g);
  ProtocolConfig p = cfg.protocol;
  if (o.rate.n_total) p.n_total = *o.rate.n_total;
  if (o.rate.q) p.q = *o.rate.q;
  const auto variable = sweep_variable_from_string(o.variable);
  const auto regimes = regimes_from(o.rate.regime);

  std::vector<RateInputs> per_d;
  std::optional<RateInputs> single;
  if (variable == SweepVariable::dimension) {
    if (o.rate.matrices.empty()) throw ConfigError("dimension sweep needs --matrices <dir>");
    cfg.inputs.matrices = o.rate.matrices;
    cfg.bootstrap_enabled = false;
    if (!o.grid.empty()) {
      cfg.dimensions.clear();
      for (double v : parse_grid(o.grid)) cfg.dimensions.push_back(static_cast<std::size_t>(v));
    }
    const auto frames = load_frames(cfg.inputs.matrices);
    for (auto d : cfg.dimensions) {
      const auto r = analyze_dimension(frames, d, cfg);
      if (!r.ok) throw Error(static_cast<ErrorKind>(r.error_code), r.error);
      per_d.push_back(r.rate_inputs);
    }
  } else {
    single = rate_inputs_from(o.rate, cfg);
    p.d = single->d;
  }

  json tables = json::array();
  for (auto regime : regimes) {
    SweepTable t;
    if (variable == SweepVariable::dimension) {
      t = sweep_dimension(per_d, p, cfg.security, regime);
    } else if (variable == SweepVariable::block_size) {
      t = sweep_block_size(*single, parse_grid(o.grid), p, cfg.security, regime);
    } else {
      t = sweep_splitting_ratio(*single, parse_grid(o.grid), p, cfg.security, regime);
    }
    const std::string file = "sweep_" + o.variable + "_" + std::string(to_string(regime)) + ".csv";
    fs::create_directories(g.out);
    io::write_atomic(fs::path(g.out) / file, sweep_csv(t));
    tables.push_back(json{{"regime", std::string(to_string(regime))},
                          {"file", file},
                          {"argmax_value", t.best().value},
                          {"argmax_rate_bps", t.best().result.rate_bps},
                          {"argmax_rate_per_round", t.best().result.rate_per_round}});
  }
  emit(fs::path(g.out) / ("sweep_" + o.variable + ".json"),
       json{{"variable", o.variable}, {"protocol", p}, {"tables", tables}});
  return 0;
}

// ---- report ----------------------------------------------------------------

struct ReportOpts {
  std::string tags, cross_tags, matrices;
  std::optional<std::size_t> samples;
  bool no_bootstrap = false;
  std::vector<std::size_t> dims;
};

int run_report(const Globals& g, const ReportOpts& o) {
  PipelineConfig cfg = pipeline_config(g);
  if (!o.tags.empty()) cfg.inputs.tags = o.tags;
  if (!o.cross_tags.empty()) cfg.inputs.cross_tags = o.cross_tags;
  if (!o.matrices.empty()) cfg.inputs.matrices = o.matrices;
  if (o.samples) cfg.bootstrap.n_samples = *o.samples;
  if (o.no_bootstrap) cfg.bootstrap_enabled = false;
  if (!o.dims.empty()) cfg.dimensions = o.dims;
  const auto res = run_pipeline(cfg);
  std::cout << dump(res.summary);
  if (res.partial) std::cerr << "tfqudit: some dimensions failed; see reports/\n";
  return res.exit_code;
}

void add_rate_options(CLI::App* cmd, RateOpts& o) {
  cmd->add_option("--tt", o.tt, "TT matrix file");
  cmd->add_option("--ff", o.ff, "FF matrix file");
  cmd->add_option("--d", o.d, "dimension (extracts a subspace when the matrix is larger)");
  cmd->add_option("--w", o.w, "W observable instead of matrices");
  cmd->add_option("--h-tt", o.h_tt, "H(A_T|B_T) in bits instead of matrices");
  cmd->add_option("--h-ff", o.h_ff, "H(A_F|B_F) in bits");
  cmd->add_option("--rate", o.rate, "coincidence rate in rounds per second");
  cmd->add_option("--n-total", o.n_total, "block size N in rounds");
  cmd->add_option("--q", o.q, "splitting ratio");
  cmd->add_option("--regime", o.regime, "asymptotic, collective, coherent or all");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-frequency qudit entanglement certification and key-rate analysis"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed for simulation and bootstrap");
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--out", g.out, "output directory")->capture_default_str();

  SimulateOpts sim_o;
  auto* sim_cmd = app.add_subcommand("simulate", "generate detector time tags");
  sim_cmd->add_option("--preset", sim_o.preset, "paper, cross or ideal");
  sim_cmd->add_option("--duration", sim_o.duration, "acquisition time in seconds");
  sim_cmd->add_option("--pair-rate", sim_o.pair_rate, "emitted pairs per second");
  sim_cmd->add_option("--format", sim_o.format, "binary or csv")->capture_default_str();
  sim_cmd->add_option("--name", sim_o.name, "output file stem")->capture_default_str();

  BinOpts bin_o;
  auto* bin_cmd = app.add_subcommand("bin", "bin tags into full-frame coincidence matrices");
  bin_cmd->add_option("--tags", bin_o.tags, "tag file");
  bin_cmd->add_option("--cross-tags", bin_o.cross_tags, "separate cross-basis tag file");
  bin_cmd->add_option("--d", bin_o.dims, "also write extracted d x d matrices")->delimiter(',');

  MubOpts mub_o;
  auto* mub_cmd = app.add_subcommand("mub-check", "test cross-basis matrices for unbiasedness");
  mub_cmd->add_option("--matrix", mub_o.matrices, "TF/FT matrix files")->required();
  mub_cmd->add_option("--d", mub_o.d, "dimension");

  CertifyOpts cert_o;
  auto* cert_cmd = app.add_subcommand("certify", "fidelity bound, Schmidt number and E_D");
  cert_cmd->add_option("--tt", cert_o.tt, "TT matrix file")->required();
  cert_cmd->add_option("--ff", cert_o.ff, "FF matrix file")->required();
  cert_cmd->add_option("--tf", cert_o.tf, "TF matrix file");
  cert_cmd->add_option("--ft", cert_o.ft, "FT matrix file");
  cert_cmd->add_option("--d", cert_o.d, "dimension");
  cert_cmd->add_option("--samples", cert_o.samples, "bootstrap replicates");
  cert_cmd->add_flag("--no-bootstrap", cert_o.no_bootstrap, "skip error propagation");

  RateOpts key_o;
  auto* key_cmd = app.add_subcommand("keyrate", "finite-size and asymptotic key length");
  add_rate_options(key_cmd, key_o);

  SweepOpts sweep_o;
  auto* sweep_cmd = app.add_subcommand("sweep", "key rate over dimension, block size or splitting ratio");
  add_rate_options(sweep_cmd, sweep_o.rate);
  sweep_cmd->add_option("--matrices", sweep_o.rate.matrices, "full-frame matrix directory");
  sweep_cmd->add_option("--variable", sweep_o.variable, "dimension, block_size or splitting_ratio");
  sweep_cmd->add_option("--grid", sweep_o.grid, "comma-separated values");

  ReportOpts rep_o;
  auto* rep_cmd = app.add_subcommand("report", "run the full pipeline and write the report bundle");
  rep_cmd->add_option("--tags", rep_o.tags, "tag file");
  rep_cmd->add_option("--cross-tags", rep_o.cross_tags, "separate cross-basis tag file");
  rep_cmd->add_option("--matrices", rep_o.matrices, "full-frame matrix directory");
  rep_cmd->add_option("--samples", rep_o.samples, "bootstrap replicates");
  rep_cmd->add_flag("--no-bootstrap", rep_o.no_bootstrap, "skip error propagation");
  rep_cmd->add_option("--d", rep_o.dims, "dimensions")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::config);
  }

  try {
    if (*sim_cmd) return run_simulate(g, sim_o);
    if (*bin_cmd) return run_bin(g, bin_o);
    if (*mub_cmd) return run_mub(g, mub_o);
    if (*cert_cmd) return run_certify(g, cert_o);
    if (*key_cmd) return run_keyrate(g, key_o);
    if (*sweep_cmd) return run_sweep(g, sweep_o);
    if (*rep_cmd) return run_report(g, rep_o);
  } catch (const Error& e) {
    std::cerr << "tfqudit: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "tfqudit: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::data);
  } catch (const std::exception& e) {
    std::cerr << "tfqudit: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::numeric);
  }
  return 0;
}
