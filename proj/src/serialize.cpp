#include "tfqudit/serialize.hpp"

#include <set>

namespace tfq {

namespace {

// Reads optional fields from an object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string_view what) : j_(j), what_(what) {
    if (!j.is_object()) throw ConfigError(what_ + ": expected a JSON object");
  }

  template <class T>
  Reader& opt(const char* key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        it->get_to(out);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(what_ + "." + key + ": " + e.what());
      }
    }
    return *this;
  }

  template <class T, class Convert>
  Reader& opt(const char* key, T& out, Convert convert) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      if (!it->is_string()) throw ConfigError(what_ + "." + key + ": expected a string");
      out = convert(it->template get<std::string>());
    }
    return *this;
  }

  void done() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(what_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

}  // namespace

void to_json(json& j, const BinningConfig& c) {
  j = json{{"tau_ps", c.tau_ps},
           {"n_bins", c.n_bins},
           {"frame_origin_ps", c.frame_origin_ps},
           {"pairing_window_ps", c.pairing_window_ps}};
}

void from_json(const json& j, BinningConfig& c) {
  Reader(j, "binning")
      .opt("tau_ps", c.tau_ps)
      .opt("n_bins", c.n_bins)
      .opt("frame_origin_ps", c.frame_origin_ps)
      .opt("pairing_window_ps", c.pairing_window_ps)
      .done();
}

void to_json(json& j, const SecurityParams& s) {
  j = json{{"eps_at", s.eps_at},
           {"eps_pa", s.eps_pa},
           {"eps_ev", s.eps_ev},
           {"eps_tilde", s.eps_tilde},
           {"theta_form", std::string(to_string(s.theta_form))}};
  j["alpha"] = s.alpha ? json(*s.alpha) : json(nullptr);
}

void from_json(const json& j, SecurityParams& s) {
  json alpha;
  Reader(j, "security")
      .opt("eps_at", s.eps_at)
      .opt("eps_pa", s.eps_pa)
      .opt("eps_ev", s.eps_ev)
      .opt("eps_tilde", s.eps_tilde)
      .opt("alpha", alpha)
      .opt("theta_form", s.theta_form, [](const std::string& v) { return theta_form_from_string(v); })
      .done();
  if (alpha.is_number()) {
    s.alpha = alpha.get<double>();
  } else if (!alpha.is_null()) {
    throw ConfigError("security.alpha: expected a number or null");
  }
}

void to_json(json& j, const ProtocolConfig& p) {
  j = json{{"n_total", p.n_total},
           {"q", p.q},
           {"d", p.d},
           {"f_ec", p.f_ec},
           {"coincidence_rate", p.coincidence_rate}};
}

void from_json(const json& j, ProtocolConfig& p) {
  Reader(j, "protocol")
      .opt("n_total", p.n_total)
      .opt("q", p.q)
      .opt("d", p.d)
      .opt("f_ec", p.f_ec)
      .opt("coincidence_rate", p.coincidence_rate)
      .done();
}

void to_json(json& j, const BootstrapConfig& b) {
  j = json{{"n_samples", b.n_samples},
           {"seed", b.seed},
           {"sigma_multiplier", b.sigma_multiplier},
           {"threads", b.threads}};
}

void from_json(const json& j, BootstrapConfig& b) {
  Reader(j, "bootstrap")
      .opt("n_samples", b.n_samples)
      .opt("seed", b.seed)
      .opt("sigma_multiplier", b.sigma_multiplier)
      .opt("threads", b.threads)
      .done();
}

void to_json(json& j, const MubThresholds& t) {
  j = json{{"max_delta_m", t.max_delta_m}, {"alpha", t.alpha}};
}

void from_json(const json& j, MubThresholds& t) {
  Reader(j, "mub").opt("max_delta_m", t.max_delta_m).opt("alpha", t.alpha).done();
}

void to_json(json& j, const WitnessReport& r) {
  j = json{{"d", r.d},
           {"f1", r.f1},
           {"f2_tilde", r.f2_tilde},
           {"f_tilde", r.f_tilde},
           {"d_ent", r.d_ent},
           {"e_d", r.e_d},
           {"e_d_clamped", r.e_d_clamped},
           {"h_tt", r.h_tt},
           {"h_ff", r.h_ff},
           {"max_overlap", r.max_overlap},
           {"shift_tt", r.shift_tt},
           {"shift_ff", r.shift_ff}};
}

void to_json(json& j, const MubReport& r) {
  j = json{{"delta_m", r.delta_m},
           {"d", r.d},
           {"basis_pair", std::string(to_string(r.basis))},
           {"max_overlap_hypothesis", r.max_overlap_hypothesis}};
}

void to_json(json& j, const ConsistencyResult& r) {
  j = json{{"pass", r.pass}, {"statistic", r.statistic}, {"dof", r.dof}, {"p_value", r.p_value}};
}

void to_json(json& j, const MubAssessment& a) {
  j = json{{"report", a.report},
           {"test", a.test},
           {"verdict", to_string(a.verdict)},
           {"max_overlap", a.max_overlap}};
}

void to_json(json& j, const KeyComponents& c) {
  j = json{{"W", c.W},           {"mu", c.mu},       {"h_min", c.h_min},
           {"b_stat", c.b_stat}, {"lambda_ec", c.lambda_ec}, {"theta", c.theta},
           {"log2_g", c.log2_g}, {"alpha", c.alpha}, {"n", c.n},
           {"k_w", c.k_w}};
}

void to_json(json& j, const KeyRateResult& r) {
  j = json{{"regime", std::string(to_string(r.regime))},
           {"ell", r.ell},
           {"rate_per_round", r.rate_per_round},
           {"rate_bps", r.rate_bps},
           {"eps_secrecy", r.eps_secrecy},
           {"eps_correctness", r.eps_correctness},
           {"components", r.components}};
}

void to_json(json& j, const BootstrapSummary& s) {
  j = json{{"mean", s.mean},   {"sigma", s.sigma}, {"lower", s.lower},
           {"upper", s.upper}, {"min", s.min},     {"max", s.max},
           {"n_ok", s.n_ok},   {"n_failed", s.n_failed}};
}

namespace sim {

void to_json(json& j, const SourceModel& s) {
  j = json{{"pair_rate", s.pair_rate},
           {"spectral_fwhm_ghz", s.spectral_fwhm_ghz},
           {"correlation_time_ps", s.correlation_time_ps},
           {"center_wavelength_nm", s.center_wavelength_nm}};
}

void from_json(const json& j, SourceModel& s) {
  Reader(j, "source")
      .opt("pair_rate", s.pair_rate)
      .opt("spectral_fwhm_ghz", s.spectral_fwhm_ghz)
      .opt("correlation_time_ps", s.correlation_time_ps)
      .opt("center_wavelength_nm", s.center_wavelength_nm)
      .done();
}

void to_json(json& j, const DetectorModel& d) {
  j = json{{"jitter_fwhm_ps", d.jitter_fwhm_ps},
           {"efficiency", d.efficiency},
           {"dark_rate", d.dark_rate},
           {"delay_ps", d.delay_ps}};
}

void from_json(const json& j, DetectorModel& d) {
  Reader(j, "detector")
      .opt("jitter_fwhm_ps", d.jitter_fwhm_ps)
      .opt("efficiency", d.efficiency)
      .opt("dark_rate", d.dark_rate)
      .opt("delay_ps", d.delay_ps)
      .done();
}

void to_json(json& j, const DispersionModel& d) {
  j = json{{"dispersion_ps_per_nm", d.dispersion_ps_per_nm}, {"loss_db", d.loss_db}};
}

void from_json(const json& j, DispersionModel& d) {
  Reader(j, "dispersion")
      .opt("dispersion_ps_per_nm", d.dispersion_ps_per_nm)
      .opt("loss_db", d.loss_db)
      .done();
}

void to_json(json& j, const SimConfig& c) {
  j = json{{"source", c.source},
           {"detectors", c.detectors},
           {"dispersion", c.dispersion},
           {"path_loss_db", c.path_loss_db},
           {"residual_dispersion_ps_per_nm", c.residual_dispersion_ps_per_nm},
           {"basis_split", c.basis_split},
           {"duration_s", c.duration_s},
           {"seed", c.seed},
           {"segment_s", c.segment_s}};
}

void from_json(const json& j, SimConfig& c) {
  Reader(j, "simulation")
      .opt("source", c.source)
      .opt("detectors", c.detectors)
      .opt("dispersion", c.dispersion)
      .opt("path_loss_db", c.path_loss_db)
      .opt("residual_dispersion_ps_per_nm", c.residual_dispersion_ps_per_nm)
      .opt("basis_split", c.basis_split)
      .opt("duration_s", c.duration_s)
      .opt("seed", c.seed)
      .opt("segment_s", c.segment_s)
      .done();
}

}  // namespace sim

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace tfq
