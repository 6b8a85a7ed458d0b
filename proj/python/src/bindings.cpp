#include <cstdint>
#include <string>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tfqudit/coincidence.hpp"
#include "tfqudit/error.hpp"
#include "tfqudit/mub.hpp"
#include "tfqudit/pipeline.hpp"
#include "tfqudit/security.hpp"
#include "tfqudit/serialize.hpp"
#include "tfqudit/simulation.hpp"
#include "tfqudit/witness.hpp"

namespace py = pybind11;
using namespace tfq;

namespace {

using CountArray = py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>;
using ProbArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using TagArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

std::size_t square_dim(const py::buffer_info& info) {
  if (info.ndim != 2 || info.shape[0] != info.shape[1] || info.shape[0] < 1) {
    throw DataError("expected a non-empty square 2-d array");
  }
  return static_cast<std::size_t>(info.shape[0]);
}

CoincidenceMatrix to_matrix(const CountArray& a, const std::string& basis, double duration_s) {
  const auto info = a.request();
  const std::size_t d = square_dim(info);
  const auto* p = static_cast<const std::uint64_t*>(info.ptr);
  return CoincidenceMatrix(CountGrid(d, std::vector<std::uint64_t>(p, p + d * d)),
                           basis_pair_from_string(basis), duration_s);
}

JointDistribution to_joint(const ProbArray& a, BasisPair basis) {
  const auto info = a.request();
  const std::size_t d = square_dim(info);
  const auto* p = static_cast<const double*>(info.ptr);
  return JointDistribution(ProbGrid(d, std::vector<double>(p, p + d * d)), basis);
}

CountArray to_array(const CoincidenceMatrix& m) {
  const std::size_t d = m.dim();
  CountArray out({d, d});
  auto src = m.counts().values();
  std::copy(src.begin(), src.end(), out.mutable_data());
  return out;
}

// Reports travel as JSON so Python sees the same field names as the CLI output.
py::object to_py(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

json from_py(const py::object& o) {
  if (o.is_none()) return json::object();
  return parse_json(py::module_::import("json").attr("dumps")(o).cast<std::string>(), "argument");
}

template <class T>
T config_from(const py::object& o, const char* what) {
  T value{};
  const json j = from_py(o);
  if (!j.empty()) value = json_as<T>(j, what);
  return value;
}

TagStream to_stream(const TagArray& a, std::uint8_t ch, double duration_s) {
  const auto info = a.request();
  if (info.ndim != 1) throw DataError("tag arrays must be 1-d");
  const auto* p = static_cast<const std::int64_t*>(info.ptr);
  return TagStream(ch, std::vector<Picoseconds>(p, p + info.shape[0]), duration_s);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-frequency qudit entanglement certification and key rates";
  m.attr("__version__") = "0.1.0";

  // translators run last-registered first, so the base class goes first
  auto base = py::register_exception<Error>(m, "TfqError");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  // witness
  m.def("certify_schmidt_number",
        [](double fidelity, std::size_t d) {
          return certify_schmidt_number(fidelity, TargetState::maximally_entangled(d));
        },
        py::arg("fidelity"), py::arg("d"));
  m.def("f2_tilde",
        [](const ProbArray& tt, const ProbArray& ff) {
          return f2_tilde(to_joint(tt, BasisPair::TT), to_joint(ff, BasisPair::FF));
        },
        py::arg("tt"), py::arg("ff"), "Off-diagonal fidelity bound from normalized distributions.");
  m.def("conditional_entropy",
        [](const ProbArray& p) { return conditional_entropy(to_joint(p, BasisPair::TT)); },
        py::arg("p"));
  m.def("certify",
        [](const ProbArray& tt, const ProbArray& ff, py::object max_overlap) {
          const auto jt = to_joint(tt, BasisPair::TT);
          const auto jf = to_joint(ff, BasisPair::FF);
          const double ov = max_overlap.is_none() ? 1.0 / static_cast<double>(jt.dim())
                                                  : max_overlap.cast<double>();
          return to_py(certify(jt, jf, TargetState::maximally_entangled(jt.dim()), ov));
        },
        py::arg("tt"), py::arg("ff"), py::arg("max_overlap") = py::none(),
        "Certification of aligned distributions; max_overlap defaults to 1/d.");

  // mub
  m.def("delta_m",
        [](const ProbArray& p) { return delta_m(to_joint(p, BasisPair::TF)).delta_m; },
        py::arg("p"));
  m.def("assess_mub",
        [](const CountArray& counts, py::object thresholds) {
          return to_py(assess_mub(to_matrix(counts, "TF", 1.0),
                                  config_from<MubThresholds>(thresholds, "mub")));
        },
        py::arg("counts"), py::arg("thresholds") = py::none());

  // coincidence
  m.def("bin_full_frame",
        [](const TagArray& a, const TagArray& b, Picoseconds tau_ps, std::size_t n_bins,
           double duration_s) {
          const auto cfg = BinningConfig::half_frame(tau_ps, n_bins);
          return to_array(bin_full_frame(to_stream(a, 0, duration_s), to_stream(b, 2, duration_s), cfg));
        },
        py::arg("a"), py::arg("b"), py::arg("tau_ps"), py::arg("n_bins"), py::arg("duration_s"),
        "Full-frame coincidence counts with a half-frame pairing window.");
  m.def("subspace_extract",
        [](const CountArray& full, std::size_t d) {
          return to_array(subspace_extract(to_matrix(full, "TT", 1.0), d));
        },
        py::arg("full"), py::arg("d"));

  // simulation
  m.def("simulate",
        [](const std::string& preset, std::uint64_t seed, py::object overrides) {
          sim::SimConfig cfg;
          if (preset == "paper") {
            cfg = sim::paper_calibrated(seed);
          } else if (preset == "cross") {
            cfg = sim::cross_basis(seed);
          } else if (preset == "ideal") {
            cfg = sim::ideal(1e6, 1.0, seed);
          } else {
            throw ConfigError("unknown preset '" + preset + "' (paper, cross, ideal)");
          }
          const json patch = from_py(overrides);
          if (!patch.empty()) {
            json merged = cfg;
            merged.merge_patch(patch);
            cfg = json_as<sim::SimConfig>(merged, "simulation");
          }
          const auto out = [&] {
            py::gil_scoped_release release;
            return sim::simulate(cfg);
          }();
          py::dict streams;
          for (const auto& s : out.streams) {
            TagArray arr(s.size());
            std::copy(s.tags().begin(), s.tags().end(), arr.mutable_data());
            streams[py::int_(s.channel())] = arr;
          }
          return py::make_tuple(streams, to_py(json(cfg)));
        },
        py::arg("preset") = "paper", py::arg("seed") = 0, py::arg("overrides") = py::none(),
        "Returns ({channel: tags_ps}, resolved config).");

  // security
  m.def("hoeffding_mu", &hoeffding_mu, py::arg("k_w"), py::arg("eps_at"));
  m.def("h_min", &h_min, py::arg("W"), py::arg("mu"), py::arg("d"));
  m.def("asymptotic_rate", py::overload_cast<double, double, std::size_t, double>(&asymptotic_rate),
        py::arg("W"), py::arg("h_tt"), py::arg("d"), py::arg("f_ec") = 1.1);
  m.def("key_rate",
        [](std::size_t d, double w, double h_tt, const std::string& regime, py::object protocol,
           py::object security, double coincidence_rate) {
          RateInputs in{d, w, h_tt, 0.0, coincidence_rate};
          return to_py(evaluate_key_rate(in, config_from<ProtocolConfig>(protocol, "protocol"),
                                         config_from<SecurityParams>(security, "security"),
                                         regime_from_string(regime)));
        },
        py::arg("d"), py::arg("W"), py::arg("h_tt"), py::arg("regime") = "collective",
        py::arg("protocol") = py::none(), py::arg("security") = py::none(),
        py::arg("coincidence_rate") = 0.0);

  // end to end
  m.def("analyze",
        [](const CountArray& tt, const CountArray& ff, py::object tf, py::object ft,
           py::object config) {
          const auto cfg = config_from<PipelineConfig>(config, "config");
          const auto mtt = to_matrix(tt, "TT", 1.0);
          const auto mff = to_matrix(ff, "FF", 1.0);
          std::optional<CoincidenceMatrix> mtf, mft;
          if (!tf.is_none()) mtf = to_matrix(tf.cast<CountArray>(), "TF", 1.0);
          if (!ft.is_none()) mft = to_matrix(ft.cast<CountArray>(), "FT", 1.0);
          DimensionResult r;
          {
            py::gil_scoped_release release;
            r = analyze_submatrices(mtt, mff, mtf ? &*mtf : nullptr, mft ? &*mft : nullptr, cfg);
          }
          return to_py(json(r));
        },
        py::arg("tt"), py::arg("ff"), py::arg("tf") = py::none(), py::arg("ft") = py::none(),
        py::arg("config") = py::none(), "Per-dimension report of d x d count matrices.");
  m.def("run_pipeline",
        [](py::object config) {
          const auto cfg = config_from<PipelineConfig>(config, "config");
          PipelineResult r;
          {
            py::gil_scoped_release release;
            r = run_pipeline(cfg);
          }
          return to_py(r.summary);
        },
        py::arg("config"), "Runs the full analysis and returns the summary written to disk.");
}
