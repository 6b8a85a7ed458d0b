#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "tfqudit/error.hpp"
#include "tfqudit/io.hpp"
#include "tfqudit/pipeline.hpp"
#include "tfqudit/serialize.hpp"
#include "tfqudit/simulation.hpp"

using namespace tfq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("tfq_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("matrix files round-trip in both layouts") {
  const auto m = oracle::counts({{1, 0, 7}, {0, 0, 0}, {12345678901ULL, 2, 3}}, BasisPair::FT, 2.5);
  for (auto fmt : {io::MatrixFormat::dense, io::MatrixFormat::sparse}) {
    const auto back = io::parse_matrix(io::format_matrix(m, fmt));
    CHECK(back.counts() == m.counts());
    CHECK(back.basis() == BasisPair::FT);
    CHECK(back.duration_s() == 2.5);
  }
  CHECK_THROWS_AS(io::parse_matrix("{\"d\":2,\"basis_pair\":\"TT\",\"duration\":1,\"format\":\"dense\"}\n1,2\n"),
                  DataError);
  CHECK_THROWS_AS(io::parse_matrix("{\"d\":2,\"basis_pair\":\"XY\",\"duration\":1,\"format\":\"sparse\"}\n"),
                  DataError);
}

TEST_CASE("tag files round-trip, CSV and binary") {
  const auto dir = scratch("tags");
  const std::vector<TagStream> s{TagStream(0, {1, 5, 9}, 0.5), TagStream(2, {3, 4}, 0.5)};
  for (auto fmt : {io::TagFormat::csv, io::TagFormat::binary}) {
    const auto path = dir / (fmt == io::TagFormat::csv ? "t.csv" : "t.bin");
    io::write_tags(path, s, fmt);
    const auto back = io::read_tags(path);
    REQUIRE(back.size() == 2);
    CHECK(std::equal(back.at(0).tags().begin(), back.at(0).tags().end(), s[0].tags().begin(),
                     s[0].tags().end()));
    CHECK(back.at(2).size() == 2);
    CHECK(back.at(2).duration_s() == 0.5);
  }
  std::ofstream(dir / "bad.csv") << "channel,time_ps\n0,abc\n";
  CHECK_THROWS_AS(io::read_tags(dir / "bad.csv"), DataError);
  CHECK_THROWS_AS(io::read_tags(dir / "missing.csv"), DataError);
  fs::remove_all(dir);
}

TEST_CASE("config readers reject unknown keys and bad values") {
  CHECK_THROWS_AS(json_as<BinningConfig>(parse_json(R"({"tau_ps": 10, "bogus": 1})"), "binning"), ConfigError);
  CHECK_THROWS_AS(json_as<SecurityParams>(parse_json(R"({"eps_at": "x"})"), "security"), ConfigError);
  CHECK_THROWS_AS(parse_json("{not json"), ConfigError);
  CHECK_THROWS_AS(json_as<PipelineConfig>(parse_json(R"({"dimensionz": [2]})"), "config"), ConfigError);
  const auto b = json_as<BinningConfig>(parse_json(R"({"tau_ps": 10, "n_bins": 32})"), "binning");
  CHECK(b.tau_ps == 10);
  CHECK(b.n_bins == 32);

  // round trip through JSON keeps every field
  PipelineConfig c;
  c.dimensions = {2, 5};
  c.protocol.q = 0.2;
  c.security.alpha = 1.01;
  const auto back = json_as<PipelineConfig>(json(c), "config");
  CHECK(json(back) == json(c));
}

TEST_CASE("pipeline on ideal data: perfect witness, byte-identical rerun") {
  const auto dir = scratch("pipeline");
  const auto out = sim::simulate(sim::ideal(1e5, 1.0, 21));
  io::write_tags(dir / "tags.bin", {out.streams.begin(), out.streams.end()}, io::TagFormat::binary);

  PipelineConfig cfg;
  cfg.inputs.tags = (dir / "tags.bin").string();
  cfg.dimensions = {2, 4};
  cfg.bootstrap_enabled = false;
  cfg.resume = false;
  cfg.out_dir = (dir / "run").string();
  cfg.sweeps.block_sizes = {1e8};
  cfg.sweeps.splitting_ratios = {0.05, 0.1};
  cfg.sweeps.block_grid = {1e8, 1e10};
  const auto r = run_pipeline(cfg);
  CHECK(r.exit_code == 0);
  REQUIRE(r.dimensions.size() == 2);
  for (const auto& d : r.dimensions) {
    REQUIRE(d.ok);
    CHECK(d.witness.f_tilde == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(d.witness.d_ent == d.d);
    CHECK(d.rate_inputs.w == doctest::Approx(1.0).epsilon(1e-6));
  }
  const auto first = io::read_text(dir / "run" / "reports" / "d0004.json");
  const auto summary = io::read_text(dir / "run" / "summary.json");
  run_pipeline(cfg);
  CHECK(io::read_text(dir / "run" / "reports" / "d0004.json") == first);
  CHECK(io::read_text(dir / "run" / "summary.json") == summary);
  fs::remove_all(dir);
}

TEST_CASE("pipeline records a failing dimension without aborting") {
  const auto dir = scratch("pipeline_err");
  auto out = sim::simulate(sim::ideal(1e4, 0.2, 2));
  // one lone F detection per side, far apart: no FF coincidences, so every
  // dimension fails with a data error
  out.streams[channel::alice_freq] = TagStream(channel::alice_freq, {1'000}, 0.2);
  out.streams[channel::bob_freq] = TagStream(channel::bob_freq, {100'000'000'000}, 0.2);
  io::write_tags(dir / "tags.bin", {out.streams.begin(), out.streams.end()}, io::TagFormat::binary);
  PipelineConfig cfg;
  cfg.inputs.tags = (dir / "tags.bin").string();
  cfg.dimensions = {2, 3};
  cfg.bootstrap_enabled = false;
  cfg.resume = false;
  cfg.out_dir = (dir / "run").string();
  cfg.sweeps.block_sizes = {1e8};
  cfg.sweeps.splitting_ratios = {0.1};
  cfg.sweeps.block_grid = {1e8};
  const auto r = run_pipeline(cfg);
  CHECK(r.partial);
  CHECK(r.exit_code == 3);
  CHECK_FALSE(r.dimensions[0].ok);
  CHECK(r.dimensions[1].error_code == 3);
  CHECK(fs::exists(dir / "run" / "summary.json"));

  cfg.dimensions = {2, 2000};  // more than the 1024 bins
  CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
  fs::remove_all(dir);
}
