#include <doctest.h>

#include <cstdlib>

#include "mgkt/config.hpp"
#include "mgkt/error.hpp"
#include "tempdir.hpp"

using namespace mgkt;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("defaults match the reference settings") {
  const RunConfig c;
  CHECK(c.margin == 5.0);
  CHECK(c.gamma_d == 0.4);
  CHECK(c.theta == 0.8);
  CHECK(c.alpha == 0.7);
  CHECK(c.beta == 1.0);
  CHECK(c.dim == 512);
  CHECK(c.lp_lr == 5e-4);
  CHECK(c.align_lr == 4e-4);
  CHECK(c.neg_rate == 10);
  CHECK(c.kt);
  CHECK(c.mm);
  CHECK(c.de);
}

TEST_CASE("values parse and print back") {
  RunConfig c;
  set_config_value(c, "gamma_d", "0.8");
  set_config_value(c, "split", "0.5, 0.25,0.25");
  set_config_value(c, "variant", "distmult");
  set_config_value(c, "de", "off");
  set_config_value(c, "seed_mode", "bootstrap");
  CHECK(c.gamma_d == 0.8);
  CHECK(c.split == std::array<double, 3>{0.5, 0.25, 0.25});
  CHECK(c.variant == LpVariant::DistMult);
  CHECK_FALSE(c.de);
  CHECK(c.seed_mode == SeedMode::Bootstrap);
  CHECK(c.explicit_keys.contains("de"));
  const auto text = config_to_string(c);
  CHECK(text.find("gamma_d = 0.8\n") != std::string::npos);
  CHECK(text.find("split = 0.5,0.25,0.25\n") != std::string::npos);
  CHECK(text.find("de = off\n") != std::string::npos);

  CHECK(code_of([] { RunConfig x; set_config_value(x, "gama_d", "1"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { RunConfig x; set_config_value(x, "theta", "1.0"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { RunConfig x; set_config_value(x, "layers", "4"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { RunConfig x; set_config_value(x, "kt", "maybe"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { RunConfig x; set_config_value(x, "split", "0.5,0.5"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { RunConfig x; set_config_value(x, "gamma_d", "-1"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("every printed configuration parses back to itself") {
  RunConfig c;
  c.graph_a = "/data/a.tsv";
  c.lp_init = 0.125;
  c.alpha_mode = AlphaMode::Computed;
  const auto dir = mgkt::testing::temp_dir("config");
  mgkt::testing::write_text_file(dir / "c.cfg", config_to_string(c));
  const auto back = load_config(dir / "c.cfg");
  CHECK(config_to_string(back) == config_to_string(c));
}

TEST_CASE("config files resolve relative paths and report line numbers") {
  const auto dir = mgkt::testing::temp_dir("config_file");
  mgkt::testing::write_text_file(dir / "run.cfg", "# comment\ngraph_a = a.tsv   # trailing\nlayers = 3\n");
  const auto c = load_config(dir / "run.cfg");
  CHECK(c.graph_a == dir / "a.tsv");
  CHECK(c.layers == 3);
  mgkt::testing::write_text_file(dir / "bad.cfg", "layers = 2\nlayers = nine\n");
  try {
    load_config(dir / "bad.cfg");
    FAIL("expected ConfigInvalid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
    CHECK(e.message().find("bad.cfg:2:") != std::string::npos);
    CHECK(e.message().find("ConfigInvalid") == std::string::npos);
  }
  mgkt::testing::write_text_file(dir / "noeq.cfg", "layers 2\n");
  CHECK(code_of([&] { load_config(dir / "noeq.cfg"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([&] { load_config(dir / "absent.cfg"); }) == ErrorCode::Io);
}

TEST_CASE("environment variables replace input paths") {
  RunConfig c;
  c.graph_a = "from_config.tsv";
  ::setenv("MGKT_GRAPH_A", "/env/a.tsv", 1);
  ::setenv("MGKT_TRUTH", "", 1);
  apply_env_overrides(c);
  ::unsetenv("MGKT_GRAPH_A");
  ::unsetenv("MGKT_TRUTH");
  CHECK(c.graph_a == "/env/a.tsv");
  CHECK(c.truth.empty());
}

TEST_CASE("component lattice: mm and de require kt") {
  RunConfig implicit;
  implicit.kt = false;
  check_dependencies(implicit);
  CHECK_FALSE(implicit.mm);
  CHECK_FALSE(implicit.de);

  RunConfig enabled;
  set_config_value(enabled, "kt", "off");
  set_config_value(enabled, "mm", "on");
  CHECK(code_of([&] { check_dependencies(enabled); }) == ErrorCode::ConfigDependency);

  RunConfig off;
  set_config_value(off, "kt", "off");
  set_config_value(off, "de", "off");
  check_dependencies(off);
  CHECK_FALSE(off.mm);

  RunConfig on;
  set_config_value(on, "mm", "off");
  check_dependencies(on);
  CHECK(on.de);
  CHECK_FALSE(on.mm);
}

TEST_CASE("synth spec keys round trip") {
  SynthSpec s;
  for (const auto& [key, help] : synth_spec_keys()) {
    CHECK_FALSE(help.empty());
    set_synth_value(s, key, synth_value(s, key));
  }
  set_synth_value(s, "p_dangling", "0.25");
  CHECK(s.p_dangling == 0.25);
  CHECK(synth_value(s, "n_genes") == "150");
  CHECK(code_of([&] { set_synth_value(s, "bogus", "1"); }) == ErrorCode::ConfigInvalid);
}
