#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hmcf/cli_runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hmcf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hmcf_test_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string write_config(const fs::path& dir, const std::string& name,
                         const std::string& body) {
  fs::path p = dir / name;
  std::ofstream out(p);
  out << body;
  return p.string();
}

std::string plane_demo(const fs::path& out_dir, const std::string& extra = "") {
  std::ostringstream cfg;
  cfg << "dim = 1\nresolution = 32\nF = \"2*r - 1.5\"\nR1 = 1\nR2 = 3\n"
         "initial = 1.2\ndt = 1e-3\ndt_policy = adaptive\nt_max = 30\n"
         "stationarity_tol = 1e-8\nseed = 1\noutput_dir = \""
      << out_dir.string() << "\"\nsnapshot_every = 100\n" << extra;
  return cfg.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("check: benchmark config passes, margins printed") {
  TempDir tmp;
  auto cfg = write_config(tmp.path, "a.cfg", plane_demo(tmp.path / "out"));
  std::ostringstream out;
  int code = cmd_check(cfg, {}, out);
  CHECK(code == 0);
  CHECK(out.str().find("condition (a)") != std::string::npos);
  CHECK(out.str().find("admissibility") != std::string::npos);
  // check never touches the output directory
  CHECK_FALSE(fs::exists(tmp.path / "out"));
}

TEST_CASE("check: malformed configs exit 4") {
  TempDir tmp;
  std::ostringstream out;

  SUBCASE("F with invalid grammar, position reported") {
    auto cfg = write_config(tmp.path, "bad_f.cfg",
                            plane_demo(tmp.path / "out", "") + "");
    // rewrite F
    std::string body = plane_demo(tmp.path / "out");
    body.replace(body.find("\"2*r - 1.5\""), 11, "\"2**r\"");
    auto cfg2 = write_config(tmp.path, "bad_f2.cfg", body);
    CHECK(cmd_check(cfg2, {}, out) == 4);
    CHECK(out.str().find("position") != std::string::npos);
  }
  SUBCASE("unknown key") {
    auto cfg = write_config(tmp.path, "unk.cfg",
                            plane_demo(tmp.path / "out") + "bogus_key = 3\n");
    CHECK(cmd_check(cfg, {}, out) == 4);
  }
  SUBCASE("missing required key") {
    auto cfg = write_config(tmp.path, "miss.cfg", "dim = 1\nresolution = 32\n");
    CHECK(cmd_check(cfg, {}, out) == 4);
  }
  SUBCASE("dt above the hard cap") {
    std::string body = plane_demo(tmp.path / "out");
    body.replace(body.find("dt = 1e-3"), 9, "dt = 0.6");
    auto cfg = write_config(tmp.path, "cap.cfg", body);
    CHECK(cmd_check(cfg, {}, out) == 4);
  }
  SUBCASE("nonexistent file") { CHECK(cmd_check("/no/such/file.cfg", {}, out) == 4); }
}

TEST_CASE("check: warnings exit 5") {
  TempDir tmp;
  std::ostringstream out;
  // Constant F cannot satisfy the barrier inequalities.
  std::string body = plane_demo(tmp.path / "out");
  body.replace(body.find("\"2*r - 1.5\""), 11, "\"2.1\"");
  auto cfg = write_config(tmp.path, "warn.cfg", body);
  CHECK(cmd_check(cfg, {}, out) == 5);
  CHECK(out.str().find("warnings") != std::string::npos);
}

TEST_CASE("flow: converges on the plane demo, artifacts written") {
  TempDir tmp;
  fs::path out_dir = tmp.path / "out";
  auto cfg = write_config(tmp.path, "flow.cfg", plane_demo(out_dir));
  std::ostringstream out;
  int code = cmd_flow(cfg, {}, out);
  CHECK(code == 0);
  CHECK(fs::exists(out_dir / "diagnostics.csv"));
  CHECK(fs::exists(out_dir / "final_u.txt"));
  CHECK(fs::exists(out_dir / "report.json"));
  CHECK(fs::exists(out_dir / "snapshot_00000000.txt"));

  SupportField final_u = read_support_field_file((out_dir / "final_u.txt").string());
  CHECK((final_u.values().array() - 1.5).abs().maxCoeff() < 1e-7);

  std::string diag = read_file(out_dir / "diagnostics.csv");
  CHECK(diag.rfind("step,t,dt,residual_sup,G_min,convexity_margin,radial_min,radial_max,"
                   "energy_accum\n", 0) == 0);
}

TEST_CASE("flow: t_max too small exits 1") {
  TempDir tmp;
  std::string body = plane_demo(tmp.path / "out");
  body.replace(body.find("t_max = 30"), 10, "t_max = 0.01");
  auto cfg = write_config(tmp.path, "short.cfg", body);
  std::ostringstream out;
  CHECK(cmd_flow(cfg, {}, out) == 1);
}

TEST_CASE("flow: strict conditions refuse a config with warnings") {
  TempDir tmp;
  std::string body = plane_demo(tmp.path / "out", "strict_conditions = true\n");
  body.replace(body.find("\"2*r - 1.5\""), 11, "\"2.1\"");
  auto cfg = write_config(tmp.path, "strict.cfg", body);
  std::ostringstream out;
  CHECK(cmd_flow(cfg, {}, out) == 5);
  CHECK(fs::exists(tmp.path / "out" / "report.json"));
}

TEST_CASE("flow: inadmissible initial data exits 2 without stepping") {
  TempDir tmp;
  std::string body = plane_demo(tmp.path / "out");
  body.replace(body.find("initial = 1.2"), 13, "initial = 2.0");  // G < 0
  auto cfg = write_config(tmp.path, "inadm.cfg", body);
  std::ostringstream out;
  CHECK(cmd_flow(cfg, {}, out) == 2);
  CHECK_FALSE(fs::exists(tmp.path / "out" / "diagnostics.csv"));
}

TEST_CASE("flow: byte-identical diagnostics across reruns") {
  TempDir tmp;
  auto cfg = write_config(tmp.path, "det.cfg", plane_demo(tmp.path / "out_a"));
  std::ostringstream out;
  REQUIRE(cmd_flow(cfg, {}, out) == 0);
  Overrides o{{"output_dir", "\"" + (tmp.path / "out_b").string() + "\""}};
  REQUIRE(cmd_flow(cfg, o, out) == 0);
  CHECK(read_file(tmp.path / "out_a" / "diagnostics.csv") ==
        read_file(tmp.path / "out_b" / "diagnostics.csv"));
  CHECK(read_file(tmp.path / "out_a" / "final_u.txt") ==
        read_file(tmp.path / "out_b" / "final_u.txt"));

  // The report depends only on the config: rerunning into the same directory
  // reproduces it byte for byte.
  std::string first = read_file(tmp.path / "out_a" / "report.json");
  Overrides oa{{"output_dir", "\"" + (tmp.path / "out_a").string() + "\""}};
  REQUIRE(cmd_flow(cfg, oa, out) == 0);
  CHECK(read_file(tmp.path / "out_a" / "report.json") == first);
}

TEST_CASE("overrides mirror config keys") {
  TempDir tmp;
  auto cfg = write_config(tmp.path, "base.cfg", plane_demo(tmp.path / "out"));
  std::ostringstream out;
  Overrides o{{"t_max", "0.01"}, {"output_dir", "\"" + (tmp.path / "ovr").string() + "\""}};
  CHECK(cmd_flow(cfg, o, out) == 1);
  CHECK(fs::exists(tmp.path / "ovr" / "report.json"));
}

TEST_CASE("field files round-trip bit-exactly") {
  TempDir tmp;
  auto dom = build_domain(2, 16);
  VectorXd v(dom->node_count());
  for (int i = 0; i < v.size(); ++i) v[i] = 1.0 + 1e-3 * std::sin(i * 0.7) + 1e-17 * i;
  SupportField u{ScalarField{dom, v}};
  fs::path p = tmp.path / "field.txt";
  write_support_field_file(p.string(), u);
  SupportField back = read_support_field_file(p.string());
  CHECK(back.domain()->dim() == 2);
  CHECK(back.domain()->resolution() == 16);
  CHECK((back.values() - u.values()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stationary: radial solve and failure modes") {
  TempDir tmp;
  std::ostringstream out;
  std::string body =
      "dim = 2\nresolution = 24\nF = \"3*r - 1\"\nR1 = 0.5\nR2 = 2\ninitial = 0.8\n"
      "dt = 1e-3\nt_max = 10\noutput_dir = \"" + (tmp.path / "st").string() + "\"\n";
  auto cfg = write_config(tmp.path, "st.cfg", body);

  SUBCASE("constant guess converges to the unit sphere, exit 0") {
    CHECK(cmd_stationary(cfg, {}, "0.8", out) == 0);
    SupportField u = read_support_field_file((tmp.path / "st" / "stationary_u.txt").string());
    CHECK((u.values().array() - 1.0).abs().maxCoeff() < 1e-9);
  }
  SUBCASE("default guess comes from the config initial data") {
    CHECK(cmd_stationary(cfg, {}, "", out) == 0);
  }
  SUBCASE("non-convex guess exits 6 with a margin report") {
    auto dom = build_domain(2, 24);
    VectorXd v(dom->node_count());
    for (int i = 0; i < v.size(); ++i)
      v[i] = 1.0 + 0.9 * (2.0 * dom->nodes()(i, 2) * dom->nodes()(i, 2) - 1.0);
    fs::path guess_path = tmp.path / "bad_guess.txt";
    write_support_field_file(guess_path.string(), SupportField{ScalarField{dom, v}});
    CHECK(cmd_stationary(cfg, {}, guess_path.string(), out) == 6);
    CHECK(out.str().find("convex") != std::string::npos);
  }
}

TEST_CASE("flow limit feeds the stationary solver as a guess (oracle pair)") {
  TempDir tmp;
  fs::path out_dir = tmp.path / "flow";
  std::string body =
      "dim = 2\nresolution = 24\nF = \"3*r - 1 + 0.1*x3\"\nR1 = 0.5\nR2 = 2\n"
      "initial = 0.8\ndt = 1e-3\ndt_policy = adaptive\nt_max = 60\n"
      "stationarity_tol = 1e-8\noutput_dir = \"" + out_dir.string() + "\"\n";
  auto cfg = write_config(tmp.path, "pair.cfg", body);
  std::ostringstream out;
  REQUIRE(cmd_flow(cfg, {}, out) == 0);
  Overrides o{{"output_dir", "\"" + (tmp.path / "newton").string() + "\""}};
  REQUIRE(cmd_stationary(cfg, o, (out_dir / "final_u.txt").string(), out) == 0);

  SupportField u_flow = read_support_field_file((out_dir / "final_u.txt").string());
  SupportField u_newton =
      read_support_field_file((tmp.path / "newton" / "stationary_u.txt").string());
  CHECK((u_flow.values() - u_newton.values()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(out.str().find("sup-distance to the initial guess") != std::string::npos);
}

TEST_CASE("plot: artifacts from a finished run; malformed input rejected") {
  TempDir tmp;
  fs::path out_dir = tmp.path / "out";
  auto cfg = write_config(tmp.path, "p.cfg", plane_demo(out_dir));
  std::ostringstream out;
  REQUIRE(cmd_flow(cfg, {}, out) == 0);

  SUBCASE("plane run: residual/margins charts and curve snapshots") {
    CHECK(cmd_plot((out_dir / "diagnostics.csv").string(), out) == 0);
    CHECK(fs::exists(out_dir / "residual_vs_t.svg"));
    CHECK(fs::exists(out_dir / "residual_vs_t.dat"));
    CHECK(fs::exists(out_dir / "margins_vs_t.svg"));
    CHECK(fs::exists(out_dir / "margins_vs_t.dat"));
    int curves = 0, snapshots = 0;
    for (const auto& e : fs::directory_iterator(out_dir)) {
      std::string n = e.path().filename().string();
      if (n.rfind("curve_", 0) == 0) ++curves;
      if (n.rfind("snapshot_", 0) == 0) ++snapshots;
    }
    CHECK(curves == snapshots);
    CHECK(curves >= 1);
  }
  SUBCASE("empty diagnostics file is an error") {
    fs::path empty = tmp.path / "empty.csv";
    std::ofstream(empty).close();
    CHECK(cmd_plot(empty.string(), out) == 4);
  }
  SUBCASE("missing file is an error") {
    CHECK(cmd_plot((tmp.path / "nope.csv").string(), out) == 4);
  }
}

TEST_CASE("plot: space runs produce one point cloud per snapshot") {
  TempDir tmp;
  fs::path out_dir = tmp.path / "out2";
  std::string body =
      "dim = 2\nresolution = 16\nF = \"3*r - 1\"\nR1 = 0.5\nR2 = 2\ninitial = 0.8\n"
      "dt = 1e-3\ndt_policy = adaptive\nt_max = 20\nstationarity_tol = 1e-6\n"
      "snapshot_every = 40\noutput_dir = \"" + out_dir.string() + "\"\n";
  auto cfg = write_config(tmp.path, "n2.cfg", body);
  std::ostringstream out;
  REQUIRE(cmd_flow(cfg, {}, out) == 0);
  REQUIRE(cmd_plot((out_dir / "diagnostics.csv").string(), out) == 0);
  int clouds = 0, snapshots = 0;
  for (const auto& e : fs::directory_iterator(out_dir)) {
    std::string n = e.path().filename().string();
    if (n.rfind("cloud_", 0) == 0) ++clouds;
    if (n.rfind("snapshot_", 0) == 0) ++snapshots;
  }
  CHECK(clouds == snapshots);
  CHECK(clouds >= 2);
}

TEST_CASE("initial = auto picks an admissible constant radius") {
  TempDir tmp;
  std::string body = plane_demo(tmp.path / "out");
  body.replace(body.find("initial = 1.2"), 13, "initial = auto");
  auto cfg = write_config(tmp.path, "auto.cfg", body);
  std::ostringstream out;
  CHECK(cmd_check(cfg, {}, out) == 0);
  CHECK(cmd_flow(cfg, {}, out) == 0);
  SupportField u = read_support_field_file((tmp.path / "out" / "final_u.txt").string());
  CHECK((u.values().array() - 1.5).abs().maxCoeff() < 1e-7);
}

TEST_CASE("overrides leave comment lines alone") {
  TempDir tmp;
  std::string body = "# dt = legacy note\n" + plane_demo(tmp.path / "out");
  auto cfg = write_config(tmp.path, "cmt.cfg", body);
  std::ostringstream out;
  Overrides o{{"dt", "2e-3"}};
  CHECK(cmd_check(cfg, o, out) == 0);
}

#ifdef HMCF_CLI_PATH
TEST_CASE("executable round trip: exit codes through a real process") {
  TempDir tmp;
  auto cfg = write_config(tmp.path, "p.cfg", plane_demo(tmp.path / "out"));
  std::string base = std::string(HMCF_CLI_PATH);
  auto run_cli = [&](const std::string& args) {
    int rc = std::system((base + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
  };
  CHECK(run_cli("check -c " + cfg) == 0);
  CHECK(run_cli("flow -c " + cfg + " --t_max 0.01") == 1);
  CHECK(run_cli("flow -c " + cfg + " --dt 0.6") == 4);
  CHECK(run_cli("check -c /definitely/missing.cfg") == 4);
  CHECK(run_cli("plot " + (tmp.path / "nothing.csv").string()) == 4);

  auto cfg_b = write_config(tmp.path, "q.cfg", plane_demo(tmp.path / "out_b"));
  CHECK(run_cli("sweep " + cfg + " " + cfg_b) == 0);
}
#endif

TEST_CASE("sweep: runs configs concurrently, worst exit code wins") {
  TempDir tmp;
  auto ok = write_config(tmp.path, "ok.cfg", plane_demo(tmp.path / "s1"));
  std::string slow = plane_demo(tmp.path / "s2");
  slow.replace(slow.find("t_max = 30"), 10, "t_max = 0.01");
  auto timeout_cfg = write_config(tmp.path, "to.cfg", slow);
  std::ostringstream out;
  CHECK(cmd_sweep({ok, timeout_cfg}, out) == 1);
  CHECK(fs::exists(tmp.path / "s1" / "report.json"));
  CHECK(fs::exists(tmp.path / "s2" / "report.json"));
}
