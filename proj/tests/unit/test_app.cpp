#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sdgibm/errors.hpp"
#include "sdgibm/experiment.hpp"

using namespace sdgibm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("sdgibm_test_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config resolution and validation") {
  SUBCASE("defaults") {
    ExperimentConfig c;
    c.finalize();
    CHECK(c.rho == 1.0);
    CHECK(c.mu == 1.0);
    CHECK(c.kappa == 1.0);
    CHECK(c.dt == doctest::Approx(0.01));
    CHECK(c.T == doctest::Approx(2.0));  // static experiments run to t = 2
    CHECK(c.K == 200);
  }

  SUBCASE("balloon runs default to t = 3") {
    ExperimentConfig c;
    c.kind = CurveKind::balloon;
    c.K = 120;
    c.finalize();
    CHECK(c.T == doctest::Approx(3.0));
    CHECK(c.dt == doctest::Approx(0.025));
  }

  SUBCASE("inconsistent time grid is rejected") {
    ExperimentConfig c;
    c.T = 2.0;
    c.K = 100;
    c.dt = 0.01;  // 100 * 0.01 != 2
    CHECK_THROWS_AS(c.finalize(), Error);
  }

  SUBCASE("string keys round trip") {
    ExperimentConfig c;
    c.set("experiment", "balloon");
    c.set("kappa", "4");
    c.set("m", "128");
    CHECK(c.kind == CurveKind::balloon);
    CHECK(c.get("kappa") == "4");
    CHECK(c.get("m") == "128");
    CHECK_THROWS_AS(c.set("colour", "blue"), Error);
    CHECK_THROWS_AS(c.set("N", "a lot"), Error);
  }

  SUBCASE("config file with flag-style overrides") {
    TempDir tmp;
    const auto file = tmp.path / "run.cfg";
    std::ofstream(file) << "# test configuration\nexperiment = l-shape\nN = 8\nm= 32\n\n"
                           "kappa = 2.5  # trailing comment\n";
    ExperimentConfig c;
    c.load_file(file.string());
    CHECK(c.kind == CurveKind::l_shape);
    CHECK(c.N == 8);
    CHECK(c.m == 32);
    CHECK(c.kappa == 2.5);
    c.set("N", "16");  // later settings win
    CHECK(c.N == 16);

    std::ofstream(tmp.path / "bad.cfg") << "just words\n";
    ExperimentConfig d;
    CHECK_THROWS_AS(d.load_file((tmp.path / "bad.cfg").string()), Error);
  }
}

TEST_CASE("zero elasticity is a no-op flow") {
  ExperimentConfig c;
  c.kind = CurveKind::ellipse_static;
  c.N = 4;
  c.m = 16;
  c.K = 5;
  c.T = 0.05;
  c.kappa = 0.0;
  const RunRecord record = run_experiment(c);
  CHECK(record.termination == Termination::completed);
  const auto markers0 = init_curve(CurveKind::ellipse_static, 0.0, 16);
  for (int i = 0; i < 16; ++i) {
    CHECK(record.final_markers.X[i].x == markers0.X[i].x);
    CHECK(record.final_markers.X[i].y == markers0.X[i].y);
  }
  for (const auto& row : record.steps) {
    CHECK(row.area_change_pct == 0.0);
    CHECK(row.eta == 0.0);
  }
}

TEST_CASE("run outputs") {
  TempDir tmp;
  ExperimentConfig c;
  c.kind = CurveKind::ellipse_static;
  c.N = 4;
  c.m = 16;
  c.K = 12;
  c.T = 0.12;
  c.snapshot_stride = 5;
  c.outdir = (tmp.path / "a").string();
  const RunRecord record = run_experiment(c);

  CHECK(record.steps.front().area_change_pct == 0.0);
  CHECK(record.steps.size() == 13);  // initial row plus one per step

  const std::string area = slurp(tmp.path / "a" / "area_history.csv");
  CHECK(area.rfind("step,t,area,area_change_pct,E,eta,picard_iters,blown_up\n", 0) == 0);
  // 17 significant digits survive in the output
  char expected[40];
  std::snprintf(expected, sizeof(expected), "%.17g", record.steps[0].area);
  CHECK(area.find(expected) != std::string::npos);

  CHECK(fs::exists(tmp.path / "a" / "markers_0.csv"));
  CHECK(fs::exists(tmp.path / "a" / "markers_5.csv"));
  CHECK(fs::exists(tmp.path / "a" / "markers_10.csv"));
  CHECK(fs::exists(tmp.path / "a" / "markers_12.csv"));  // final step
  const std::string markers = slurp(tmp.path / "a" / "markers_0.csv");
  CHECK(markers.rfind("step,i,s,x,y\n", 0) == 0);

  const std::string meta = slurp(tmp.path / "a" / "run.meta");
  CHECK(meta.find("experiment = ellipse-static") != std::string::npos);
  CHECK(meta.find("energy_K0 = 1") != std::string::npos);
  CHECK(meta.find("termination = completed") != std::string::npos);

  SUBCASE("reruns are bit identical") {
    c.outdir = (tmp.path / "b").string();
    run_experiment(c);
    CHECK(slurp(tmp.path / "a" / "area_history.csv") == slurp(tmp.path / "b" / "area_history.csv"));
    CHECK(slurp(tmp.path / "a" / "markers_12.csv") == slurp(tmp.path / "b" / "markers_12.csv"));
  }
}

TEST_CASE("sweep") {
  TempDir tmp;
  SweepSpec spec;
  spec.base.kind = CurveKind::ellipse_static;
  spec.base.N = 4;
  spec.base.T = 0.04;
  spec.base.K = 4;
  spec.axes.emplace_back("m", std::vector<std::string>{"8", "16"});
  spec.axes.emplace_back("kappa", std::vector<std::string>{"1", "2", "4"});
  CHECK(sweep_point_count(spec) == 6);

  // the last axis varies fastest
  CHECK(sweep_point_config(spec, 0).m == 8);
  CHECK(sweep_point_config(spec, 0).kappa == 1.0);
  CHECK(sweep_point_config(spec, 1).kappa == 2.0);
  CHECK(sweep_point_config(spec, 3).m == 16);

  const auto records = run_sweep(spec, (tmp.path / "sweep").string(), 2);
  CHECK(records.size() == 6);
  const std::string summary = slurp(tmp.path / "sweep" / "summary.csv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 7);  // header + 6 rows
  for (int i = 0; i < 6; ++i)
    CHECK(fs::exists(tmp.path / "sweep" / ("run_" + std::to_string(i)) / "area_history.csv"));

  SUBCASE("sweeping dt at a fixed horizon re-derives K") {
    SweepSpec time_spec;
    time_spec.base.kind = CurveKind::ellipse_static;
    time_spec.base.N = 4;
    time_spec.base.m = 8;
    time_spec.base.T = 0.1;
    time_spec.axes.emplace_back("dt", std::vector<std::string>{"0.01", "0.005"});
    CHECK(sweep_point_config(time_spec, 0).K == 0);  // resolved by finalize
    auto c0 = sweep_point_config(time_spec, 0);
    c0.finalize();
    CHECK(c0.K == 10);
    auto c1 = sweep_point_config(time_spec, 1);
    c1.finalize();
    CHECK(c1.K == 20);
  }
}

TEST_CASE("rotating body force matches finite differences of the closed form") {
  const double rho = 1.3, mu = 0.7, h = 1e-5;
  for (const Vec2 p : {Vec2(0.31, 0.57), Vec2(0.12, 0.83), Vec2(0.5, 0.25)}) {
    const Vec2 v = rotating_velocity_field(p);
    const Vec2 vxp = rotating_velocity_field({p.x + h, p.y});
    const Vec2 vxm = rotating_velocity_field({p.x - h, p.y});
    const Vec2 vyp = rotating_velocity_field({p.x, p.y + h});
    const Vec2 vym = rotating_velocity_field({p.x, p.y - h});
    const Vec2 dvdx = (vxp - vxm) / (2 * h), dvdy = (vyp - vym) / (2 * h);
    const Vec2 lap = (vxp + vxm + vyp + vym - 4.0 * v) / (h * h);
    const Vec2 expected{rho * (v.x * dvdx.x + v.y * dvdy.x) - mu * lap.x,
                        rho * (v.x * dvdx.y + v.y * dvdy.y) - mu * lap.y};
    const Vec2 got = rotating_velocity_body_force(p, rho, mu);
    CHECK(got.x == doctest::Approx(expected.x).epsilon(1e-5));
    CHECK(got.y == doctest::Approx(expected.y).epsilon(1e-5));
    // the field itself vanishes on the boundary and is divergence free
    CHECK(std::abs(dvdx.x + dvdy.y) < 1e-5);
  }
  const Vec2 edge = rotating_velocity_field({0.0, 0.37});
  CHECK(edge.x == 0.0);
  CHECK(edge.y == 0.0);
}
