#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "sdgibm.h"

namespace fs = std::filesystem;

TEST_CASE("config handle") {
  sdgibm_config* config = sdgibm_config_create();
  REQUIRE(config != nullptr);

  CHECK(sdgibm_config_set(config, "experiment", "balloon") == SDGIBM_OK);
  CHECK(sdgibm_config_set(config, "kappa", "2") == SDGIBM_OK);
  char buf[64];
  CHECK(sdgibm_config_get(config, "experiment", buf, sizeof(buf)) == SDGIBM_OK);
  CHECK(std::string(buf) == "balloon");
  CHECK(sdgibm_config_get(config, "kappa", buf, sizeof(buf)) == SDGIBM_OK);
  CHECK(std::string(buf) == "2");

  CHECK(sdgibm_config_set(config, "no-such-key", "1") == SDGIBM_ERR_BAD_CONFIG);
  CHECK(std::strlen(sdgibm_last_error()) > 0);
  CHECK(sdgibm_config_set(nullptr, "N", "4") == SDGIBM_ERR_INVALID_PARAMETER);

  const fs::path file = fs::temp_directory_path() / "sdgibm_capi.cfg";
  std::ofstream(file) << "N = 4\nm = 12\n";
  CHECK(sdgibm_config_load_file(config, file.string().c_str()) == SDGIBM_OK);
  CHECK(sdgibm_config_get(config, "N", buf, sizeof(buf)) == SDGIBM_OK);
  CHECK(std::string(buf) == "4");
  fs::remove(file);

  sdgibm_config_destroy(config);
}

TEST_CASE("running an experiment through the C interface") {
  sdgibm_config* config = sdgibm_config_create();
  sdgibm_config_set(config, "experiment", "ellipse-static");
  sdgibm_config_set(config, "N", "4");
  sdgibm_config_set(config, "m", "16");
  sdgibm_config_set(config, "K", "5");
  sdgibm_config_set(config, "T", "0.05");

  sdgibm_run* run = nullptr;
  REQUIRE(sdgibm_run_experiment(config, &run) == SDGIBM_OK);
  REQUIRE(run != nullptr);

  CHECK(std::string(sdgibm_run_termination(run)) == "completed");
  CHECK(sdgibm_run_step_count(run) == 6);

  sdgibm_step_stats row0;
  REQUIRE(sdgibm_run_step_stats(run, 0, &row0) == SDGIBM_OK);
  CHECK(row0.step == 0);
  CHECK(row0.area_change_pct == 0.0);
  CHECK(row0.blown_up == 0);
  CHECK(sdgibm_run_step_stats(run, 99, &row0) == SDGIBM_ERR_INVALID_PARAMETER);

  sdgibm_run_summary summary;
  REQUIRE(sdgibm_run_get_summary(run, &summary) == SDGIBM_OK);
  CHECK(summary.steps_completed == 5);
  CHECK(summary.max_energy_identity_rel <= 1e-10);
  CHECK(summary.max_div_residual_rel <= 1e-9);
  CHECK(summary.max_force_imbalance <= 1e-12);

  REQUIRE(sdgibm_run_marker_count(run) == 16);
  double xy[32];
  REQUIRE(sdgibm_run_markers(run, xy, 32) == SDGIBM_OK);
  CHECK(xy[0] > 0.0);
  CHECK(sdgibm_run_markers(run, xy, 4) == SDGIBM_ERR_INVALID_PARAMETER);

  const fs::path out = fs::temp_directory_path() / "sdgibm_capi_out";
  fs::remove_all(out);
  CHECK(sdgibm_run_write_outputs(run, out.string().c_str()) == SDGIBM_OK);
  CHECK(fs::exists(out / "area_history.csv"));
  CHECK(fs::exists(out / "run.meta"));
  fs::remove_all(out);

  sdgibm_run_destroy(run);
  sdgibm_config_destroy(config);
}

TEST_CASE("bad run configurations surface as status codes") {
  sdgibm_config* config = sdgibm_config_create();
  sdgibm_config_set(config, "N", "4");
  sdgibm_config_set(config, "m", "16");
  sdgibm_config_set(config, "T", "2");
  sdgibm_config_set(config, "K", "100");
  sdgibm_config_set(config, "dt", "0.01");  // 100 * 0.01 != 2
  sdgibm_run* run = nullptr;
  CHECK(sdgibm_run_experiment(config, &run) == SDGIBM_ERR_BAD_CONFIG);
  CHECK(run == nullptr);
  sdgibm_config_destroy(config);
}

TEST_CASE("sweep through the C interface") {
  sdgibm_config* base = sdgibm_config_create();
  sdgibm_config_set(base, "experiment", "ellipse-static");
  sdgibm_config_set(base, "N", "4");
  sdgibm_config_set(base, "T", "0.03");
  sdgibm_config_set(base, "K", "3");

  sdgibm_sweep* sweep = sdgibm_sweep_create(base);
  REQUIRE(sweep != nullptr);
  CHECK(sdgibm_sweep_axis(sweep, "m", "8,16") == SDGIBM_OK);
  CHECK(sdgibm_sweep_axis(sweep, "kappa", "1,2") == SDGIBM_OK);
  CHECK(sdgibm_sweep_axis(sweep, "m", "") == SDGIBM_ERR_BAD_CONFIG);
  CHECK(sdgibm_sweep_axis(sweep, "m", "seven") == SDGIBM_ERR_BAD_CONFIG);
  CHECK(sdgibm_sweep_point_count(sweep) == 4);

  const fs::path out = fs::temp_directory_path() / "sdgibm_capi_sweep";
  fs::remove_all(out);
  CHECK(sdgibm_sweep_execute(sweep, out.string().c_str(), 2) == SDGIBM_OK);
  CHECK(fs::exists(out / "summary.csv"));
  CHECK(fs::exists(out / "run_3" / "area_history.csv"));
  fs::remove_all(out);

  sdgibm_sweep_destroy(sweep);
  sdgibm_config_destroy(base);
}

TEST_CASE("version string") {
  CHECK(std::strlen(sdgibm_version()) > 0);
}
