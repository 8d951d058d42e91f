// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "bmdx/cli.hpp"
#include "bmdx/projection.hpp"
#include "support.hpp"

using namespace bmdx;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run bmdx_run(std::vector<std::string> args) {
  args.insert(args.begin(), "bmdx");
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string small_geometry() {
  ProjectionGeometry g;
  g.mode = ProjectionMode::kPinhole;
  g.detector_dims = {48, 48};
  g.detector_spacing = Vec2(4.0, 4.0);
  g.detector_center = Vec3(0, 300, 0);
  g.source = Vec3(0, -700, 0);
  g.step_mm = 2.0;
  return geometry_to_text(g);
}

// A four-case fixture cohort and its run directory.
fs::path write_fixture(const std::string& name, const std::string& extra) {
  const auto dir = test::scratch_dir(name);
  write_text(dir / "geometry.txt", small_geometry());
  write_text(dir / "run.cfg", "seed = 11\ncohort_dir = cohort\noutput_dir = out\ngeometry_file = geometry.txt\n"
                              "n_cases = 4\nnoise_sigma_hu = 5\ncma_max_evaluations = 30\n" + extra);
  return dir;
}

int stage(const fs::path& dir, const std::string& sub) {
  const auto r = bmdx_run({sub, "--config", (dir / "run.cfg").string()});
  if (r.code != 0) MESSAGE(sub << ": " << r.err);
  return r.code;
}

const char* kPipeline[] = {"synth", "calibrate", "register", "project", "tune-threshold",
                           "fit-bmd", "predict", "evaluate", "losses-check"};

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() != "run.cfg") {
      files[fs::relative(e.path(), root).string()] = test::slurp(e.path());
    }
  }
  return files;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1") {
    auto r = bmdx_run({"frobnicate"});
    CHECK(r.code == 1);
    CHECK(r.err.find("synth") != std::string::npos);
    CHECK(bmdx_run({}).code == 1);
    CHECK(bmdx_run({"evaluate"}).code == 1);
    CHECK(bmdx_run({"evaluate", "--bogus", "x"}).code == 1);
    r = bmdx_run({"--help"});
    CHECK(r.code == 0);
    for (const char* sub : kPipeline) CHECK(r.out.find(sub) != std::string::npos);
    r = bmdx_run({"register", "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("cma_max_evaluations") != std::string::npos);
  }

  TEST_CASE("config and data errors exit 2") {
    const auto dir = test::scratch_dir("cli_errors");
    write_text(dir / "run.cfg", "seed = 1\noutput_dir = out\ncohort_dir = .\n");
    fs::create_directories(dir / "out");
    auto r = bmdx_run({"predict", "-c", (dir / "run.cfg").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("bmd_calibration.txt") != std::string::npos);

    write_text(dir / "bad.cfg", "seed = 1\ncolour = blue\n");
    r = bmdx_run({"evaluate", "-c", (dir / "bad.cfg").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("'colour'") != std::string::npos);
    write_text(dir / "noseed.cfg", "output_dir = out\n");
    CHECK(bmdx_run({"evaluate", "-c", (dir / "noseed.cfg").string()}).code == 2);
    write_text(dir / "neg.cfg", "seed = -4\n");
    CHECK(bmdx_run({"evaluate", "-c", (dir / "neg.cfg").string()}).code == 2);
    CHECK(bmdx_run({"evaluate", "-c", (dir / "missing.cfg").string()}).code == 2);
    write_text(dir / "geo.cfg", "seed = 1\ncohort_dir = c\ngeometry_file = nope.txt\n");
    CHECK(bmdx_run({"synth", "-c", (dir / "geo.cfg").string()}).code == 2);
    CHECK_FALSE(fs::exists(dir / "c"));
  }

  TEST_CASE("failing gradient check exits 3") {
    const auto dir = test::scratch_dir("cli_numerical");
    write_text(dir / "run.cfg", "seed = 1\noutput_dir = out\nlosses_trials = 3\nlosses_tolerance = 1e-300\n");
    const auto r = bmdx_run({"losses-check", "-c", (dir / "run.cfg").string()});
    CHECK(r.code == 3);
    CHECK(test::slurp(dir / "out" / "losses_check.csv").find("fail") != std::string::npos);
  }

  TEST_CASE("fixture pipeline runs end to end") {
    const auto dir = write_fixture("cli_pipeline", "threads = 1\n");
    for (const char* sub : kPipeline) CHECK(stage(dir, sub) == 0);
    const auto metrics = test::slurp(dir / "out" / "metrics.csv");
    CHECK(metrics.rfind("metric,value\n", 0) == 0);
    for (const char* key : {"pcc", "mae", "see", "icc", "rms_cv_percent", "ba_upper", "decomposition_psnr"}) {
      CHECK(metrics.find(std::string("\n") + key + ",") != std::string::npos);
    }
    CHECK(fs::exists(dir / "out" / "bland_altman.csv"));
    CHECK(fs::exists(dir / "out" / "case_0003" / "registered_poses.csv"));
    CHECK(fs::exists(dir / "cohort" / "case_0000" / "truth.csv"));
    CHECK(test::slurp(dir / "out" / "bmd_table.csv").rfind("case_id,pose,mean_intensity,pred_bmd,gt_bmd\n", 0) == 0);

    // Validation precedes output: a broken case stops calibrate before anything is written.
    fs::remove_all(dir / "out");
    fs::remove(dir / "cohort" / "case_0002" / "rods.csv");
    CHECK(stage(dir, "calibrate") == 2);
    CHECK_FALSE(fs::exists(dir / "out"));
  }

  TEST_CASE("outputs are byte-identical across reruns and thread counts") {
    const auto a = write_fixture("cli_det_a", "threads = 1\n");
    const auto b = write_fixture("cli_det_b", "threads = 4\ncma_parallel = true\n");
    const auto c = write_fixture("cli_det_c", "threads = 1\n");
    for (const auto& dir : {a, b, c}) {
      for (const char* sub : kPipeline) REQUIRE(stage(dir, sub) == 0);
    }
    const auto sa = snapshot(a);
    CHECK(sa.size() > 80);
    CHECK(sa == snapshot(b));
    CHECK(sa == snapshot(c));
  }

  TEST_CASE("installed binary reports exit codes") {
    CHECK(WEXITSTATUS(std::system((std::string(BMDX_TOOL_PATH) + " nothing >/dev/null 2>&1").c_str())) == 1);
    CHECK(WEXITSTATUS(std::system((std::string(BMDX_TOOL_PATH) + " --help >/dev/null 2>&1").c_str())) == 0);
  }
}
