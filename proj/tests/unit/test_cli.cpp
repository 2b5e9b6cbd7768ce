#include <doctest.h>

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "tragraph/gaussian.hpp"
#include "tragraph/image.hpp"
#include "tragraph/keyvalue.hpp"
#include "tragraph/raster.hpp"
#include "tragraph/sparse_model.hpp"

namespace fs = std::filesystem;
using namespace tragraph;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "tragraph_cli_test";

struct Run {
  int code = 0;
  std::string err;
};

Run run(const std::string& args) {
  const fs::path err = kRoot / "stderr.txt";
  const std::string cmd = std::string(TRAGRAPH_CLI_PATH) + " " + args + " > " + (kRoot / "stdout.txt").string() +
                          " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_text_file(err);
  return r;
}

std::string ws(const std::string& name) { return (kRoot / name).string(); }

void write(const fs::path& p, const std::string& text) { write_text_file(p, text); }

struct Fixture {
  Fixture() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    write(kRoot / "scene.txt",
          "num_gaussians = 40\nnum_views = 9\nimage_size = 24\nrng_seed = 5\ntrajectory_kind = street\n");
    write(kRoot / "train.txt", "iterations = 40\ndensify = false\nmultiview = false\n");
    write(kRoot / "train_b.txt", "iterations = 30\ndensify = false\nmultiview = false\n");
  }
};

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text_file(p));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE_FIXTURE(Fixture, "synth writes a workspace and is reproducible") {
  const std::string scene = (kRoot / "scene.txt").string();
  REQUIRE(run("synth " + scene + " " + ws("a")).code == 0);
  std::size_t images = 0;
  for (const auto& e : fs::directory_iterator(kRoot / "a" / "images")) images += e.path().extension() == ".ppm";
  CHECK(images == 9);
  CHECK(fs::exists(kRoot / "a" / "truth" / "gaussians.tggs"));
  CHECK(fs::exists(kRoot / "a" / "sparse" / "points3D.txt"));
  const std::string first = read_text_file(kRoot / "a" / "manifest.txt");

  CHECK(run("synth " + scene + " " + ws("a")).code == 1);
  REQUIRE(run("synth " + scene + " " + ws("a") + " --force").code == 0);
  CHECK(read_text_file(kRoot / "a" / "manifest.txt") == first);

  REQUIRE(run("synth " + scene + " " + ws("b")).code == 0);
  CHECK(read_text_file(kRoot / "b" / "manifest.txt") == first);

  write(kRoot / "bad.txt", "num_views = 9\nnum_gausians = 40\n");
  const Run bad = run("synth " + (kRoot / "bad.txt").string() + " " + ws("c"));
  CHECK(bad.code == 1);
  CHECK(bad.err.find("num_gausians") != std::string::npos);
  CHECK(bad.err.find("line 2") != std::string::npos);

  CHECK(run("synth " + (kRoot / "missing.txt").string() + " " + ws("d")).code == 2);
  CHECK(run("frobnicate").code == 1);
}

TEST_CASE_FIXTURE(Fixture, "partition, train, render and eval") {
  REQUIRE(run("synth " + (kRoot / "scene.txt").string() + " " + ws("w")).code == 0);
  const std::string w = ws("w");
  const std::string cfg = " --config " + (kRoot / "train.txt").string();

  SUBCASE("training needs a partition") { CHECK(run("train " + w + " --region 0" + cfg).code == 1); }

  SUBCASE("k out of range") { CHECK(run("partition " + w + " --k 50").code == 1); }

  SUBCASE("single region pipeline") {
    REQUIRE(run("partition " + w + " --k 1").code == 0);
    const Image map = read_image(kRoot / "w" / "partition" / "region_map.ppm");
    std::set<std::array<int, 3>> camera_colors;
    for (int y = 0; y < map.height(); ++y)
      for (int x = 0; x < map.width(); ++x) {
        const auto p = map.pixel(x, y);
        camera_colors.insert({int(quantize(p[0])), int(quantize(p[1])), int(quantize(p[2]))});
      }
    CHECK(camera_colors.count({31, 119, 180}) == 1);
    CHECK(camera_colors.count({255, 127, 14}) == 0);

    CHECK(run("render " + w + " --mode progressive").code == 1);
    REQUIRE(run("train " + w + " --region 0" + cfg).code == 0);
    const auto curve = read_csv(kRoot / "w" / "regions" / "0" / "loss.csv");
    REQUIRE(curve.size() == 40);
    double first = 0, last = 0;
    for (int i = 0; i < 5; ++i) {
      first += std::stod(curve[i][3]);
      last += std::stod(curve[curve.size() - 1 - i][3]);
    }
    CHECK(last < first);

    CHECK(run("render " + w + " --mode progressive").code == 1);
    REQUIRE(run("train " + w + " --global" + cfg).code == 0);
    const auto global_curve = read_csv(kRoot / "w" / "global" / "loss.csv");
    REQUIRE(!global_curve.empty());
    for (const auto& row : global_curve) CHECK(row[5] == global_curve.front()[5]);

    REQUIRE(run("render " + w + " --mode region=0 --views all --buffers").code == 0);
    REQUIRE(run("render " + w + " --mode progressive --views all").code == 0);
    REQUIRE(run("render " + w + " --mode naive").code == 0);
    CHECK(run("render " + w + " --mode region=3").code == 1);
    CHECK(run("render " + w + " --mode sideways").code == 1);

    const GaussianSet set = load_gaussians(kRoot / "w" / "regions" / "0" / "gaussians.tggs");
    const SparseModel model = load_sparse_model(kRoot / "w" / "sparse");
    for (const auto& v : model.views) {
      const Image region = read_image(kRoot / "w" / "renders" / "region_0" / v.image_ref);
      const Image progressive = read_image(kRoot / "w" / "renders" / "progressive" / v.image_ref);
      CHECK(region == progressive);
      const Image direct = rasterize(set, v).color;
      for (std::size_t i = 0; i < direct.data().size(); ++i)
        CHECK(quantize(direct.data()[i]) == quantize(region.data()[i]));
    }
    const FloatRaster opacity = read_float_raster(kRoot / "w" / "renders" / "region_0" / "view_001.opacity.f32");
    CHECK(opacity.channels == 1);
    CHECK(opacity.width == 24);

    REQUIRE(run("eval " + w).code == 0);
    const auto rows = read_csv(kRoot / "w" / "reports" / "eval.csv");
    std::map<std::string, std::pair<double, int>> sums;
    std::map<std::string, double> means;
    bool delta = false;
    for (const auto& r : rows) {
      if (r[0] == "view") {
        sums[r[2]].first += std::stod(r[3]);
        sums[r[2]].second += 1;
      } else if (r[0] == "mean") {
        means[r[2]] = std::stod(r[3]);
      } else if (r[0] == "delta") {
        delta = true;
      }
    }
    CHECK(delta);
    REQUIRE(sums.size() == 2);
    for (const auto& [mode, s] : sums) {
      CHECK(s.second == 2);
      CHECK(std::abs(s.first / s.second - means[mode]) < 1e-9);
    }
    CHECK(fs::exists(kRoot / "w" / "reports" / "timing.txt"));
    const std::string report = read_text_file(kRoot / "w" / "reports" / "eval.txt");
    CHECK(report.find("seconds") == std::string::npos);

    SUBCASE("identical render and ground truth score 100 dB") {
      for (const auto& v : model.views)
        fs::copy_file(kRoot / "w" / "images" / v.image_ref, kRoot / "w" / "renders" / "naive" / v.image_ref,
                      fs::copy_options::overwrite_existing);
      REQUIRE(run("eval " + w).code == 0);
      for (const auto& r : read_csv(kRoot / "w" / "reports" / "eval.csv"))
        if (r[2] == "naive") CHECK(std::stod(r[3]) == 100.0);
    }

    SUBCASE("mixing train configs is refused unless forced") {
      const std::string other = " --config " + (kRoot / "train_b.txt").string();
      CHECK(run("train " + w + " --region 0" + other).code == 1);
      CHECK(run("train " + w + " --region 0" + other + " --force").code == 0);
      CHECK(run("render " + w + " --mode progressive").code == 1);
      CHECK(run("render " + w + " --mode progressive --force").code == 0);
    }

    SUBCASE("repartitioning invalidates trained regions") {
      REQUIRE(run("partition " + w + " --k 2").code == 0);
      CHECK(run("render " + w + " --mode naive").code == 1);
    }
  }

  SUBCASE("eval needs renders") {
    REQUIRE(run("partition " + w + " --k 2").code == 0);
    CHECK(run("eval " + w).code == 1);
    CHECK(run("train " + w + " --region 2" + cfg).code == 1);
    CHECK(run("train " + w + cfg).code == 1);
  }
}

TEST_CASE_FIXTURE(Fixture, "workspace without test views cannot be evaluated") {
  write(kRoot / "notest.txt", "num_gaussians = 30\nnum_views = 6\nimage_size = 24\ntest_every = 0\n");
  REQUIRE(run("synth " + (kRoot / "notest.txt").string() + " " + ws("n")).code == 0);
  const Run r = run("eval " + ws("n"));
  CHECK(r.code == 1);
  CHECK(r.err.find("empty test split") != std::string::npos);
}
