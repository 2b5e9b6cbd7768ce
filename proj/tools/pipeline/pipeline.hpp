#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tragraph/keyvalue.hpp"
#include "tragraph/trainer.hpp"

namespace tragraph::pipeline {

// On-disk layout of one pipeline run.
//
//   manifest.txt          scene source, seed, split, k and config hashes
//   sparse/               cameras.txt, images.txt, points3D.txt
//   images/               ground-truth PPM images
//   truth/                generator Gaussians (synthetic scenes only)
//   graph/ partition/     connectivity graph, region assignment, region map
//   regions/<i>/ global/  trained sets, loss curves, meta.txt, timing.txt
//   renders/<mode>/       rendered views
//   reports/              eval.txt, eval.csv, timing.txt
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path manifest_path() const { return root_ / "manifest.txt"; }
  std::filesystem::path sparse_dir() const { return root_ / "sparse"; }
  std::filesystem::path images_dir() const { return root_ / "images"; }
  std::filesystem::path truth_dir() const { return root_ / "truth"; }
  std::filesystem::path graph_dir() const { return root_ / "graph"; }
  std::filesystem::path partition_dir() const { return root_ / "partition"; }
  std::filesystem::path region_dir(int region) const;
  std::filesystem::path global_dir() const { return root_ / "global"; }
  std::filesystem::path render_dir(const std::string& mode) const { return root_ / "renders" / mode; }
  std::filesystem::path reports_dir() const { return root_ / "reports"; }

  bool has_manifest() const;
  KeyValueText manifest() const;
  void save_manifest(const KeyValueText& manifest) const;
  // Manifest value or IoError/ArgumentError when the key is missing.
  std::string manifest_value(const std::string& key) const;

  Dataset load_dataset() const;
  RegionPartition load_partition() const;
  int region_count() const;
  int test_every() const;

 private:
  std::filesystem::path root_;
};

struct SynthOptions {
  std::filesystem::path config;
  std::filesystem::path workspace;
  bool force = false;
};

struct PartitionOptions {
  std::filesystem::path workspace;
  int k = 3;
  bool force = false;
};

struct TrainOptions {
  std::filesystem::path workspace;
  std::optional<std::filesystem::path> config;
  std::optional<int> region;
  bool global = false;
  bool all = false;  // every region, then the global set
  bool force = false;
};

struct RenderOptions {
  std::filesystem::path workspace;
  std::string views = "test";  // test | train | all | comma-separated view ids
  std::string mode = "progressive";  // progressive | naive | region=<i>
  bool buffers = false;
  bool force = false;
};

struct EvalOptions {
  std::filesystem::path workspace;
  int every = 0;  // 0: the split recorded in the manifest
  bool force = false;
};

struct EvalRow {
  int view_id = 0;
  std::string mode;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  int every = 0;
  std::vector<EvalRow> rows;
  std::vector<EvalRow> means;  // view_id 0, one per mode
  bool has_delta = false;
  double delta_psnr = 0.0;  // progressive minus naive
  double delta_ssim = 0.0;

  std::string to_text() const;
  std::string to_csv() const;
};

void cmd_synth(const SynthOptions& options, std::ostream& log);
void cmd_partition(const PartitionOptions& options, std::ostream& log);
void cmd_train(const TrainOptions& options, std::ostream& log);
void cmd_render(const RenderOptions& options, std::ostream& log);
EvalReport cmd_eval(const EvalOptions& options, std::ostream& log);

// Top-down scatter of camera centres and points, colored by region with a
// fixed palette.
Image region_map(const SparseModel& model, const RegionPartition& partition, int size = 256);

// Resolves a view selector against the manifest split.
std::vector<int> select_views(const Workspace& workspace, const SparseModel& model, const std::string& selector);

}  // namespace tragraph::pipeline
