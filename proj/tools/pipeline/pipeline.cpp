#include "pipeline.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "tragraph/error.hpp"
#include "tragraph/graph.hpp"
#include "tragraph/metrics.hpp"
#include "tragraph/progressive.hpp"
#include "tragraph/raster.hpp"
#include "tragraph/synth.hpp"

namespace tragraph::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "tragraph-workspace-1";

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string full(double v) { return fmt("%.17g", v); }

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_timing(const fs::path& dir, const std::string& stage, double seconds) {
  KeyValueText t;
  t.set("stage", stage);
  t.set("seconds", fmt("%.3f", seconds));
  t.save(dir / "timing.txt");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

KeyValueText load_meta(const fs::path& dir) { return KeyValueText::load(dir / "meta.txt"); }

std::string meta_value(const KeyValueText& meta, const std::string& key) {
  return meta.contains(key) ? meta.get(key) : std::string();
}

void refuse_mix(bool force, const std::string& what) {
  if (!force) throw ArgumentError(what + " (use --force to override)");
}

}  // namespace

Workspace::Workspace(fs::path root) : root_(std::move(root)) {}

fs::path Workspace::region_dir(int region) const { return root_ / "regions" / std::to_string(region); }

bool Workspace::has_manifest() const { return fs::exists(manifest_path()); }

KeyValueText Workspace::manifest() const {
  if (!has_manifest()) throw ArgumentError("no workspace manifest at " + manifest_path().string() + "; run synth first");
  return KeyValueText::load(manifest_path());
}

void Workspace::save_manifest(const KeyValueText& manifest) const { manifest.save(manifest_path()); }

std::string Workspace::manifest_value(const std::string& key) const {
  const KeyValueText m = manifest();
  if (!m.contains(key)) throw ArgumentError("manifest has no '" + key + "' entry");
  return m.get(key);
}

Dataset Workspace::load_dataset() const {
  Dataset data;
  data.model = load_sparse_model(sparse_dir());
  for (const auto& v : data.model.views) data.images.push_back(read_image(images_dir() / v.image_ref));
  return data;
}

RegionPartition Workspace::load_partition() const {
  const fs::path p = partition_dir() / "partition.txt";
  if (!fs::exists(p)) throw ArgumentError("no partition in " + root_.string() + "; run partition first");
  return parse_partition(read_text_file(p));
}

int Workspace::region_count() const { return std::stoi(manifest_value("k")); }

int Workspace::test_every() const { return std::stoi(manifest_value("test_every")); }

// ---------------------------------------------------------------------------

void cmd_synth(const SynthOptions& options, std::ostream& log) {
  const SynthConfig cfg = parse_synth_config(KeyValueText::load(options.config));
  const Workspace ws(options.workspace);
  if (fs::exists(ws.root()) && !fs::is_empty(ws.root())) {
    if (!options.force) throw ArgumentError("workspace " + ws.root().string() + " is not empty (use --force)");
    if (!ws.has_manifest()) throw ArgumentError("refusing to clear " + ws.root().string() + ": not a workspace");
    fs::remove_all(ws.root());
  }
  ensure_dir(ws.root());

  const SyntheticScene scene = generate_synthetic_scene(cfg);
  save_sparse_model(scene.model, ws.sparse_dir());
  ensure_dir(ws.images_dir());
  for (std::size_t i = 0; i < scene.images.size(); ++i)
    write_image(scene.images[i], ws.images_dir() / scene.model.views[i].image_ref);
  ensure_dir(ws.truth_dir());
  save_gaussians(scene.truth, ws.truth_dir() / "gaussians.tggs");

  const KeyValueText canonical = synth_config_to_text(cfg);
  canonical.save(ws.root() / "synth.txt");
  KeyValueText m;
  m.set("format", kFormat);
  m.set("scene_source", "synth");
  m.set("seed", std::to_string(cfg.rng_seed));
  m.set("test_every", std::to_string(cfg.test_every));
  m.set("scene_hash", content_hash(canonical.serialize()));
  ws.save_manifest(m);
  log << "synth: " << scene.model.views.size() << " views, " << scene.model.points.size() << " points, "
      << scene.truth.size() << " Gaussians -> " << ws.root().string() << "\n";
}

// ---------------------------------------------------------------------------

namespace {

Dataset training_split(const Workspace& ws, const Dataset& data) {
  const int every = ws.test_every();
  return every > 0 ? split_dataset(data, every).train : data;
}

constexpr std::array<std::array<unsigned char, 3>, 10> kPalette = {{{31, 119, 180},
                                                                    {255, 127, 14},
                                                                    {44, 160, 44},
                                                                    {214, 39, 40},
                                                                    {148, 103, 189},
                                                                    {140, 86, 75},
                                                                    {227, 119, 194},
                                                                    {127, 127, 127},
                                                                    {188, 189, 34},
                                                                    {23, 190, 207}}};

Eigen::Vector3d palette(int region, double lighten) {
  const auto& c = kPalette[static_cast<std::size_t>(region) % kPalette.size()];
  Eigen::Vector3d v(c[0] / 255.0, c[1] / 255.0, c[2] / 255.0);
  return v + lighten * (Eigen::Vector3d::Ones() - v);
}

}  // namespace

Image region_map(const SparseModel& model, const RegionPartition& partition, int size) {
  std::vector<Eigen::Vector3d> all;
  for (const auto& p : model.points) all.push_back(p.position);
  for (const auto& v : model.views) all.push_back(v.center());
  Image img(size, size, 1.0);
  if (all.empty()) return img;

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : all) mean += p;
  mean /= static_cast<double>(all.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : all) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  // Eigenvalues ascend; the two largest span the top-down view.
  Eigen::Vector3d axes[2] = {eig.eigenvectors().col(2), eig.eigenvectors().col(1)};
  for (auto& a : axes) {
    Eigen::Index i = 0;
    a.cwiseAbs().maxCoeff(&i);
    if (a[i] < 0) a = -a;
  }
  const auto project = [&](const Eigen::Vector3d& p) {
    return Eigen::Vector2d(axes[0].dot(p - mean), axes[1].dot(p - mean));
  };
  double extent = 1e-12;
  for (const auto& p : all) extent = std::max(extent, project(p).cwiseAbs().maxCoeff());
  const double scale = 0.45 * size / extent;
  const auto plot = [&](const Eigen::Vector3d& p, const Eigen::Vector3d& color, int half) {
    const Eigen::Vector2d q = project(p) * scale;
    const int cx = static_cast<int>(std::lround(0.5 * (size - 1) + q.x()));
    const int cy = static_cast<int>(std::lround(0.5 * (size - 1) - q.y()));
    for (int y = cy - half; y <= cy + half; ++y)
      for (int x = cx - half; x <= cx + half; ++x)
        if (x >= 0 && y >= 0 && x < size && y < size) img.set_pixel(x, y, {color[0], color[1], color[2]});
  };
  for (std::size_t i = 0; i < model.points.size(); ++i) {
    const bool assigned = i < partition.point_regions.size() && !partition.point_regions[i].empty();
    plot(model.points[i].position,
         assigned ? palette(partition.point_regions[i].front(), 0.45) : Eigen::Vector3d(0.8, 0.8, 0.8), 0);
  }
  for (const auto& v : model.views) {
    const auto it = partition.camera_regions.find(v.id);
    plot(v.center(), it != partition.camera_regions.end() ? palette(it->second, 0.0) : Eigen::Vector3d::Zero(), 2);
  }
  return img;
}

void cmd_partition(const PartitionOptions& options, std::ostream& log) {
  const Workspace ws(options.workspace);
  KeyValueText m = ws.manifest();
  const Dataset train = training_split(ws, ws.load_dataset());
  const ConnectivityGraph graph = build_graph(train.model);
  const RegionPartition partition = assign_points(bfs_segment(graph, options.k), train.model);

  ensure_dir(ws.graph_dir());
  write_text_file(ws.graph_dir() / "graph.txt", serialize_graph(graph));
  ensure_dir(ws.partition_dir());
  const std::string text = serialize_partition(partition);
  write_text_file(ws.partition_dir() / "partition.txt", text);
  write_image(region_map(train.model, partition), ws.partition_dir() / "region_map.ppm");

  m.set("k", std::to_string(options.k));
  m.set("partition_hash", content_hash(m.get("scene_hash") + "\n" + text));
  ws.save_manifest(m);
  log << "partition: k=" << options.k << ", " << graph.vertices().size() << " cameras, " << graph.edge_count()
      << " edges\n";
  for (int r = 0; r < options.k; ++r)
    log << "  region " << r << ": " << partition.region_cameras(r).size() << " cameras, "
        << partition.region_points(r).size() << " points\n";
}

// ---------------------------------------------------------------------------

namespace {

TrainConfig resolve_train_config(const Workspace& ws, const std::optional<fs::path>& path) {
  TrainConfig cfg;
  bool seeded = false;
  if (path) {
    const KeyValueText text = KeyValueText::load(*path);
    cfg = parse_train_config(text);
    seeded = text.contains("rng_seed");
  }
  if (!seeded) cfg.rng_seed = std::stoull(ws.manifest_value("seed"));
  return cfg;
}

void write_curve(const fs::path& path, const std::vector<LossRecord>& curve) {
  std::ostringstream out;
  out << "iteration,view,total,photometric,multiview,gaussians\n";
  for (const auto& r : curve)
    out << r.iteration << ',' << r.view_id << ',' << full(r.total) << ',' << full(r.photometric) << ','
        << full(r.multiview) << ',' << r.gaussian_count << '\n';
  write_text_file(path, out.str());
}

// Existing trained artifacts must come from the same partition and config.
void check_trained_mix(const Workspace& ws, const std::string& train_hash, bool force) {
  std::vector<fs::path> dirs;
  if (fs::exists(ws.root() / "regions"))
    for (const auto& e : fs::directory_iterator(ws.root() / "regions")) dirs.push_back(e.path());
  dirs.push_back(ws.global_dir());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    if (!fs::exists(d / "meta.txt")) continue;
    const std::string other = meta_value(load_meta(d), "train_hash");
    if (other != train_hash)
      refuse_mix(force, d.string() + " was trained with config hash " + other + ", current is " + train_hash);
  }
}

}  // namespace

void cmd_train(const TrainOptions& options, std::ostream& log) {
  const Workspace ws(options.workspace);
  const KeyValueText manifest = ws.manifest();
  const int chosen = (options.region ? 1 : 0) + (options.global ? 1 : 0) + (options.all ? 1 : 0);
  if (chosen != 1) throw ArgumentError("train needs exactly one of --region, --global or --all");
  const TrainConfig cfg = resolve_train_config(ws, options.config);
  const std::string train_hash = content_hash(train_config_to_text(cfg).serialize());
  check_trained_mix(ws, train_hash, options.force);

  const Dataset train = training_split(ws, ws.load_dataset());
  std::vector<int> regions;
  std::optional<RegionPartition> partition;
  if (options.region || options.all) {
    partition = ws.load_partition();
    if (!manifest.contains("partition_hash")) throw ArgumentError("manifest has no partition; run partition first");
    if (options.all) {
      for (int r = 0; r < partition->k; ++r) regions.push_back(r);
    } else {
      if (*options.region < 0 || *options.region >= partition->k)
        throw ArgumentError("region " + std::to_string(*options.region) + " out of range [0, " +
                            std::to_string(partition->k) + ")");
      regions.push_back(*options.region);
    }
  }

  for (int r : regions) {
    const Stopwatch clock;
    const TrainResult result = train_region(train, *partition, r, cfg);
    const fs::path dir = ws.region_dir(r);
    ensure_dir(dir);
    save_gaussians(result.set, dir / "gaussians.tggs");
    write_curve(dir / "loss.csv", result.curve);
    KeyValueText meta;
    meta.set("region", std::to_string(r));
    meta.set("partition_hash", manifest.get("partition_hash"));
    meta.set("train_hash", train_hash);
    meta.set("gaussians", std::to_string(result.set.size()));
    meta.save(dir / "meta.txt");
    train_config_to_text(cfg).save(dir / "train_config.txt");
    write_timing(dir, "train region " + std::to_string(r), clock.seconds());
    log << "train: region " << r << " -> " << result.set.size() << " Gaussians, loss "
        << fmt("%.4f", result.curve.front().total) << " -> " << fmt("%.4f", result.curve.back().total) << " ("
        << fmt("%.1f", clock.seconds()) << " s)\n";
  }

  if (options.global || options.all) {
    const Stopwatch clock;
    const TrainResult result = train_global_coarse(train, cfg);
    ensure_dir(ws.global_dir());
    save_gaussians(result.set, ws.global_dir() / "gaussians.tggs");
    write_curve(ws.global_dir() / "loss.csv", result.curve);
    KeyValueText meta;
    meta.set("scene_hash", manifest.get("scene_hash"));
    meta.set("train_hash", train_hash);
    meta.set("gaussians", std::to_string(result.set.size()));
    meta.save(ws.global_dir() / "meta.txt");
    write_timing(ws.global_dir(), "train global", clock.seconds());
    log << "train: global -> " << result.set.size() << " Gaussians (" << fmt("%.1f", clock.seconds()) << " s)\n";
  }
}

// ---------------------------------------------------------------------------

std::vector<int> select_views(const Workspace& ws, const SparseModel& model, const std::string& selector) {
  std::vector<int> ids;
  if (selector == "all" || selector == "test" || selector == "train") {
    const int every = ws.test_every();
    for (std::size_t i = 0; i < model.views.size(); ++i) {
      const bool test = every > 0 && i % static_cast<std::size_t>(every) == 0;
      if (selector == "all" || (selector == "test") == test) ids.push_back(model.views[i].id);
    }
    return ids;
  }
  std::stringstream in(selector);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    int id = 0;
    try {
      id = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ArgumentError("bad view selector '" + selector + "'");
    if (!model.has_view(id)) throw ArgumentError("unknown view id " + std::to_string(id));
    ids.push_back(id);
  }
  if (ids.empty()) throw ArgumentError("empty view selector");
  return ids;
}

namespace {

struct RenderSources {
  std::vector<GaussianSet> locals;
  std::optional<GaussianSet> global;
  std::string regions_hash;  // partition and region configs
  std::string source_hash;   // also mode and global set
};

RenderSources load_sources(const Workspace& ws, const std::string& mode, std::optional<int> region, bool force) {
  const KeyValueText manifest = ws.manifest();
  if (!manifest.contains("partition_hash")) throw ArgumentError("manifest has no partition; run partition first");
  const std::string partition_hash = manifest.get("partition_hash");
  RenderSources out;
  std::vector<int> regions;
  if (region) {
    regions.push_back(*region);
  } else {
    for (int r = 0; r < ws.region_count(); ++r) regions.push_back(r);
  }
  std::set<std::string> train_hashes;
  std::string joined = partition_hash;
  for (int r : regions) {
    const fs::path dir = ws.region_dir(r);
    if (!fs::exists(dir / "gaussians.tggs"))
      throw ArgumentError("region " + std::to_string(r) + " is not trained; run train --region " + std::to_string(r));
    const KeyValueText meta = load_meta(dir);
    if (meta_value(meta, "partition_hash") != partition_hash)
      refuse_mix(force, "region " + std::to_string(r) + " was trained on a different partition");
    train_hashes.insert(meta_value(meta, "train_hash"));
    joined += "\n" + meta_value(meta, "train_hash");
    out.locals.push_back(load_gaussians(dir / "gaussians.tggs"));
  }
  if (mode == "progressive" && !fs::exists(ws.global_dir() / "gaussians.tggs"))
    throw ArgumentError("progressive mode needs the global set; run train --global");
  out.regions_hash = content_hash(joined);
  if (mode == "progressive") {
    const KeyValueText meta = load_meta(ws.global_dir());
    if (meta_value(meta, "scene_hash") != manifest.get("scene_hash"))
      refuse_mix(force, "the global set was trained on a different scene");
    train_hashes.insert(meta_value(meta, "train_hash"));
    joined += "\n" + meta_value(meta, "train_hash");
    out.global = load_gaussians(ws.global_dir() / "gaussians.tggs");
  }
  if (train_hashes.size() > 1) refuse_mix(force, "trained sets come from different train configs");
  out.source_hash = content_hash(mode + "\n" + joined);
  return out;
}

void write_buffers(const FrameBuffers& fb, const fs::path& stem) {
  const int w = fb.width(), h = fb.height();
  std::vector<double> normals;
  normals.reserve(fb.normal.size() * 3);
  for (const auto& n : fb.normal) normals.insert(normals.end(), {n.x(), n.y(), n.z()});
  write_float_raster(stem.string() + ".depth.f32", w, h, 1, fb.depth);
  write_float_raster(stem.string() + ".normal.f32", w, h, 3, normals);
  write_float_raster(stem.string() + ".opacity.f32", w, h, 1, fb.accum_opacity);
}

}  // namespace

void cmd_render(const RenderOptions& options, std::ostream& log) {
  const Workspace ws(options.workspace);
  std::optional<int> region;
  std::string dir_name = options.mode;
  if (options.mode.rfind("region=", 0) == 0) {
    try {
      region = std::stoi(options.mode.substr(7));
    } catch (const std::exception&) {
      throw ArgumentError("bad mode '" + options.mode + "'");
    }
    if (*region < 0 || *region >= ws.region_count()) throw ArgumentError("region out of range in '" + options.mode + "'");
    dir_name = "region_" + std::to_string(*region);
  } else if (options.mode != "progressive" && options.mode != "naive") {
    throw ArgumentError("unknown render mode '" + options.mode + "' (progressive, naive or region=<i>)");
  }
  const Stopwatch clock;
  const RenderSources sources = load_sources(ws, options.mode, region, options.force);
  const SparseModel model = load_sparse_model(ws.sparse_dir());
  const std::vector<int> ids = select_views(ws, model, options.views);
  const fs::path out = ws.render_dir(dir_name);
  ensure_dir(out);

  const ProgressiveConfig pc;
  std::ostringstream ranks;
  for (int id : ids) {
    const CameraView& view = model.view(id);
    const fs::path stem = out / fs::path(view.image_ref).stem();
    Image color;
    if (region || options.mode == "naive") {
      const FrameBuffers fb =
          region ? rasterize(sources.locals.front(), view) : rasterize(merge_sets(sources.locals), view);
      color = fb.color;
      if (options.buffers) write_buffers(fb, stem);
    } else {
      const RegionRank rank = rank_regions(sources.locals, *sources.global, view, pc);
      color = progressive_render(sources.locals, rank, view, pc);
      ranks << id;
      for (std::size_t i = 0; i < rank.ordering.size(); ++i)
        ranks << ' ' << rank.ordering[i] << ':' << fmt("%.6f", rank.scores[rank.ordering[i]]);
      ranks << '\n';
      // The top-ranked region's buffers stand in for the composite.
      if (options.buffers) write_buffers(rasterize(sources.locals[rank.ordering.front()], view), stem);
    }
    write_image(color, out / view.image_ref);
  }
  if (options.mode == "progressive") write_text_file(out / "ranks.txt", ranks.str());
  KeyValueText meta;
  meta.set("mode", options.mode);
  meta.set("regions_hash", sources.regions_hash);
  meta.set("source_hash", sources.source_hash);
  meta.set("views", std::to_string(ids.size()));
  meta.save(out / "meta.txt");
  write_timing(out, "render " + options.mode, clock.seconds());
  log << "render: " << ids.size() << " views in mode " << options.mode << " -> " << out.string() << "\n";
}

// ---------------------------------------------------------------------------

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "tragraph evaluation report\n";
  out << "test split: every " << every << "th view, " << rows.size() / std::max<std::size_t>(1, means.size())
      << " views\n\n";
  out << "view  mode          PSNR      SSIM\n";
  char line[128];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-5d %-12s %8.4f  %8.6f\n", r.view_id, r.mode.c_str(), r.psnr, r.ssim);
    out << line;
  }
  out << "\n";
  for (const auto& r : means) {
    std::snprintf(line, sizeof(line), "mean  %-12s %8.4f  %8.6f\n", r.mode.c_str(), r.psnr, r.ssim);
    out << line;
  }
  if (has_delta) {
    std::snprintf(line, sizeof(line), "delta progressive-naive PSNR %+.4f dB, SSIM %+.6f\n", delta_psnr, delta_ssim);
    out << line;
  }
  return out.str();
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "kind,view,mode,psnr,ssim\n";
  for (const auto& r : rows) out << "view," << r.view_id << ',' << r.mode << ',' << full(r.psnr) << ',' << full(r.ssim) << '\n';
  for (const auto& r : means) out << "mean,," << r.mode << ',' << full(r.psnr) << ',' << full(r.ssim) << '\n';
  if (has_delta) out << "delta,,progressive-naive," << full(delta_psnr) << ',' << full(delta_ssim) << '\n';
  return out.str();
}

EvalReport cmd_eval(const EvalOptions& options, std::ostream& log) {
  const Workspace ws(options.workspace);
  EvalReport report;
  report.every = options.every > 0 ? options.every : ws.test_every();
  if (report.every <= 0) throw ArgumentError("empty test split: the workspace holds no test views");
  const Dataset data = ws.load_dataset();
  std::vector<std::size_t> test;
  for (std::size_t i = 0; i < data.model.views.size(); i += static_cast<std::size_t>(report.every)) test.push_back(i);
  if (test.empty()) throw ArgumentError("empty test split");

  std::vector<std::string> modes;
  std::set<std::string> hashes;
  for (const char* mode : {"progressive", "naive"}) {
    if (!fs::exists(ws.render_dir(mode) / "meta.txt")) continue;
    modes.emplace_back(mode);
    hashes.insert(meta_value(load_meta(ws.render_dir(mode)), "regions_hash"));
  }
  if (modes.empty()) throw ArgumentError("no progressive or naive renders; run render first");
  if (hashes.size() > 1) refuse_mix(options.force, "progressive and naive renders come from different trained regions");

  for (const auto& mode : modes) {
    EvalRow mean{0, mode, 0.0, 0.0};
    for (std::size_t i : test) {
      const CameraView& v = data.model.views[i];
      const fs::path p = ws.render_dir(mode) / v.image_ref;
      if (!fs::exists(p)) throw ArgumentError("view " + std::to_string(v.id) + " has no " + mode + " render");
      const Image rendered = read_image(p);
      EvalRow row{v.id, mode, psnr(rendered, data.images[i]), ssim(rendered, data.images[i])};
      mean.psnr += row.psnr;
      mean.ssim += row.ssim;
      report.rows.push_back(row);
    }
    mean.psnr /= static_cast<double>(test.size());
    mean.ssim /= static_cast<double>(test.size());
    report.means.push_back(mean);
  }
  if (modes.size() == 2) {
    report.has_delta = true;
    report.delta_psnr = report.means[0].psnr - report.means[1].psnr;
    report.delta_ssim = report.means[0].ssim - report.means[1].ssim;
  }

  ensure_dir(ws.reports_dir());
  write_text_file(ws.reports_dir() / "eval.txt", report.to_text());
  write_text_file(ws.reports_dir() / "eval.csv", report.to_csv());

  // Runtime statistics live apart from the deterministic report.
  std::ostringstream timing;
  std::vector<fs::path> dirs;
  if (fs::exists(ws.root() / "regions"))
    for (const auto& e : fs::directory_iterator(ws.root() / "regions")) dirs.push_back(e.path());
  dirs.push_back(ws.global_dir());
  if (fs::exists(ws.root() / "renders"))
    for (const auto& e : fs::directory_iterator(ws.root() / "renders")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  double total = 0.0;
  for (const auto& d : dirs) {
    if (!fs::exists(d / "timing.txt")) continue;
    const KeyValueText t = KeyValueText::load(d / "timing.txt");
    timing << t.get("stage") << ": " << t.get("seconds") << " s\n";
    total += std::stod(t.get("seconds"));
  }
  timing << "total: " << fmt("%.3f", total) << " s\n";
  write_text_file(ws.reports_dir() / "timing.txt", timing.str());
  log << report.to_text();
  return report;
}

}  // namespace tragraph::pipeline
