#include "tragraph/sparse_model.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tragraph/error.hpp"
#include "tragraph/image.hpp"
#include "tragraph/keyvalue.hpp"

namespace tragraph {

namespace {

struct NumberedLine {
  std::size_t number = 0;
  std::string text;
};

// Non-comment lines, keeping blank lines (an empty POINTS2D record is blank).
std::vector<NumberedLine> content_lines(const std::string& text) {
  std::vector<NumberedLine> lines;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') continue;
    lines.push_back({number, line});
  }
  return lines;
}

bool is_blank(const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; }

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> tokens;
  std::istringstream in(s);
  std::string t;
  while (in >> t) tokens.push_back(t);
  return tokens;
}

double parse_real(const std::string& token, std::size_t line, const char* field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used == token.size() && std::isfinite(v)) return v;
  } catch (const std::logic_error&) {
  }
  throw ParseError(std::string("invalid ") + field + " '" + token + "'", line);
}

long long parse_integer(const std::string& token, std::size_t line, const char* field) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(token, &used);
    if (used == token.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ParseError(std::string("invalid ") + field + " '" + token + "'", line);
}

struct CameraRecord {
  int width = 0;
  int height = 0;
  double fx = 0, fy = 0, cx = 0, cy = 0;
};

std::map<long long, CameraRecord> parse_cameras(const std::string& text) {
  std::map<long long, CameraRecord> cameras;
  for (const auto& line : content_lines(text)) {
    if (is_blank(line.text)) continue;
    const auto tok = split_ws(line.text);
    if (tok.size() < 4) throw ParseError("camera record needs at least 4 fields", line.number);
    const long long id = parse_integer(tok[0], line.number, "camera id");
    CameraRecord rec;
    rec.width = static_cast<int>(parse_integer(tok[2], line.number, "width"));
    rec.height = static_cast<int>(parse_integer(tok[3], line.number, "height"));
    const std::string& model = tok[1];
    if (model == "PINHOLE") {
      if (tok.size() != 8) throw ParseError("PINHOLE camera expects 4 parameters", line.number);
      rec.fx = parse_real(tok[4], line.number, "fx");
      rec.fy = parse_real(tok[5], line.number, "fy");
      rec.cx = parse_real(tok[6], line.number, "cx");
      rec.cy = parse_real(tok[7], line.number, "cy");
    } else if (model == "SIMPLE_PINHOLE") {
      if (tok.size() != 7) throw ParseError("SIMPLE_PINHOLE camera expects 3 parameters", line.number);
      rec.fx = rec.fy = parse_real(tok[4], line.number, "f");
      rec.cx = parse_real(tok[5], line.number, "cx");
      rec.cy = parse_real(tok[6], line.number, "cy");
    } else {
      throw ParseError("unsupported camera model '" + model + "'", line.number);
    }
    if (!cameras.emplace(id, rec).second) throw ParseError("duplicate camera id", line.number);
  }
  return cameras;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const CameraView& SparseModel::view(int id) const {
  for (const auto& v : views)
    if (v.id == id) return v;
  throw ArgumentError("unknown view id " + std::to_string(id));
}

bool SparseModel::has_view(int id) const {
  return std::any_of(views.begin(), views.end(), [id](const CameraView& v) { return v.id == id; });
}

Eigen::Matrix3d quaternion_to_rotation(double qw, double qx, double qy, double qz) {
  const Eigen::Quaterniond q(qw, qx, qy, qz);
  if (q.norm() < 1e-12) throw ArgumentError("zero quaternion");
  return q.normalized().toRotationMatrix();
}

Eigen::Vector4d rotation_to_quaternion(const Eigen::Matrix3d& rotation) {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
}

SparseModel parse_sparse_model(const std::string& cameras_text, const std::string& images_text,
                               const std::string& points_text) {
  const auto cameras = parse_cameras(cameras_text);
  SparseModel model;
  // point3D id -> view ids referencing it from image records
  std::map<long long, std::set<int>> image_refs;
  std::vector<std::pair<long long, std::size_t>> ref_lines;

  const auto lines = content_lines(images_text);
  for (std::size_t i = 0; i < lines.size();) {
    if (is_blank(lines[i].text)) {
      ++i;
      continue;
    }
    const auto& header = lines[i];
    const auto tok = split_ws(header.text);
    if (tok.size() < 10) throw ParseError("image record needs 10 fields", header.number);
    CameraView view;
    view.id = static_cast<int>(parse_integer(tok[0], header.number, "image id"));
    const double qw = parse_real(tok[1], header.number, "qw");
    const double qx = parse_real(tok[2], header.number, "qx");
    const double qy = parse_real(tok[3], header.number, "qy");
    const double qz = parse_real(tok[4], header.number, "qz");
    if (std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz) < 1e-12) throw ParseError("zero quaternion", header.number);
    view.rotation = quaternion_to_rotation(qw, qx, qy, qz);
    view.translation = Eigen::Vector3d(parse_real(tok[5], header.number, "tx"), parse_real(tok[6], header.number, "ty"),
                                       parse_real(tok[7], header.number, "tz"));
    const long long camera_id = parse_integer(tok[8], header.number, "camera id");
    const auto cam = cameras.find(camera_id);
    if (cam == cameras.end())
      throw IntegrityError("line " + std::to_string(header.number) + ": image " + std::to_string(view.id) +
                           " references unknown camera " + std::to_string(camera_id));
    view.fx = cam->second.fx;
    view.fy = cam->second.fy;
    view.cx = cam->second.cx;
    view.cy = cam->second.cy;
    view.width = cam->second.width;
    view.height = cam->second.height;
    // The name is the remainder of the line after the camera id.
    std::istringstream rest(header.text);
    std::string skip;
    for (int f = 0; f < 9; ++f) rest >> skip;
    std::string name;
    std::getline(rest, name);
    const auto first = name.find_first_not_of(" \t");
    view.image_ref = first == std::string::npos ? std::string() : name.substr(first);
    if (model.has_view(view.id)) throw ParseError("duplicate image id", header.number);
    try {
      validate_view(view);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), header.number);
    }

    if (i + 1 < lines.size()) {
      const auto& pts = lines[i + 1];
      const auto ptok = split_ws(pts.text);
      if (ptok.size() % 3 != 0) throw ParseError("POINTS2D must be (X, Y, POINT3D_ID) triplets", pts.number);
      for (std::size_t t = 0; t < ptok.size(); t += 3) {
        parse_real(ptok[t], pts.number, "x");
        parse_real(ptok[t + 1], pts.number, "y");
        const long long pid = parse_integer(ptok[t + 2], pts.number, "point3D id");
        if (pid < 0) continue;
        image_refs[pid].insert(view.id);
        ref_lines.emplace_back(pid, pts.number);
      }
    }
    model.views.push_back(std::move(view));
    i += 2;
  }
  std::sort(model.views.begin(), model.views.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::set<long long> point_ids;
  for (const auto& line : content_lines(points_text)) {
    if (is_blank(line.text)) continue;
    const auto tok = split_ws(line.text);
    if (tok.size() < 8) throw ParseError("point record needs at least 8 fields", line.number);
    if ((tok.size() - 8) % 2 != 0) throw ParseError("track must be (IMAGE_ID, POINT2D_IDX) pairs", line.number);
    SparsePoint point;
    point.id = parse_integer(tok[0], line.number, "point3D id");
    point.position = Eigen::Vector3d(parse_real(tok[1], line.number, "x"), parse_real(tok[2], line.number, "y"),
                                     parse_real(tok[3], line.number, "z"));
    for (int c = 0; c < 3; ++c) {
      const long long v = parse_integer(tok[4 + c], line.number, "color");
      if (v < 0 || v > 255) throw ParseError("color channel out of range", line.number);
      point.color[c] = v / 255.0;
    }
    parse_real(tok[7], line.number, "error");
    std::set<int> observers;
    for (std::size_t t = 8; t < tok.size(); t += 2) {
      const int image_id = static_cast<int>(parse_integer(tok[t], line.number, "track image id"));
      parse_integer(tok[t + 1], line.number, "track point2D index");
      if (!model.has_view(image_id))
        throw IntegrityError("line " + std::to_string(line.number) + ": point " + std::to_string(point.id) +
                             " track references unknown image " + std::to_string(image_id));
      observers.insert(image_id);
    }
    if (const auto it = image_refs.find(point.id); it != image_refs.end())
      observers.insert(it->second.begin(), it->second.end());
    point.observers.assign(observers.begin(), observers.end());
    if (!point_ids.insert(point.id).second) throw ParseError("duplicate point3D id", line.number);
    model.points.push_back(std::move(point));
  }

  for (const auto& [pid, number] : ref_lines) {
    if (!point_ids.count(pid))
      throw IntegrityError("images line " + std::to_string(number) + ": reference to unknown point3D id " +
                           std::to_string(pid));
  }
  return model;
}

SparseModel load_sparse_model(const std::filesystem::path& directory) {
  SparseModel model = parse_sparse_model(read_text_file(directory / "cameras.txt"),
                                         read_text_file(directory / "images.txt"),
                                         read_text_file(directory / "points3D.txt"));
  const auto matches = directory / "matches.txt";
  if (std::filesystem::exists(matches)) model.match_edges = parse_matches(read_text_file(matches));
  validate_model(model);
  return model;
}

SparseModelText serialize_sparse_model(const SparseModel& model) {
  SparseModelText out;
  out.cameras = "# CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n";
  out.images = "# IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n# POINTS2D[] as (X, Y, POINT3D_ID)\n";
  out.points3d = "# POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[] as (IMAGE_ID, POINT2D_IDX)\n";

  // Per view, the points it observes in model order.
  std::map<int, std::vector<std::size_t>> observed;
  for (std::size_t p = 0; p < model.points.size(); ++p)
    for (int v : model.points[p].observers) observed[v].push_back(p);

  for (const auto& v : model.views) {
    out.cameras += std::to_string(v.id) + " PINHOLE " + std::to_string(v.width) + " " + std::to_string(v.height) +
                   " " + format_real(v.fx) + " " + format_real(v.fy) + " " + format_real(v.cx) + " " +
                   format_real(v.cy) + "\n";
    const Eigen::Vector4d q = rotation_to_quaternion(v.rotation);
    const std::string name = v.image_ref.empty() ? "image_" + std::to_string(v.id) : v.image_ref;
    out.images += std::to_string(v.id) + " " + format_real(q[0]) + " " + format_real(q[1]) + " " + format_real(q[2]) +
                  " " + format_real(q[3]) + " " + format_real(v.translation.x()) + " " +
                  format_real(v.translation.y()) + " " + format_real(v.translation.z()) + " " + std::to_string(v.id) +
                  " " + name + "\n";
    std::string pts;
    for (std::size_t p : observed[v.id]) {
      const Eigen::Vector3d cam = v.to_camera(model.points[p].position);
      Eigen::Vector2d uv = Eigen::Vector2d::Zero();
      if (cam.z() > 1e-12) uv = v.project_camera(cam);
      if (!pts.empty()) pts += " ";
      pts += format_real(uv.x()) + " " + format_real(uv.y()) + " " + std::to_string(model.points[p].id);
    }
    out.images += pts + "\n";
  }

  for (std::size_t p = 0; p < model.points.size(); ++p) {
    const auto& pt = model.points[p];
    out.points3d += std::to_string(pt.id) + " " + format_real(pt.position.x()) + " " + format_real(pt.position.y()) +
                    " " + format_real(pt.position.z());
    for (int c = 0; c < 3; ++c) out.points3d += " " + std::to_string(quantize(pt.color[c]));
    out.points3d += " 0";
    for (int v : pt.observers) {
      const auto& list = observed[v];
      const auto idx = std::find(list.begin(), list.end(), p) - list.begin();
      out.points3d += " " + std::to_string(v) + " " + std::to_string(idx);
    }
    out.points3d += "\n";
  }
  return out;
}

void save_sparse_model(const SparseModel& model, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const auto text = serialize_sparse_model(model);
  write_text_file(directory / "cameras.txt", text.cameras);
  write_text_file(directory / "images.txt", text.images);
  write_text_file(directory / "points3D.txt", text.points3d);
  if (!model.match_edges.empty()) write_text_file(directory / "matches.txt", serialize_matches(model.match_edges));
}

std::vector<MatchEdge> parse_matches(const std::string& text) {
  std::vector<MatchEdge> edges;
  for (const auto& line : content_lines(text)) {
    if (is_blank(line.text)) continue;
    const auto tok = split_ws(line.text);
    if (tok.size() != 3) throw ParseError("match line expects '<id_a> <id_b> <count>'", line.number);
    MatchEdge e;
    e.view_a = static_cast<int>(parse_integer(tok[0], line.number, "view id"));
    e.view_b = static_cast<int>(parse_integer(tok[1], line.number, "view id"));
    e.weight = parse_real(tok[2], line.number, "match count");
    if (e.weight < 0) throw ParseError("negative match count", line.number);
    if (e.view_a == e.view_b) throw ParseError("self match", line.number);
    edges.push_back(e);
  }
  return edges;
}

std::string serialize_matches(const std::vector<MatchEdge>& edges) {
  std::string out;
  for (const auto& e : edges)
    out += std::to_string(e.view_a) + " " + std::to_string(e.view_b) + " " + format_real(e.weight) + "\n";
  return out;
}

std::vector<MatchEdge> derive_covisibility_edges(const SparseModel& model) {
  std::map<std::pair<int, int>, long long> counts;
  for (const auto& p : model.points) {
    std::vector<int> obs = p.observers;
    std::sort(obs.begin(), obs.end());
    obs.erase(std::unique(obs.begin(), obs.end()), obs.end());
    for (std::size_t i = 0; i < obs.size(); ++i)
      for (std::size_t j = i + 1; j < obs.size(); ++j) ++counts[{obs[i], obs[j]}];
  }
  std::vector<MatchEdge> edges;
  edges.reserve(counts.size());
  for (const auto& [pair, count] : counts)
    if (count > 0) edges.push_back({pair.first, pair.second, static_cast<double>(count)});
  return edges;
}

void validate_model(const SparseModel& model) {
  std::set<int> ids;
  for (const auto& v : model.views)
    if (!ids.insert(v.id).second) throw IntegrityError("duplicate view id " + std::to_string(v.id));
  for (const auto& p : model.points)
    for (int o : p.observers)
      if (!ids.count(o))
        throw IntegrityError("point " + std::to_string(p.id) + " observed by unknown view " + std::to_string(o));
  for (const auto& e : model.match_edges) {
    if (e.view_a == e.view_b) throw IntegrityError("match edge with identical endpoints " + std::to_string(e.view_a));
    if (!ids.count(e.view_a) || !ids.count(e.view_b))
      throw IntegrityError("match edge references unknown view");
    if (!(e.weight >= 0.0)) throw IntegrityError("negative match weight");
  }
}

}  // namespace tragraph
