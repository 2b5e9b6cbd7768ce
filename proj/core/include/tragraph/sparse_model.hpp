#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "tragraph/camera.hpp"

namespace tragraph {

struct SparsePoint {
  long long id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d color = Eigen::Vector3d::Zero();  // [0,1]
  std::vector<int> observers;                       // view ids, ascending, unique
};

struct MatchEdge {
  int view_a = 0;
  int view_b = 0;
  double weight = 0.0;

  bool operator==(const MatchEdge&) const = default;
};

struct SparseModel {
  std::vector<CameraView> views;
  std::vector<SparsePoint> points;
  std::vector<MatchEdge> match_edges;

  const CameraView& view(int id) const;
  bool has_view(int id) const;
};

// COLMAP text layout, one string per file.
struct SparseModelText {
  std::string cameras;
  std::string images;
  std::string points3d;
};

// Parses cameras.txt / images.txt / points3D.txt contents. Supports the
// PINHOLE and SIMPLE_PINHOLE camera models. Point observers are the union of
// the point tracks and the image records that reference the point.
SparseModel parse_sparse_model(const std::string& cameras_text, const std::string& images_text,
                               const std::string& points_text);
SparseModel load_sparse_model(const std::filesystem::path& directory);

SparseModelText serialize_sparse_model(const SparseModel& model);
void save_sparse_model(const SparseModel& model, const std::filesystem::path& directory);

// Lines "<id_a> <id_b> <count>".
std::vector<MatchEdge> parse_matches(const std::string& text);
std::string serialize_matches(const std::vector<MatchEdge>& edges);

// Shared-track counts per unordered view pair, view_a < view_b, sorted.
std::vector<MatchEdge> derive_covisibility_edges(const SparseModel& model);

// Checks the invariants of the model (observer and edge endpoints exist,
// weights >= 0, distinct edge endpoints). Throws IntegrityError.
void validate_model(const SparseModel& model);

Eigen::Matrix3d quaternion_to_rotation(double qw, double qx, double qy, double qz);
Eigen::Vector4d rotation_to_quaternion(const Eigen::Matrix3d& rotation);

}  // namespace tragraph
