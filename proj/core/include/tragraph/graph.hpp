#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tragraph/sparse_model.hpp"

namespace tragraph {

// Undirected weighted camera graph. Vertices are view ids.
class ConnectivityGraph {
 public:
  void add_vertex(int id);
  // Accumulation is not performed: a repeated pair keeps the larger weight.
  void add_edge(int a, int b, double weight);

  const std::vector<int>& vertices() const { return vertices_; }
  bool has_vertex(int id) const { return adjacency_.count(id) != 0; }
  double weight(int a, int b) const;
  const std::map<int, double>& neighbors(int id) const;
  double weighted_degree(int id) const;
  std::size_t edge_count() const;

 private:
  std::vector<int> vertices_;  // ascending
  std::map<int, std::map<int, double>> adjacency_;
};

ConnectivityGraph build_graph(const SparseModel& model);

struct RegionPartition {
  int k = 0;
  std::map<int, int> camera_regions;
  std::vector<std::vector<int>> point_regions;  // per model point, ascending
  std::vector<std::vector<int>> bfs_core;       // per region, in assignment order

  std::vector<int> region_cameras(int region) const;
  std::vector<int> region_points(int region) const;
  std::size_t region_size(int region) const;
};

struct LeftoverScore {
  int node = 0;
  std::vector<double> scores;
  double median = 0.0;
  std::vector<int> eligible;
};

LeftoverScore score_leftover(const ConnectivityGraph& graph, const std::vector<std::set<int>>& regions,
                             int node);

RegionPartition bfs_segment(const ConnectivityGraph& graph, int k);

RegionPartition assign_points(RegionPartition partition, const SparseModel& model);

std::vector<int> top_neighbors(const ConnectivityGraph& graph, int view, int n);

// "camera <id> <region>" and "point <index> <r0,r1,...>" lines.
std::string serialize_partition(const RegionPartition& partition);
RegionPartition parse_partition(const std::string& text);

std::string serialize_graph(const ConnectivityGraph& graph);

}  // namespace tragraph
