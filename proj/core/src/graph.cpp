#include "tragraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "tragraph/error.hpp"

namespace tragraph {

namespace {

const std::map<int, double> kNoNeighbors;

}  // namespace

void ConnectivityGraph::add_vertex(int id) {
  if (adjacency_.emplace(id, std::map<int, double>{}).second) {
    vertices_.insert(std::upper_bound(vertices_.begin(), vertices_.end(), id), id);
  }
}

void ConnectivityGraph::add_edge(int a, int b, double weight) {
  if (a == b) throw ArgumentError("self edge on vertex " + std::to_string(a));
  if (!(weight >= 0.0)) throw ArgumentError("edge weight must be non-negative");
  if (!has_vertex(a) || !has_vertex(b)) throw ArgumentError("edge endpoint is not a vertex");
  if (weight == 0.0) return;
  double& ab = adjacency_[a][b];
  ab = std::max(ab, weight);
  adjacency_[b][a] = ab;
}

double ConnectivityGraph::weight(int a, int b) const {
  const auto it = adjacency_.find(a);
  if (it == adjacency_.end()) return 0.0;
  const auto jt = it->second.find(b);
  return jt == it->second.end() ? 0.0 : jt->second;
}

const std::map<int, double>& ConnectivityGraph::neighbors(int id) const {
  const auto it = adjacency_.find(id);
  return it == adjacency_.end() ? kNoNeighbors : it->second;
}

double ConnectivityGraph::weighted_degree(int id) const {
  double sum = 0.0;
  for (const auto& [v, w] : neighbors(id)) sum += w;
  return sum;
}

std::size_t ConnectivityGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& [v, adj] : adjacency_) twice += adj.size();
  return twice / 2;
}

ConnectivityGraph build_graph(const SparseModel& model) {
  if (model.views.empty()) throw ArgumentError("cannot build a graph without views");
  ConnectivityGraph graph;
  for (const auto& v : model.views) graph.add_vertex(v.id);
  const auto edges = model.match_edges.empty() ? derive_covisibility_edges(model) : model.match_edges;
  for (const auto& e : edges) {
    if (!graph.has_vertex(e.view_a) || !graph.has_vertex(e.view_b))
      throw IntegrityError("match edge (" + std::to_string(e.view_a) + ", " + std::to_string(e.view_b) +
                           ") references an unknown view");
    if (e.view_a == e.view_b) throw IntegrityError("self match on view " + std::to_string(e.view_a));
    graph.add_edge(e.view_a, e.view_b, e.weight);
  }
  return graph;
}

std::vector<int> RegionPartition::region_cameras(int region) const {
  std::vector<int> out;
  for (const auto& [view, r] : camera_regions)
    if (r == region) out.push_back(view);
  return out;
}

std::vector<int> RegionPartition::region_points(int region) const {
  std::vector<int> out;
  for (std::size_t p = 0; p < point_regions.size(); ++p)
    if (std::binary_search(point_regions[p].begin(), point_regions[p].end(), region)) out.push_back(static_cast<int>(p));
  return out;
}

std::size_t RegionPartition::region_size(int region) const { return region_cameras(region).size(); }

namespace {

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double weight_into(const ConnectivityGraph& graph, int node, const std::set<int>& region) {
  double sum = 0.0;
  for (const auto& [v, w] : graph.neighbors(node))
    if (region.count(v)) sum += w;
  return sum;
}

}  // namespace

LeftoverScore score_leftover(const ConnectivityGraph& graph, const std::vector<std::set<int>>& regions, int node) {
  LeftoverScore score;
  score.node = node;
  score.scores.reserve(regions.size());
  for (const auto& r : regions) score.scores.push_back(weight_into(graph, node, r));
  score.median = median_of(score.scores);
  for (std::size_t i = 0; i < score.scores.size(); ++i)
    if (score.scores[i] > score.median) score.eligible.push_back(static_cast<int>(i));
  return score;
}

RegionPartition bfs_segment(const ConnectivityGraph& graph, int k) {
  const std::size_t n = graph.vertices().size();
  if (k <= 0) throw ArgumentError("region count must be positive");
  if (static_cast<std::size_t>(k) > n)
    throw ArgumentError("region count " + std::to_string(k) + " exceeds vertex count " + std::to_string(n));
  const std::size_t quota = n / static_cast<std::size_t>(k);

  RegionPartition partition;
  partition.k = k;
  partition.bfs_core.assign(k, {});
  std::vector<std::set<int>> regions(k);
  std::set<int> unassigned(graph.vertices().begin(), graph.vertices().end());

  const auto assign = [&](int node, int region) {
    regions[region].insert(node);
    partition.camera_regions[node] = region;
    unassigned.erase(node);
  };

  for (int i = 0; i < k && !unassigned.empty(); ++i) {
    // Seed: unassigned node with the largest weighted degree over all edges.
    int seed = *unassigned.begin();
    double best = -1.0;
    for (int u : unassigned) {
      const double d = graph.weighted_degree(u);
      if (d > best) {
        best = d;
        seed = u;
      }
    }
    assign(seed, i);
    partition.bfs_core[i].push_back(seed);

    while (regions[i].size() < quota) {
      std::set<int> frontier;
      for (int u : regions[i])
        for (const auto& [v, w] : graph.neighbors(u))
          if (unassigned.count(v)) frontier.insert(v);
      if (frontier.empty()) break;

      std::vector<std::pair<double, int>> wave;
      wave.reserve(frontier.size());
      for (int v : frontier) wave.emplace_back(weight_into(graph, v, regions[i]), v);
      std::sort(wave.begin(), wave.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      const std::size_t room = quota - regions[i].size();
      const std::size_t take = std::min(room, wave.size());
      for (std::size_t j = 0; j < take; ++j) {
        assign(wave[j].second, i);
        partition.bfs_core[i].push_back(wave[j].second);
      }
    }
  }

  const std::vector<int> leftovers(unassigned.begin(), unassigned.end());
  for (int u : leftovers) {
    const LeftoverScore score = score_leftover(graph, regions, u);
    int chosen = -1;
    if (!score.eligible.empty()) {
      for (int i : score.eligible)
        if (chosen < 0 || regions[i].size() < regions[chosen].size()) chosen = i;
    } else {
      for (int i = 0; i < k; ++i) {
        if (chosen < 0 || score.scores[i] > score.scores[chosen] ||
            (score.scores[i] == score.scores[chosen] && regions[i].size() < regions[chosen].size()))
          chosen = i;
      }
    }
    assign(u, chosen);
  }
  return partition;
}

RegionPartition assign_points(RegionPartition partition, const SparseModel& model) {
  if (partition.camera_regions.empty()) throw ArgumentError("partition has no cameras");
  partition.point_regions.assign(model.points.size(), {});
  for (std::size_t p = 0; p < model.points.size(); ++p) {
    std::set<int> regions;
    for (int view : model.points[p].observers) {
      const auto it = partition.camera_regions.find(view);
      if (it != partition.camera_regions.end()) regions.insert(it->second);
    }
    if (regions.empty()) {
      double best = std::numeric_limits<double>::infinity();
      int region = -1;
      for (const auto& [view_id, r] : partition.camera_regions) {
        if (!model.has_view(view_id)) continue;
        const double d = (model.view(view_id).center() - model.points[p].position).squaredNorm();
        if (d < best) {
          best = d;
          region = r;
        }
      }
      if (region < 0) throw ArgumentError("partition cameras are missing from the model");
      regions.insert(region);
    }
    partition.point_regions[p].assign(regions.begin(), regions.end());
  }
  return partition;
}

std::vector<int> top_neighbors(const ConnectivityGraph& graph, int view, int n) {
  if (!graph.has_vertex(view)) throw ArgumentError("unknown view id " + std::to_string(view));
  std::vector<std::pair<double, int>> adj;
  for (const auto& [v, w] : graph.neighbors(view)) adj.emplace_back(w, v);
  std::sort(adj.begin(), adj.end(),
            [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  std::vector<int> out;
  for (std::size_t i = 0; i < adj.size() && static_cast<int>(i) < n; ++i) out.push_back(adj[i].second);
  return out;
}

std::string serialize_partition(const RegionPartition& partition) {
  std::ostringstream out;
  out << "regions " << partition.k << "\n";
  for (std::size_t r = 0; r < partition.bfs_core.size(); ++r) {
    out << "core " << r;
    for (std::size_t j = 0; j < partition.bfs_core[r].size(); ++j)
      out << (j == 0 ? " " : ",") << partition.bfs_core[r][j];
    out << "\n";
  }
  for (const auto& [view, region] : partition.camera_regions) out << "camera " << view << " " << region << "\n";
  for (std::size_t p = 0; p < partition.point_regions.size(); ++p) {
    out << "point " << p << " ";
    for (std::size_t j = 0; j < partition.point_regions[p].size(); ++j)
      out << (j == 0 ? "" : ",") << partition.point_regions[p][j];
    out << "\n";
  }
  return out.str();
}

namespace {

std::vector<int> parse_id_list(const std::string& text, std::size_t line) {
  std::vector<int> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      ids.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ParseError("bad id list '" + text + "'", line);
    }
  }
  return ids;
}

}  // namespace

RegionPartition parse_partition(const std::string& text) {
  RegionPartition partition;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  std::map<int, std::vector<int>> points;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind) || kind[0] == '#') continue;
    if (kind == "regions") {
      if (!(ls >> partition.k) || partition.k <= 0) throw ParseError("bad region count", number);
      partition.bfs_core.assign(partition.k, {});
    } else if (kind == "core") {
      int r = -1;
      std::string ids;
      if (!(ls >> r) || r < 0 || r >= partition.k) throw ParseError("bad core record", number);
      if (ls >> ids) partition.bfs_core[r] = parse_id_list(ids, number);
    } else if (kind == "camera") {
      int id = 0, r = -1;
      if (!(ls >> id >> r)) throw ParseError("bad camera record", number);
      if (partition.k <= 0 || r < 0 || r >= partition.k) throw ParseError("camera region out of range", number);
      if (!partition.camera_regions.emplace(id, r).second) throw ParseError("camera assigned twice", number);
    } else if (kind == "point") {
      int index = -1;
      std::string ids;
      if (!(ls >> index >> ids) || index < 0) throw ParseError("bad point record", number);
      auto regions = parse_id_list(ids, number);
      for (int r : regions)
        if (r < 0 || r >= partition.k) throw ParseError("point region out of range", number);
      points[index] = std::move(regions);
    } else {
      throw ParseError("unknown record '" + kind + "'", number);
    }
  }
  if (partition.k <= 0) throw ParseError("missing 'regions' record", 0);
  if (!points.empty()) {
    partition.point_regions.assign(static_cast<std::size_t>(points.rbegin()->first) + 1, {});
    for (auto& [index, regions] : points) partition.point_regions[index] = std::move(regions);
  }
  return partition;
}

std::string serialize_graph(const ConnectivityGraph& graph) {
  std::ostringstream out;
  for (int v : graph.vertices()) out << "vertex " << v << "\n";
  char buf[64];
  for (int a : graph.vertices()) {
    for (const auto& [b, w] : graph.neighbors(a)) {
      if (b <= a) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", w);
      out << "edge " << a << " " << b << " " << buf << "\n";
    }
  }
  return out.str();
}

}  // namespace tragraph
