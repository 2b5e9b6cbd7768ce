#include <doctest.h>

#include <random>

#include "../oracles/oracles.hpp"
#include "tragraph/error.hpp"
#include "tragraph/graph.hpp"
#include "tragraph/synth.hpp"

using namespace tragraph;

namespace {

ConnectivityGraph make_graph(int n, const std::vector<std::tuple<int, int, double>>& edges) {
  ConnectivityGraph g;
  for (int i = 1; i <= n; ++i) g.add_vertex(i);
  for (const auto& [a, b, w] : edges) g.add_edge(a, b, w);
  return g;
}

std::map<int, std::map<int, double>> adjacency_of(const ConnectivityGraph& g) {
  std::map<int, std::map<int, double>> adj;
  for (int v : g.vertices()) adj[v] = g.neighbors(v);
  return adj;
}

CameraView dummy_view(int id, const Eigen::Vector3d& eye) {
  return look_at(id, eye, eye + Eigen::Vector3d(0, 0, 1), {0, -1, 0}, 20, 16, 16);
}

}  // namespace

TEST_CASE("graph construction") {
  SparseModel one;
  one.views.push_back(dummy_view(1, {0, 0, 0}));
  const ConnectivityGraph g1 = build_graph(one);
  CHECK(g1.vertices() == std::vector<int>{1});
  CHECK(g1.edge_count() == 0);

  SparseModel two;
  two.views = {dummy_view(1, {0, 0, 0}), dummy_view(2, {1, 0, 0}), dummy_view(3, {2, 0, 0})};
  two.match_edges = {{1, 2, 5}, {2, 1, 5}, {2, 3, 0}};
  const ConnectivityGraph g2 = build_graph(two);
  CHECK(g2.edge_count() == 1);
  CHECK(g2.weight(1, 2) == 5);
  CHECK(g2.weight(2, 1) == 5);
  CHECK(g2.weight(2, 3) == 0);

  two.match_edges = {{1, 9, 5}};
  CHECK_THROWS_AS(build_graph(two), IntegrityError);
  CHECK_THROWS_AS(build_graph(SparseModel{}), ArgumentError);
}

TEST_CASE("street scene has consecutive edges") {
  SynthConfig cfg;
  cfg.image_size = 32;
  const SyntheticScene s = generate_synthetic_scene(cfg);
  const ConnectivityGraph g = build_graph(s.model);
  for (int i = 1; i < cfg.num_views; ++i) CHECK(g.weight(i, i + 1) > 0);
}

TEST_CASE("path graph splits into halves") {
  const ConnectivityGraph g = make_graph(4, {{1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
  const RegionPartition p = bfs_segment(g, 2);
  CHECK(p.region_cameras(0) == std::vector<int>{1, 2});
  CHECK(p.region_cameras(1) == std::vector<int>{3, 4});
  CHECK(p.bfs_core[0] == std::vector<int>{2, 1});
}

TEST_CASE("single region and complete graph") {
  const ConnectivityGraph path = make_graph(4, {{1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
  CHECK(bfs_segment(path, 1).region_cameras(0) == std::vector<int>{1, 2, 3, 4});
  const ConnectivityGraph k4 = make_graph(4, {{1, 2, 1}, {1, 3, 1}, {1, 4, 1}, {2, 3, 1}, {2, 4, 1}, {3, 4, 1}});
  const RegionPartition p = bfs_segment(k4, 2);
  CHECK(p.region_size(0) == 2);
  CHECK(p.region_size(1) == 2);
}

TEST_CASE("region count bounds") {
  const ConnectivityGraph g = make_graph(3, {{1, 2, 1}});
  CHECK_THROWS_AS(bfs_segment(g, 0), ArgumentError);
  CHECK_THROWS_AS(bfs_segment(g, 4), ArgumentError);
  CHECK_NOTHROW(bfs_segment(g, 3));
}

TEST_CASE("disconnected components stop growth") {
  // 1-2 and 3-4-5: quota 2 for k = 2 on 5 nodes.
  const ConnectivityGraph g = make_graph(5, {{1, 2, 1}, {3, 4, 2}, {4, 5, 2}});
  const RegionPartition p = bfs_segment(g, 2);
  CHECK(p.bfs_core[0] == std::vector<int>{4, 3});
  // Seed 5 has no unassigned neighbours, so region 1 stops at one node.
  CHECK(p.bfs_core[1] == std::vector<int>{5});
  // Node 1 ties at zero everywhere and joins the smaller region; node 2 then
  // scores above the median only for region 1.
  CHECK(p.camera_regions.at(1) == 1);
  CHECK(p.camera_regions.at(2) == 1);
  std::size_t total = 0;
  for (int r = 0; r < 2; ++r) total += p.region_size(r);
  CHECK(total == 5);
}

TEST_CASE("leftover scoring") {
  const ConnectivityGraph g = make_graph(6, {{1, 2, 3}, {1, 3, 1}, {1, 4, 1}});
  const std::vector<std::set<int>> regions = {{2}, {3}, {4, 5, 6}};
  const LeftoverScore s = score_leftover(g, regions, 1);
  CHECK(s.scores == std::vector<double>{3, 1, 1});
  CHECK(s.median == 1);
  CHECK(s.eligible == std::vector<int>{0});

  const LeftoverScore even = score_leftover(g, {{2}, {3}}, 1);
  CHECK(even.median == 2);
  CHECK(even.eligible == std::vector<int>{0});

  const LeftoverScore none = score_leftover(g, {{5}, {6}}, 1);
  CHECK(none.eligible.empty());
}

TEST_CASE("isolated leftovers go to the smallest region") {
  // Star around 1 plus isolated 6 and 7: k = 3, quota 2.
  const ConnectivityGraph g = make_graph(7, {{1, 2, 5}, {1, 3, 4}, {3, 4, 1}, {4, 5, 1}});
  const RegionPartition p = bfs_segment(g, 3);
  std::vector<std::size_t> sizes;
  for (int r = 0; r < 3; ++r) sizes.push_back(p.region_size(r));
  CHECK(sizes[0] + sizes[1] + sizes[2] == 7);
  for (int r = 0; r < 3; ++r) CHECK(oracle::induced_connected(adjacency_of(g), p.bfs_core[r]));
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
}

TEST_CASE("random graphs: total assignment, connectivity, balance, monotone preference") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 10 + static_cast<int>(rng() % 40);
    ConnectivityGraph g;
    for (int i = 1; i <= n; ++i) g.add_vertex(i);
    for (int i = 2; i <= n; ++i) g.add_edge(i, 1 + static_cast<int>(rng() % (i - 1)), 1 + static_cast<double>(rng() % 9));
    for (int e = 0; e < n; ++e) {
      const int a = 1 + static_cast<int>(rng() % n), b = 1 + static_cast<int>(rng() % n);
      if (a != b) g.add_edge(a, b, 1 + static_cast<double>(rng() % 9));
    }
    const int k = 2 + static_cast<int>(rng() % 4);
    const RegionPartition p = bfs_segment(g, k);
    CHECK(p.camera_regions.size() == static_cast<std::size_t>(n));
    for (int r = 0; r < k; ++r) {
      CHECK(oracle::induced_connected(adjacency_of(g), p.bfs_core[r]));
      CHECK(p.bfs_core[r].size() <= static_cast<std::size_t>(n / k));
    }
    CHECK(bfs_segment(g, k).camera_regions == p.camera_regions);
  }
}

TEST_CASE("point assignment") {
  SparseModel m;
  m.views = {dummy_view(1, {0, 0, 0}), dummy_view(2, {5, 0, 0}), dummy_view(3, {10, 0, 0})};
  m.points.push_back({1, {0, 0, 1}, {}, {1}});
  m.points.push_back({2, {0, 0, 1}, {}, {1, 3}});
  m.points.push_back({3, {5.2, 0, 1}, {}, {}});
  RegionPartition p;
  p.k = 3;
  p.camera_regions = {{1, 0}, {2, 1}, {3, 2}};
  p.bfs_core = {{1}, {2}, {3}};
  const RegionPartition a = assign_points(p, m);
  CHECK(a.point_regions[0] == std::vector<int>{0});
  CHECK(a.point_regions[1] == std::vector<int>{0, 2});
  CHECK(a.point_regions[2] == std::vector<int>{1});
  CHECK(a.region_points(0) == std::vector<int>{0, 1});
}

TEST_CASE("top neighbors") {
  const ConnectivityGraph g = make_graph(5, {{1, 2, 9}, {1, 3, 3}, {1, 4, 9}});
  CHECK(top_neighbors(g, 1, 2) == std::vector<int>{2, 4});
  CHECK(top_neighbors(g, 1, 4) == std::vector<int>{2, 4, 3});
  CHECK(top_neighbors(g, 5, 4).empty());
  CHECK_THROWS_AS(top_neighbors(g, 42, 4), ArgumentError);
}

TEST_CASE("partition text round trip") {
  const ConnectivityGraph g = make_graph(4, {{1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
  RegionPartition p = bfs_segment(g, 2);
  p.point_regions = {{0}, {0, 1}, {1}};
  const std::string text = serialize_partition(p);
  CHECK(text.find("camera 1 0\n") != std::string::npos);
  CHECK(text.find("point 1 0,1\n") != std::string::npos);
  const RegionPartition r = parse_partition(text);
  CHECK(r.k == 2);
  CHECK(r.camera_regions == p.camera_regions);
  CHECK(r.point_regions == p.point_regions);
  CHECK(r.bfs_core == p.bfs_core);
  CHECK_THROWS_AS(parse_partition("regions 2\ncamera 1 5\n"), ParseError);
  CHECK_THROWS_AS(parse_partition("camera 1 0\n"), ParseError);
}
