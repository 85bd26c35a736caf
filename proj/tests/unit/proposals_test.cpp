#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "graphclus/proposals.hpp"
#include "support/oracles.hpp"

using namespace graphclus;

namespace {

AffinityGraph clique(std::size_t n, double w) {
  std::vector<std::tuple<VertexId, VertexId, double>> edges;
  for (VertexId a = 0; a < n; ++a)
    for (VertexId b = a + 1; b < n; ++b) edges.emplace_back(a, b, w);
  return AffinityGraph::from_edges(n, edges);
}

void check_partition(const std::vector<VertexSet>& parts, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& p : parts)
    for (VertexId v : p) ++seen[v];
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
}

}  // namespace

TEST_CASE("super vertices on simple graphs") {
  SuperVertexConfig cfg;
  auto edgeless = generate_super_vertices(AffinityGraph(6), cfg);
  CHECK(edgeless.super_vertices.size() == 6);
  CHECK(edgeless.escalations == 0);

  cfg.e_tau = 0.5;
  auto one = generate_super_vertices(clique(5, 0.9), cfg);
  REQUIRE(one.super_vertices.size() == 1);
  CHECK(one.super_vertices[0].size() == 5);

  cfg.s_max = 3;
  cfg.delta = 0.5;
  auto split = generate_super_vertices(clique(5, 0.9), cfg);
  CHECK(split.super_vertices.size() == 5);
  CHECK(split.escalations == 1);
}

TEST_CASE("super vertices reject non-finite weights and bad configs") {
  std::vector<std::tuple<VertexId, VertexId, double>> edges{{0, 1, NAN}};
  CHECK_THROWS_AS(generate_super_vertices(AffinityGraph::from_edges(2, edges), {}),
                  std::invalid_argument);
  SuperVertexConfig bad;
  bad.delta = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.s_max = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("super vertices partition random KNN graphs within the escalation bound") {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 50 + rng.below(300);
    auto emb = oracle::random_embeddings(rng, n, 2 + rng.below(6));
    auto g = build_knn_graph(emb, 1 + rng.below(20));
    SuperVertexConfig cfg;
    cfg.e_tau = rng.uniform(0.0, 0.9);
    cfg.s_max = 2 + rng.below(40);
    cfg.delta = rng.uniform(0.02, 0.2);
    auto part = generate_super_vertices(g, cfg);
    check_partition(part.super_vertices, n);
    for (const auto& s : part.super_vertices) CHECK(s.size() < cfg.s_max);
    const auto bound = static_cast<std::size_t>(std::ceil((1.0 - cfg.e_tau) / cfg.delta)) + 1;
    CHECK(part.escalations <= bound);
  }
}

TEST_CASE("average center") {
  EmbeddingSet emb(Matrix::from_rows({{1, 0}, {0, 1}, {1, 0}, {-1, 0}}));
  auto single = average_center(emb, VertexSet{1});
  CHECK(single == std::vector<double>{0, 1});
  CHECK(average_center(emb, VertexSet{0, 2}) == std::vector<double>{1, 0});
  auto mixed = average_center(emb, VertexSet{0, 1});
  CHECK(mixed[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(mixed[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(average_center(emb, VertexSet{0, 3}), std::domain_error);
  CHECK_THROWS_AS(average_center(emb, VertexSet{9}), std::out_of_range);
}

TEST_CASE("one iteration yields the super-vertex partition") {
  Rng rng(3);
  auto emb = oracle::random_embeddings(rng, 120, 4);
  auto g = build_knn_graph(emb, 6);
  SuperVertexConfig cfg;
  cfg.iterations = 1;
  cfg.e_tau = 0.8;
  auto props = generate_proposals(g, emb, cfg);
  auto svs = generate_super_vertices(g, cfg).super_vertices;
  CHECK(props.proposals() == svs);
  for (auto it : props.iterations()) CHECK(it == 0);
}

TEST_CASE("identical centers merge at the second level") {
  // 2 and 3 coincide but share no base edge, so level 0 is {0,1},{2},{3}
  EmbeddingSet emb(Matrix::from_rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}}));
  std::vector<std::tuple<VertexId, VertexId, double>> edges{{0, 1, 1.0}};
  auto g = AffinityGraph::from_edges(4, edges);
  SuperVertexConfig cfg;
  cfg.iterations = 2;
  cfg.k = 1;
  cfg.e_tau = 0.99;
  auto props = generate_proposals(g, emb, cfg);
  REQUIRE(props.size() == 4);
  CHECK(props[3] == VertexSet{2, 3});
  CHECK(props.iterations()[3] == 1);
}

TEST_CASE("higher-level proposals are unions of the previous level") {
  Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 100 + rng.below(200);
    auto emb = oracle::random_embeddings(rng, n, 3);
    auto g = build_knn_graph(emb, 8);
    SuperVertexConfig cfg;
    cfg.e_tau = 0.95;
    cfg.iterations = 3;
    cfg.k = 5;
    cfg.s_max = 30;
    auto levels = generate_proposal_levels(g, emb, cfg);
    for (std::size_t l = 0; l < levels.size(); ++l) check_partition(levels[l], n);
    for (std::size_t l = 1; l < levels.size(); ++l) {
      for (const VertexSet& p : levels[l]) {
        // every previous-level set is either inside p or disjoint from it
        std::size_t covered = 0;
        for (const VertexSet& q : levels[l - 1]) {
          std::size_t inside = 0;
          for (VertexId v : q) inside += p.contains(v);
          CHECK((inside == 0 || inside == q.size()));
          covered += inside;
        }
        CHECK(covered == p.size());
      }
    }
  }
}

TEST_CASE("proposal set dedups by content") {
  ProposalSet ps;
  CHECK(ps.add(VertexSet{1, 2}, 0));
  CHECK_FALSE(ps.add(VertexSet{2, 1}, 1));
  CHECK(ps.add(VertexSet{1}, 1));
  CHECK(ps.size() == 2);
  CHECK(ps.iterations() == std::vector<std::size_t>{0, 1});

  ProposalSet other;
  other.add(VertexSet{1, 2}, 3);
  other.add(VertexSet{4}, 2);
  ps.merge(other);
  CHECK(ps.size() == 3);
  CHECK(ps.iterations() == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("multi-threshold proposals are duplicate free") {
  Rng rng(19);
  auto emb = oracle::random_embeddings(rng, 300, 6);
  auto g = build_knn_graph(emb, 10);
  auto props = generate_proposals_multi(g, emb, SuperVertexConfig{}, kDefaultThresholdGrid);
  std::set<VertexSet> unique(props.proposals().begin(), props.proposals().end());
  CHECK(unique.size() == props.size());
}
