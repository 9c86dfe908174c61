#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sfirg/graphs.hpp"
#include "sfirg/stats.hpp"

using namespace sfirg;

namespace {

double poisson_pmf(std::uint64_t k, double mean) {
  return std::exp(-mean + static_cast<double>(k) * std::log(mean) - std::lgamma(static_cast<double>(k) + 1.0));
}

// Chi-square of integer observations against Poisson(mean), cells 0..kmax
// plus an upper tail cell.
double poisson_gof_pvalue(const std::vector<std::uint64_t>& obs, double mean) {
  const std::uint64_t kmax = static_cast<std::uint64_t>(mean + 10.0 * std::sqrt(mean) + 10.0);
  std::vector<double> counts(kmax + 2, 0.0), expected(kmax + 2, 0.0);
  for (auto k : obs) counts[std::min(k, kmax + 1)] += 1.0;
  double cum = 0.0;
  for (std::uint64_t k = 0; k <= kmax; ++k) {
    expected[k] = poisson_pmf(k, mean) * static_cast<double>(obs.size());
    cum += expected[k];
  }
  expected[kmax + 1] = std::max(0.0, static_cast<double>(obs.size()) - cum);
  return chi_square_gof(counts, expected).p_value;
}

void expect_handshake(const GraphSample& g) {
  std::uint64_t sum = std::accumulate(g.degrees.begin(), g.degrees.end(), std::uint64_t{0});
  EXPECT_EQ(sum, 2 * g.non_loop_instances + g.loop_instances);
  if (g.edges) {
    std::uint64_t loops = 0, non_loops = 0;
    for (const Edge& e : *g.edges) (e.i == e.j ? loops : non_loops) += e.multiplicity;
    EXPECT_EQ(loops, g.loop_instances);
    EXPECT_EQ(non_loops, g.non_loop_instances);
    EXPECT_EQ(degrees_from_edges(g.n, *g.edges), g.degrees);
  }
}

}  // namespace

TEST(Degrees, LoopAddsOneToItsNode) {
  EXPECT_EQ(degrees_from_edges(3, std::vector<Edge>{{0, 1, 1}}), (std::vector<std::uint64_t>{1, 1, 0}));
  EXPECT_EQ(degrees_from_edges(3, std::vector<Edge>{{0, 0, 1}}), (std::vector<std::uint64_t>{1, 0, 0}));
  EXPECT_EQ(degrees_from_edges(3, std::vector<Edge>{{0, 1, 3}}), (std::vector<std::uint64_t>{3, 3, 0}));
  EXPECT_THROW(degrees_from_edges(2, std::vector<Edge>{{0, 2, 1}}), DomainError);
}

TEST(NorrosReittuNaive, DegenerateSingleNode) {
  const auto w = WeightVector::from_values({1e-9});
  Rng rng(1);
  for (int r = 0; r < 100; ++r) EXPECT_EQ(generate_nr_naive(w, rng).degrees[0], 0u);
}

TEST(NorrosReittuNaive, RefusesLargeN) {
  Rng rng(1);
  const auto w = sample_weights(WeightDistribution::pareto(2, 1), 5000, rng);
  EXPECT_THROW(generate_nr_naive(w, rng), DomainError);
  EXPECT_THROW(generate_cl_naive(w, rng), DomainError);
  EXPECT_THROW(generate_nr_naive(WeightVector::from_values({1, 2, 3}), rng, 2), DomainError);
}

TEST(NorrosReittuNaive, DegreeOfHeaviestIsPoissonOfWeight) {
  const auto w = WeightVector::from_values({3, 2, 1});
  Rng rng(2024);
  std::vector<std::uint64_t> d1;
  double edges = 0.0;
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    const auto g = generate_nr_naive(w, rng);
    expect_handshake(g);
    d1.push_back(g.degrees[0]);
    edges += static_cast<double>(g.edge_instances());
  }
  EXPECT_GT(poisson_gof_pvalue(d1, 3.0), 0.01);
  // Total instances ~ Poisson(L/2 + S2/(2L)) = Poisson(3 + 14/12).
  const double mean = 3.0 + 14.0 / 12.0;
  EXPECT_NEAR(edges / reps, mean, 3.0 * std::sqrt(mean / reps));
}

TEST(NorrosReittuFast, SingleNodeOnlyLoops) {
  const auto w = WeightVector::from_values({4.0});
  Rng rng(9);
  std::vector<std::uint64_t> d;
  for (int r = 0; r < 10000; ++r) {
    const auto g = generate_nr_fast(w, rng, EdgeMode::Materialize);
    EXPECT_EQ(g.non_loop_instances, 0u);
    expect_handshake(g);
    d.push_back(g.degrees[0]);
  }
  EXPECT_GT(poisson_gof_pvalue(d, 4.0), 0.01);
}

TEST(NorrosReittuFast, DegreeMarginalsArePoisson) {
  Rng wrng(31);
  const auto w = sample_weights(WeightDistribution::pareto(2.0, 1.0), 32, wrng);
  Rng rng(32);
  const std::size_t nodes[3] = {0, 15, 31};
  std::vector<std::vector<std::uint64_t>> d(3);
  for (int r = 0; r < 10000; ++r) {
    const auto g = generate_nr_fast(w, rng);
    for (int s = 0; s < 3; ++s) d[s].push_back(g.degrees[nodes[s]]);
  }
  for (int s = 0; s < 3; ++s) EXPECT_GT(poisson_gof_pvalue(d[s], w[nodes[s]]), 0.01 / 3) << "node " << nodes[s];
}

TEST(NorrosReittuFast, EdgeModesConsumeTheSameRandomness) {
  Rng wrng(4);
  const auto w = sample_weights(WeightDistribution::burr(1.5), 300, wrng);
  Rng a(5), b(5);
  const auto g1 = generate_nr_fast(w, a, EdgeMode::DegreesOnly);
  const auto g2 = generate_nr_fast(w, b, EdgeMode::Materialize);
  EXPECT_EQ(g1.degrees, g2.degrees);
  EXPECT_FALSE(g1.edges.has_value());
  expect_handshake(g2);
}

TEST(NorrosReittuFast, MatchesNaiveInDistribution) {
  Rng wrng(64);
  const auto w = sample_weights(WeightDistribution::pareto(2.0, 1.0), 64, wrng);
  Rng rng(65);
  std::vector<double> fe, ne, fd, nd;
  for (int r = 0; r < 1500; ++r) {
    const auto f = generate_nr_fast(w, rng);
    const auto g = generate_nr_naive(w, rng);
    fe.push_back(static_cast<double>(f.edge_instances()));
    ne.push_back(static_cast<double>(g.edge_instances()));
    fd.push_back(static_cast<double>(f.degrees[0]));
    nd.push_back(static_cast<double>(g.degrees[0]));
  }
  EXPECT_GT(ks_two_sample_pvalue(fe, ne), 0.005);
  EXPECT_GT(ks_two_sample_pvalue(fd, nd), 0.005);
}

TEST(ChungLuNaive, CappedPairAlwaysPresent) {
  const auto w = WeightVector::from_values({3, 2, 1});
  Rng rng(7);
  for (int r = 0; r < 10000; ++r) {
    const auto g = generate_cl_naive(w, rng);
    expect_handshake(g);
    const auto& e = *g.edges;
    ASSERT_TRUE(std::any_of(e.begin(), e.end(), [](const Edge& x) { return x.i == 0 && x.j == 1; }));
    for (auto d : g.degrees) EXPECT_LE(d, 3u);
    for (const auto& x : e) EXPECT_EQ(x.multiplicity, 1u);
  }
}

TEST(ChungLuNaive, HomogeneousPairProbability) {
  // Equal weights w on n nodes: W_i W_j / L = w / n.
  const std::size_t n = 10;
  const auto w = WeightVector::from_values(std::vector<double>(n, 2.0));
  Rng rng(8);
  const int reps = 20000;
  int hits = 0;
  for (int r = 0; r < reps; ++r) {
    const auto g = generate_cl_naive(w, rng);
    hits += std::any_of(g.edges->begin(), g.edges->end(), [](const Edge& x) { return x.i == 0 && x.j == 1; });
  }
  EXPECT_NEAR(static_cast<double>(hits) / reps, 0.2, 4.0 * std::sqrt(0.2 * 0.8 / reps));
}

TEST(ChungLuFast, CompleteGraphWhenAllCapped) {
  const std::size_t n = 50;
  const auto w = WeightVector::from_values(std::vector<double>(n, 100.0));  // w^2 / L = 2 > 1
  Rng rng(10);
  const auto g = generate_cl_fast(w, rng, EdgeMode::Materialize);
  for (auto d : g.degrees) EXPECT_EQ(d, n);
  EXPECT_EQ(g.edges->size(), n * (n + 1) / 2);
  expect_handshake(g);
}

TEST(ChungLuFast, EmptyInTheSmallWeightLimit) {
  // p = w / n = 1e-7 for every pair; P(any edge) < 5050e-7.
  const auto w = WeightVector::from_values(std::vector<double>(100, 1e-5));
  Rng rng(11);
  int nonempty = 0;
  for (int r = 0; r < 1000; ++r) nonempty += generate_cl_fast(w, rng).edge_instances() > 0;
  EXPECT_LE(nonempty, 5);
}

TEST(ChungLuFast, SimpleGraphWithHandshake) {
  Rng wrng(12);
  const auto w = sample_weights(WeightDistribution::pareto(1.0, 1.2), 2000, wrng);
  Rng rng(13);
  const auto g = generate_cl_fast(w, rng, EdgeMode::Materialize);
  expect_handshake(g);
  auto e = *g.edges;
  detail::canonicalize(e);
  EXPECT_EQ(e.size(), g.edges->size());
  for (const auto& x : e) EXPECT_EQ(x.multiplicity, 1u);
  for (auto d : g.degrees) EXPECT_LE(d, g.n);
}

TEST(ChungLuFast, MatchesNaiveInDistribution) {
  Rng wrng(640);
  const auto w = sample_weights(WeightDistribution::burr(2.5), 64, wrng);
  Rng rng(641);
  std::vector<std::vector<double>> f(3), nv(3);
  for (int r = 0; r < 1500; ++r) {
    const auto a = generate_cl_fast(w, rng);
    const auto b = generate_cl_naive(w, rng);
    f[0].push_back(static_cast<double>(a.edge_instances()));
    nv[0].push_back(static_cast<double>(b.edge_instances()));
    f[1].push_back(static_cast<double>(a.degrees[0]));
    nv[1].push_back(static_cast<double>(b.degrees[0]));
    f[2].push_back(static_cast<double>(a.degrees[31]));
    nv[2].push_back(static_cast<double>(b.degrees[31]));
  }
  for (int s = 0; s < 3; ++s) EXPECT_GT(ks_two_sample_pvalue(f[s], nv[s]), 0.01 / 3) << "statistic " << s;
}

TEST(ChungLuFast, PairFrequenciesMatchProbabilities) {
  // Exact inclusion law, pair by pair, on a small heterogeneous vector.
  const auto w = WeightVector::from_values({6.0, 3.0, 2.0, 1.0, 0.5, 0.25});
  const double L = w.total();
  Rng rng(14);
  const int reps = 40000;
  std::vector<std::vector<int>> hits(6, std::vector<int>(6, 0));
  for (int r = 0; r < reps; ++r) {
    const auto g = generate_cl_fast(w, rng, EdgeMode::Materialize);
    for (const auto& e : *g.edges) ++hits[e.i][e.j];
  }
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i; j < 6; ++j) {
      const double p = std::min(w[i] * w[j] / L, 1.0);
      const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / reps);
      EXPECT_NEAR(static_cast<double>(hits[i][j]) / reps, p, 4.5 * se + 1e-12) << i << "," << j;
    }
}

TEST(PermuteLabels, IdentityLeavesGraphUnchanged) {
  Rng rng(15);
  const auto g = generate_nr_naive(WeightVector::from_values({3, 2, 1}), rng);
  const std::vector<std::size_t> id{0, 1, 2};
  const auto p = permute_labels(g, id);
  EXPECT_EQ(p.degrees, g.degrees);
  EXPECT_EQ(*p.edges, *g.edges);
  EXPECT_FALSE(p.ordered);
}

TEST(PermuteLabels, PreservesDegreeMultisetAndEdges) {
  Rng rng(16);
  const auto w = sample_weights(WeightDistribution::pareto(2, 1), 200, rng);
  const auto g = generate_nr_fast(w, rng, EdgeMode::Materialize);
  const auto p = permute_labels(g, rng);
  auto a = g.degrees, b = p.degrees;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  EXPECT_EQ(degrees_from_edges(p.n, *p.edges), p.degrees);
  EXPECT_EQ(p.non_loop_instances, g.non_loop_instances);
  EXPECT_THROW(permute_labels(generate_nr_fast(w, rng), rng), DomainError);
  EXPECT_THROW(permute_labels(g, std::vector<std::size_t>(200, 0)), DomainError);
}

TEST(PermuteLabels, MaxDegreeNodeIsUniform) {
  // Star-like fixed graph: node 0 has the unique maximum degree.
  GraphSample g;
  g.n = 8;
  g.edges = std::vector<Edge>{{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {4, 5, 1}};
  g.degrees = degrees_from_edges(g.n, *g.edges);
  g.non_loop_instances = 4;
  Rng rng(17);
  const int reps = 10000;
  std::vector<double> where(8, 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto p = permute_labels(g, rng);
    where[std::max_element(p.degrees.begin(), p.degrees.end()) - p.degrees.begin()] += 1.0;
  }
  EXPECT_GT(chi_square_gof(where, std::vector<double>(8, reps / 8.0)).p_value, 0.01);
}
