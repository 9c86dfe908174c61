#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfirg/errors.hpp"
#include "sfirg/random.hpp"
#include "sfirg/weights.hpp"

namespace sfirg {

enum class Model { NorrosReittu, ChungLu };

inline const char* to_string(Model m) { return m == Model::NorrosReittu ? "nr" : "cl"; }

inline Model parse_model(std::string_view s) {
  if (s == "nr" || s == "norros-reittu") return Model::NorrosReittu;
  if (s == "cl" || s == "chung-lu") return Model::ChungLu;
  throw ParseError("unknown model '" + std::string(s) + "' (expected nr or cl)");
}

// Unordered pair {i, j}, 0-based, i <= j. i == j is a loop.
struct Edge {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::uint64_t multiplicity = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class EdgeMode { DegreesOnly, Materialize };

// Node i (0-based) carries the (i+1)-th largest weight unless the sample has
// been relabeled. Degrees follow D_i = sum_j A_ij: a loop adds 1, not 2.
struct GraphSample {
  static constexpr bool loops_counted_once = true;

  Model model = Model::NorrosReittu;
  std::size_t n = 0;
  std::vector<std::uint64_t> degrees;
  std::optional<std::vector<Edge>> edges;
  std::uint64_t non_loop_instances = 0;
  std::uint64_t loop_instances = 0;
  double weight_total = 0.0;
  bool ordered = true;

  std::uint64_t edge_instances() const noexcept { return non_loop_instances + loop_instances; }
};

inline constexpr std::size_t kNaiveNodeCap = 4096;

namespace detail {

inline void check_naive_cap(std::size_t n, std::size_t cap) {
  if (n > cap)
    throw DomainError("naive O(n^2) generator refused for n=" + std::to_string(n) + " (cap " + std::to_string(cap) +
                      "); use the fast generator");
}

inline GraphSample empty_sample(Model model, const WeightVector& w) {
  if (w.size() == 0) throw DomainError("graph generation requires n >= 1");
  GraphSample g;
  g.model = model;
  g.n = w.size();
  g.degrees.assign(w.size(), 0);
  g.weight_total = w.total();
  return g;
}

inline void add_pair(GraphSample& g, std::vector<Edge>* edges, std::size_t i, std::size_t j, std::uint64_t mult) {
  if (mult == 0) return;
  if (i == j) {
    g.degrees[i] += mult;
    g.loop_instances += mult;
  } else {
    g.degrees[i] += mult;
    g.degrees[j] += mult;
    g.non_loop_instances += mult;
  }
  if (edges) edges->push_back({static_cast<std::uint32_t>(std::min(i, j)), static_cast<std::uint32_t>(std::max(i, j)), mult});
}

// Sorts by (i, j) and merges repeated pairs.
inline void canonicalize(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  std::size_t out = 0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (out > 0 && edges[out - 1].i == edges[k].i && edges[out - 1].j == edges[k].j)
      edges[out - 1].multiplicity += edges[k].multiplicity;
    else
      edges[out++] = edges[k];
  }
  edges.resize(out);
}

}  // namespace detail

// Reference Norros-Reittu sampler: one Poisson(W_i W_j / L) per pair i <= j.
inline GraphSample generate_nr_naive(const WeightVector& w, Rng& rng, std::size_t cap = kNaiveNodeCap) {
  detail::check_naive_cap(w.size(), cap);
  GraphSample g = detail::empty_sample(Model::NorrosReittu, w);
  std::vector<Edge> edges;
  const double L = w.total();
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = i; j < g.n; ++j) detail::add_pair(g, &edges, i, j, poisson(rng, w[i] * w[j] / L));
  g.edges = std::move(edges);
  return g;
}

// Norros-Reittu in expected O(n + m). Non-loop instances: N ~ Poisson of the
// total off-diagonal rate (L - S2/L)/2, each placed on {i, j} by two iid
// draws proportional to W, redrawn when i == j. Loops: Poisson(W_i^2/L)
// per node. Thinning makes the pair multiplicities exactly independent
// Poisson(W_i W_j / L).
inline GraphSample generate_nr_fast(const WeightVector& w, Rng& rng, EdgeMode mode = EdgeMode::DegreesOnly) {
  GraphSample g = detail::empty_sample(Model::NorrosReittu, w);
  std::vector<Edge> edges;
  std::vector<Edge>* sink = mode == EdgeMode::Materialize ? &edges : nullptr;
  const double L = w.total();

  for (std::size_t i = 0; i < g.n; ++i) detail::add_pair(g, sink, i, i, poisson(rng, w[i] * w[i] / L));

  if (g.n >= 2) {
    const double off_rate = 0.5 * (L - w.sum_of_squares() / L);
    const std::uint64_t count = poisson(rng, off_rate);
    if (count > 0) {
      const AliasTable table(w.sorted());
      if (sink) edges.reserve(edges.size() + count);
      for (std::uint64_t e = 0; e < count; ++e) {
        std::size_t a = table(rng);
        std::size_t b = table(rng);
        for (std::uint32_t tries = 0; a == b; ++tries) {
          if (tries >= 1'000'000) throw NumericError("Norros-Reittu pair sampling exceeded 10^6 redraws");
          a = table(rng);
          b = table(rng);
        }
        detail::add_pair(g, sink, a, b, 1);
      }
    }
  }
  if (sink) {
    detail::canonicalize(edges);
    g.edges = std::move(edges);
  }
  return g;
}

// Reference Chung-Lu sampler: Bernoulli(min(W_i W_j / L, 1)) per pair i <= j.
inline GraphSample generate_cl_naive(const WeightVector& w, Rng& rng, std::size_t cap = kNaiveNodeCap) {
  detail::check_naive_cap(w.size(), cap);
  GraphSample g = detail::empty_sample(Model::ChungLu, w);
  std::vector<Edge> edges;
  const double L = w.total();
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = i; j < g.n; ++j)
      if (bernoulli(rng, std::min(w[i] * w[j] / L, 1.0))) detail::add_pair(g, &edges, i, j, 1);
  g.edges = std::move(edges);
  return g;
}

// Chung-Lu in expected O(n + m) by geometric skipping (Miller-Hagberg).
// Weights are descending, so for fixed i the pair probability is
// non-increasing in j and the last evaluated probability bounds every
// candidate skipped over; visited candidates are kept with ratio q / p.
inline GraphSample generate_cl_fast(const WeightVector& w, Rng& rng, EdgeMode mode = EdgeMode::DegreesOnly) {
  GraphSample g = detail::empty_sample(Model::ChungLu, w);
  std::vector<Edge> edges;
  std::vector<Edge>* sink = mode == EdgeMode::Materialize ? &edges : nullptr;
  const double L = w.total();
  const std::size_t n = g.n;

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i;
    double p = std::min(w[i] * w[j] / L, 1.0);
    while (j < n && p > 0.0) {
      if (p < 1.0) {
        const double skip = std::floor(std::log(uniform_open_closed(rng)) / std::log1p(-p));
        if (skip >= static_cast<double>(n - j)) break;
        j += static_cast<std::size_t>(skip);
      }
      const double q = std::min(w[i] * w[j] / L, 1.0);
      if (uniform_closed_open(rng) * p < q) detail::add_pair(g, sink, i, j, 1);
      p = q;
      ++j;
    }
  }
  if (sink) g.edges = std::move(edges);
  return g;
}

// D_i from an edge list: non-loop instances count once per endpoint, loops once.
inline std::vector<std::uint64_t> degrees_from_edges(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::uint64_t> d(n, 0);
  for (const Edge& e : edges) {
    if (e.i >= n || e.j >= n) throw DomainError("edge endpoint out of range");
    d[e.i] += e.multiplicity;
    if (e.i != e.j) d[e.j] += e.multiplicity;
  }
  return d;
}

inline std::vector<std::uint64_t> degrees(const GraphSample& g) {
  if (g.edges) return degrees_from_edges(g.n, *g.edges);
  return g.degrees;
}

// Relabels so new node i is old node perm[i]: A~_ij = A_{perm[i], perm[j]}.
inline GraphSample permute_labels(const GraphSample& g, std::span<const std::size_t> perm) {
  if (!g.edges) throw DomainError("permute_labels requires materialized edges");
  if (perm.size() != g.n) throw DomainError("permutation size does not match node count");
  std::vector<std::size_t> inverse(g.n, g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    if (perm[i] >= g.n || inverse[perm[i]] != g.n) throw DomainError("not a permutation");
    inverse[perm[i]] = i;
  }
  GraphSample out = g;
  out.ordered = false;
  for (std::size_t i = 0; i < g.n; ++i) out.degrees[i] = g.degrees[perm[i]];
  for (Edge& e : *out.edges) {
    const auto a = static_cast<std::uint32_t>(inverse[e.i]);
    const auto b = static_cast<std::uint32_t>(inverse[e.j]);
    e.i = std::min(a, b);
    e.j = std::max(a, b);
  }
  detail::canonicalize(*out.edges);
  return out;
}

inline GraphSample permute_labels(const GraphSample& g, Rng& rng) {
  std::vector<std::size_t> perm(g.n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return permute_labels(g, perm);
}

enum class Generator { Fast, Naive };

inline GraphSample generate(Model model, Generator gen, const WeightVector& w, Rng& rng,
                            EdgeMode mode = EdgeMode::DegreesOnly) {
  if (gen == Generator::Naive) {
    GraphSample g = model == Model::NorrosReittu ? generate_nr_naive(w, rng) : generate_cl_naive(w, rng);
    if (mode == EdgeMode::DegreesOnly) g.edges.reset();
    return g;
  }
  return model == Model::NorrosReittu ? generate_nr_fast(w, rng, mode) : generate_cl_fast(w, rng, mode);
}

}  // namespace sfirg
