#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "kinetica/markov_chain.hpp"

namespace kinetica::testing {

/// Brute-force reversibility verdict: every edge is two-way and every simple
/// cycle of the undirected support graph has forward and backward rate
/// products that agree. Returns nullopt when more than `cycle_cap` cycles exist
/// or the search visits more than 50 * `cycle_cap` paths.
inline std::optional<bool> reversible_by_cycle_enumeration(const FiniteChain& chain, double tol = 1e-9,
                                                           std::size_t cycle_cap = 2'000'000) {
  const std::size_t n = chain.size();
  const auto adj = chain.undirected_adjacency();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : adj[i])
      if (!(chain.rate(i, j) > 0.0 && chain.rate(j, i) > 0.0)) return false;

  std::size_t cycles = 0, steps = 0;
  const std::size_t step_cap = 50 * cycle_cap;
  bool balanced = true;
  std::vector<bool> on_path(n, false);
  // Simple cycles whose smallest vertex is `start`; each is met once per orientation.
  std::function<bool(std::size_t, std::size_t, std::size_t, double)> walk =
      [&](std::size_t start, std::size_t u, std::size_t depth, double log_ratio) -> bool {
    for (std::size_t w : adj[u]) {
      if (w == start && depth >= 3) {
        if (++cycles > cycle_cap) return false;
        const double closing = log_ratio + std::log(chain.rate(u, w)) - std::log(chain.rate(w, u));
        if (std::abs(closing) > tol) balanced = false;
        continue;
      }
      if (w <= start || on_path[w]) continue;
      if (++steps > step_cap) return false;
      on_path[w] = true;
      const bool ok = walk(start, w, depth + 1,
                           log_ratio + std::log(chain.rate(u, w)) - std::log(chain.rate(w, u)));
      on_path[w] = false;
      if (!ok) return false;
    }
    return true;
  };
  for (std::size_t s = 0; s < n; ++s) {
    on_path[s] = true;
    const bool ok = walk(s, s, 1, 0.0);
    on_path[s] = false;
    if (!ok) return std::nullopt;
  }
  return balanced;
}

/// Random connected chain on `n` states: a random spanning tree plus `extra`
/// chords. Rates come from a potential (so the chain is reversible) unless
/// `perturb` is set, in which case one chord rate is scaled by a factor in
/// [1.5, 4]; `one_way` drops a reverse rate instead. Perturbing a tree edge
/// (extra == 0) leaves the chain reversible.
inline FiniteChain random_chain(std::mt19937_64& rng, std::size_t n, std::size_t extra, bool perturb,
                                bool one_way) {
  FiniteChain chain(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> pi(n);
  for (auto& p : pi) p = std::exp(4.0 * unit(rng) - 2.0);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    edges.emplace_back(parent(rng), i);
  }
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  std::size_t chords = 0;
  for (int attempt = 0; chords < extra && attempt < 100000; ++attempt) {
    const std::size_t i = any(rng), j = any(rng);
    if (i == j) continue;
    bool dup = false;
    for (const auto& [a, b] : edges) dup = dup || (a == i && b == j) || (a == j && b == i);
    if (dup) continue;
    edges.emplace_back(i, j);
    ++chords;
  }
  for (const auto& [i, j] : edges) {
    // pi_i q_ij = pi_j q_ji = w
    const double w = 0.1 + unit(rng);
    chain.add_rate(i, j, w / pi[i]);
    chain.add_rate(j, i, w / pi[j]);
  }
  if (n > 1 && (perturb || one_way)) {
    const auto [i, j] = edges.back();
    if (one_way) {
      FiniteChain copy(n);
      for (std::size_t a = 0; a < n; ++a)
        for (const auto& [b, r] : chain.out_edges(a))
          if (!(a == j && b == i)) copy.add_rate(a, b, r);
      return copy;
    }
    // add_rate accumulates, so the rate grows by a factor in [1.5, 4].
    chain.add_rate(i, j, chain.rate(i, j) * (0.5 + 2.5 * unit(rng)));
  }
  return chain;
}

}  // namespace kinetica::testing
