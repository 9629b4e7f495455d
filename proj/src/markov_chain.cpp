#include "kinetica/markov_chain.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace kinetica {

void FiniteChain::add_rate(std::size_t i, std::size_t j, double rate) {
  if (i >= size() || j >= size()) throw std::out_of_range("chain state index out of range");
  if (i == j || rate == 0.0) return;
  out_[i][j] += rate;
}

double FiniteChain::rate(std::size_t i, std::size_t j) const {
  const auto& row = out_.at(i);
  auto it = row.find(j);
  return it == row.end() ? 0.0 : it->second;
}

std::vector<std::vector<std::size_t>> FiniteChain::undirected_adjacency() const {
  std::vector<std::set<std::size_t>> adj(size());
  for (std::size_t i = 0; i < size(); ++i)
    for (const auto& [j, rate] : out_[i]) {
      adj[i].insert(j);
      adj[j].insert(i);
    }
  std::vector<std::vector<std::size_t>> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i].assign(adj[i].begin(), adj[i].end());
  return out;
}

std::size_t StateBox::state_count() const {
  if (lower.size() != upper.size()) throw ValidationError("state box bounds differ in length");
  std::size_t n = 1;
  for (std::size_t v = 0; v < lower.size(); ++v) {
    if (lower[v] < 0 || upper[v] < lower[v]) throw ValidationError("invalid state box bounds");
    const auto extent = static_cast<std::size_t>(upper[v] - lower[v] + 1);
    if (n > SIZE_MAX / extent) throw ValidationError("state box too large");
    n *= extent;
  }
  return n;
}

State StateBox::state_at(std::size_t index) const {
  State s;
  s.scale = scale;
  s.counts.resize(lower.size());
  for (std::size_t v = 0; v < lower.size(); ++v) {
    const auto extent = static_cast<std::size_t>(upper[v] - lower[v] + 1);
    s.counts[v] = lower[v] + static_cast<std::int64_t>(index % extent);
    index /= extent;
  }
  return s;
}

bool StateBox::contains(const std::vector<std::int64_t>& counts) const {
  for (std::size_t v = 0; v < lower.size(); ++v)
    if (counts[v] < lower[v] || counts[v] > upper[v]) return false;
  return true;
}

std::size_t StateBox::index_of(const std::vector<std::int64_t>& counts) const {
  std::size_t index = 0;
  std::size_t stride = 1;
  for (std::size_t v = 0; v < lower.size(); ++v) {
    index += static_cast<std::size_t>(counts[v] - lower[v]) * stride;
    stride *= static_cast<std::size_t>(upper[v] - lower[v] + 1);
  }
  return index;
}

FiniteChain truncate_chain(const ReactionNetwork& network, const StateBox& box,
                           std::size_t state_cap) {
  if (box.lower.size() != network.species_count())
    throw ValidationError("state box dimension differs from species count");
  const std::size_t n = box.state_count();
  if (n > state_cap)
    throw ValidationError(fmt::format("state box has {} states, above the cap of {}", n, state_cap));
  FiniteChain chain(n);
  std::vector<std::int64_t> target(network.species_count());
  for (std::size_t i = 0; i < n; ++i) {
    const State s = box.state_at(i);
    for (std::size_t r = 0; r < network.reaction_count(); ++r) {
      const auto& rx = network.reaction(r);
      if (rx.is_null()) continue;
      const double rate = propensity(network, r, s);
      if (rate == 0.0) continue;
      for (std::size_t v = 0; v < target.size(); ++v)
        target[v] = s.counts[v] - rx.d_minus[v] + rx.d_plus[v];
      if (!box.contains(target)) continue;
      chain.add_rate(i, box.index_of(target), rate);
    }
  }
  return chain;
}

}  // namespace kinetica
