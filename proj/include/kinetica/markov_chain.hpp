#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "kinetica/network.hpp"

namespace kinetica {

inline constexpr std::size_t kDefaultStateCap = 200000;

/// Finite continuous-time Markov chain given by its off-diagonal rates.
class FiniteChain {
 public:
  explicit FiniteChain(std::size_t size = 0) : out_(size) {}

  std::size_t size() const { return out_.size(); }
  /// Adds `rate` to the i -> j transition; self-loops are ignored.
  void add_rate(std::size_t i, std::size_t j, double rate);
  double rate(std::size_t i, std::size_t j) const;
  const std::map<std::size_t, double>& out_edges(std::size_t i) const { return out_.at(i); }

  /// Neighbours of i in the undirected support graph, sorted.
  std::vector<std::vector<std::size_t>> undirected_adjacency() const;

 private:
  std::vector<std::map<std::size_t, double>> out_;
};

/// Axis-aligned box lower <= n <= upper of states at scale M.
struct StateBox {
  std::vector<std::int64_t> lower;
  std::vector<std::int64_t> upper;
  double scale = 1.0;

  std::size_t state_count() const;
  State state_at(std::size_t index) const;
  std::size_t index_of(const std::vector<std::int64_t>& counts) const;
  bool contains(const std::vector<std::int64_t>& counts) const;
};

/// Restricts the jump process of `network` to `box`; jumps leaving the box
/// are dropped and reactions mapping onto the same target are summed.
FiniteChain truncate_chain(const ReactionNetwork& network, const StateBox& box,
                           std::size_t state_cap = kDefaultStateCap);

}  // namespace kinetica
