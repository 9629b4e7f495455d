#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kinetica/network.hpp"

namespace kinetica {

struct ReducedNetwork {
  ReactionNetwork network;
  /// kept_species[i] is the original index of reduced species i.
  std::vector<std::size_t> kept_species;
  /// Original indices of reactions dropped because they only involve clamped species.
  std::vector<std::size_t> dropped_reactions;
  std::vector<std::string> warnings;
};

/// Holds the species in `clamped` at the fixed concentrations `fixed_values`
/// (same order) and folds them into the rate constants of the remaining
/// reactions: a_r <- a_r prod_{v in W} c_v^{d_minus(v,r)}.
ReducedNetwork clamp_species(const ReactionNetwork& network, const std::vector<std::size_t>& clamped,
                             const std::vector<double>& fixed_values);

struct TransportChannel {
  std::string species;
  double rate_12 = 0.0;
  double rate_21 = 0.0;
};

/// Disjoint union of two networks (species renamed `<name>.1` and `<name>.2`)
/// plus, per channel, the unary inverse pair v.1 -> v.2 / v.2 -> v.1.
ReactionNetwork join_with_transport(const ReactionNetwork& first, const ReactionNetwork& second,
                                    const std::vector<TransportChannel>& channels);

/// Aggregation-fragmentation model on cluster sizes 1..max_size.
/// `b` has max_size entries and `attach_rates` has max_size - 1. Monomer
/// attachment n -> n+1 runs at attach_rates[n-1] and detachment at
/// attach_rates[n-1] * b_1 * b_n / b_{n+1}, which makes b a detailed-balance
/// parameter vector by construction.
ReactionNetwork cluster_network(int max_size, const std::vector<double>& b,
                                const std::vector<double>& attach_rates);

/// Single-species network with the reactions 0 -> X, X -> 0, 2X -> 3X and
/// 3X -> 2X; reactions with zero rate are omitted.
ReactionNetwork schloegl_network(double a01, double a10, double a23, double a32);

}  // namespace kinetica
