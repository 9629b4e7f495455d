#include "kinetica/transform.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>

namespace kinetica {

ReducedNetwork clamp_species(const ReactionNetwork& network, const std::vector<std::size_t>& clamped,
                             const std::vector<double>& fixed_values) {
  const std::size_t V = network.species_count();
  if (clamped.size() != fixed_values.size())
    throw ValidationError("clamped species and fixed values differ in length");
  std::vector<double> fixed(V, 0.0);
  std::vector<bool> is_clamped(V, false);
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    const auto v = clamped[i];
    if (v >= V) throw ValidationError(fmt::format("clamped species index {} out of range", v));
    if (is_clamped[v]) throw ValidationError(fmt::format("species {} clamped twice", v));
    if (!(fixed_values[i] > 0.0) || !std::isfinite(fixed_values[i]))
      throw ValidationError(fmt::format("fixed value for '{}' must be positive",
                                        network.species()[v].name));
    is_clamped[v] = true;
    fixed[v] = fixed_values[i];
  }
  if (V > 0 && clamped.size() == V) throw ValidationError("cannot clamp every species");

  ReducedNetwork out;
  std::vector<std::size_t> new_index(V, 0);
  std::vector<Species> species;
  for (std::size_t v = 0; v < V; ++v) {
    if (is_clamped[v]) continue;
    new_index[v] = species.size();
    out.kept_species.push_back(v);
    species.push_back(network.species()[v]);
  }

  std::vector<Reaction> reactions;
  std::vector<std::optional<std::size_t>> mapped(network.reaction_count());
  for (std::size_t r = 0; r < network.reaction_count(); ++r) {
    const auto& rx = network.reaction(r);
    std::vector<int> dm(species.size(), 0), dp(species.size(), 0);
    double rate = rx.rate;
    bool touches_free = false;
    for (std::size_t v = 0; v < V; ++v) {
      if (is_clamped[v]) {
        if (rx.d_minus[v] > 0) rate *= std::pow(fixed[v], rx.d_minus[v]);
        continue;
      }
      dm[new_index[v]] = rx.d_minus[v];
      dp[new_index[v]] = rx.d_plus[v];
      touches_free = touches_free || rx.d_minus[v] != 0 || rx.d_plus[v] != 0;
    }
    if (!touches_free) {
      out.dropped_reactions.push_back(r);
      out.warnings.push_back(
          fmt::format("dropped reaction {} ({}): it involves only clamped species", r,
                      network.reaction_label(r)));
      continue;
    }
    mapped[r] = reactions.size();
    reactions.push_back(make_reaction(std::move(dm), std::move(dp), rate));
  }
  if (reactions.empty()) throw ValidationError("clamping leaves no reactions");

  std::vector<InversePair> pairs;
  for (const auto& [r, s] : network.inverse_pairs())
    if (mapped[r] && mapped[s]) pairs.emplace_back(*mapped[r], *mapped[s]);

  out.network = ReactionNetwork(std::move(species), std::move(reactions), std::move(pairs),
                                network.atom_types());
  return out;
}

ReactionNetwork join_with_transport(const ReactionNetwork& first, const ReactionNetwork& second,
                                    const std::vector<TransportChannel>& channels) {
  const std::size_t V1 = first.species_count();
  const std::size_t V = V1 + second.species_count();

  std::vector<std::string> atom_types = first.atom_types();
  std::map<std::string, std::size_t> atom_index;
  for (std::size_t b = 0; b < atom_types.size(); ++b) atom_index[atom_types[b]] = b;
  for (const auto& a : second.atom_types())
    if (atom_index.emplace(a, atom_types.size()).second) atom_types.push_back(a);

  std::vector<Species> species;
  auto append_species = [&](const ReactionNetwork& net, const char* suffix) {
    for (const auto& s : net.species()) {
      Species copy{s.name + suffix, std::nullopt};
      if (s.atom_counts) {
        copy.atom_counts = std::vector<int>(atom_types.size(), 0);
        for (std::size_t b = 0; b < net.atom_types().size(); ++b)
          (*copy.atom_counts)[atom_index.at(net.atom_types()[b])] = (*s.atom_counts)[b];
      }
      species.push_back(std::move(copy));
    }
  };
  append_species(first, ".1");
  append_species(second, ".2");

  std::vector<Reaction> reactions;
  std::vector<InversePair> pairs;
  auto append_reactions = [&](const ReactionNetwork& net, std::size_t offset) {
    const std::size_t base = reactions.size();
    for (const auto& rx : net.reactions()) {
      std::vector<int> dm(V, 0), dp(V, 0);
      for (std::size_t v = 0; v < net.species_count(); ++v) {
        dm[offset + v] = rx.d_minus[v];
        dp[offset + v] = rx.d_plus[v];
      }
      reactions.push_back(make_reaction(std::move(dm), std::move(dp), rx.rate));
    }
    for (const auto& [r, s] : net.inverse_pairs()) pairs.emplace_back(base + r, base + s);
  };
  append_reactions(first, 0);
  append_reactions(second, V1);

  for (const auto& ch : channels) {
    const auto i1 = first.species_index(ch.species);
    const auto i2 = second.species_index(ch.species);
    if (!i1 || !i2)
      throw ValidationError(
          fmt::format("transport channel species '{}' is missing from a network", ch.species));
    std::vector<int> at1(V, 0), at2(V, 0);
    at1[*i1] = 1;
    at2[V1 + *i2] = 1;
    reactions.push_back(make_reaction(at1, at2, ch.rate_12));
    reactions.push_back(make_reaction(at2, at1, ch.rate_21));
    pairs.emplace_back(reactions.size() - 2, reactions.size() - 1);
  }
  return ReactionNetwork(std::move(species), std::move(reactions), std::move(pairs),
                         std::move(atom_types));
}

ReactionNetwork cluster_network(int max_size, const std::vector<double>& b,
                                const std::vector<double>& attach_rates) {
  if (max_size < 2) throw ValidationError("cluster network needs max_size >= 2");
  const auto V = static_cast<std::size_t>(max_size);
  if (b.size() != V) throw ValidationError("cluster network needs one b per cluster size");
  if (attach_rates.size() != V - 1)
    throw ValidationError("cluster network needs max_size - 1 attachment rates");
  for (double x : b)
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError("b must be positive");

  std::vector<Species> species(V);
  for (std::size_t v = 0; v < V; ++v) {
    species[v].name = fmt::format("m{}", v + 1);
    species[v].atom_counts = std::vector<int>{static_cast<int>(v + 1)};
  }
  std::vector<Reaction> reactions;
  std::vector<InversePair> pairs;
  for (std::size_t n = 1; n < V; ++n) {
    // monomer + cluster of size n -> cluster of size n+1 (sizes are 1-based)
    std::vector<int> dm(V, 0), dp(V, 0);
    dm[0] += 1;
    dm[n - 1] += 1;
    dp[n] = 1;
    const double attach = attach_rates[n - 1];
    const double detach = attach * b[0] * b[n - 1] / b[n];
    reactions.push_back(make_reaction(dm, dp, attach));
    reactions.push_back(make_reaction(dp, dm, detach));
    pairs.emplace_back(reactions.size() - 2, reactions.size() - 1);
  }
  return ReactionNetwork(std::move(species), std::move(reactions), std::move(pairs), {"atom"});
}

ReactionNetwork schloegl_network(double a01, double a10, double a23, double a32) {
  std::vector<Reaction> reactions;
  std::vector<InversePair> pairs;
  auto add_pair = [&](int lo, int hi, double forward, double backward) {
    const std::size_t before = reactions.size();
    if (forward > 0.0) reactions.push_back(make_reaction({lo}, {hi}, forward));
    if (backward > 0.0) reactions.push_back(make_reaction({hi}, {lo}, backward));
    if (reactions.size() == before + 2) pairs.emplace_back(before, before + 1);
  };
  add_pair(0, 1, a01, a10);
  add_pair(2, 3, a23, a32);
  return ReactionNetwork({Species{"X", std::nullopt}}, std::move(reactions), std::move(pairs));
}

}  // namespace kinetica
