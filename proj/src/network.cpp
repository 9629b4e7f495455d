#include "kinetica/network.hpp"

#include <cfenv>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

namespace kinetica {

std::string_view to_string(ReactionKind kind) {
  switch (kind) {
    case ReactionKind::bulk:
      return "bulk";
    case ReactionKind::input:
      return "input";
    case ReactionKind::output:
      return "output";
  }
  return "bulk";
}

int Reaction::order() const { return std::accumulate(d_minus.begin(), d_minus.end(), 0); }

std::vector<int> Reaction::net_change() const {
  std::vector<int> d(d_minus.size());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = d_plus[v] - d_minus[v];
  return d;
}

namespace {

bool is_unit_vector(const std::vector<int>& d) {
  int total = 0;
  for (int x : d) {
    if (x != 0 && x != 1) return false;
    total += x;
  }
  return total == 1;
}

bool is_zero(const std::vector<int>& d) {
  for (int x : d)
    if (x != 0) return false;
  return true;
}

}  // namespace

Reaction make_reaction(std::vector<int> d_minus, std::vector<int> d_plus, double rate) {
  Reaction r{std::move(d_minus), std::move(d_plus), rate, ReactionKind::bulk};
  if (is_zero(r.d_minus) && is_unit_vector(r.d_plus))
    r.kind = ReactionKind::input;
  else if (is_zero(r.d_plus) && is_unit_vector(r.d_minus))
    r.kind = ReactionKind::output;
  return r;
}

ReactionNetwork::ReactionNetwork(std::vector<Species> species, std::vector<Reaction> reactions,
                                 std::vector<InversePair> inverse_pairs,
                                 std::vector<std::string> atom_types)
    : species_(std::move(species)),
      reactions_(std::move(reactions)),
      inverse_pairs_(std::move(inverse_pairs)),
      atom_types_(std::move(atom_types)) {
  const std::size_t V = species_.size();
  std::set<std::string> names;
  for (const auto& s : species_) {
    if (s.name.empty()) throw ValidationError("species name must not be empty");
    if (!names.insert(s.name).second)
      throw ValidationError(fmt::format("duplicate species name '{}'", s.name));
    if (s.atom_counts) {
      if (s.atom_counts->size() != atom_types_.size())
        throw ValidationError(
            fmt::format("species '{}' has {} atom counts, expected {}", s.name,
                        s.atom_counts->size(), atom_types_.size()));
      for (int k : *s.atom_counts)
        if (k < 0) throw ValidationError(fmt::format("negative atom count for '{}'", s.name));
    }
  }
  for (std::size_t r = 0; r < reactions_.size(); ++r) {
    const auto& rx = reactions_[r];
    if (rx.d_minus.size() != V || rx.d_plus.size() != V)
      throw ValidationError(fmt::format("reaction {} has stoichiometry of wrong length", r));
    for (std::size_t v = 0; v < V; ++v)
      if (rx.d_minus[v] < 0 || rx.d_plus[v] < 0)
        throw ValidationError(fmt::format("reaction {} has a negative coefficient", r));
    if (!(rx.rate > 0.0) || !std::isfinite(rx.rate))
      throw ValidationError(fmt::format("reaction {} has non-positive rate {}", r, rx.rate));
    switch (rx.kind) {
      case ReactionKind::bulk:
        if (is_zero(rx.d_minus) && is_zero(rx.d_plus))
          throw ValidationError(fmt::format("reaction {} is empty on both sides", r));
        break;
      case ReactionKind::input:
        if (!is_zero(rx.d_minus) || !is_unit_vector(rx.d_plus))
          throw ValidationError(fmt::format("reaction {} is not a valid input", r));
        break;
      case ReactionKind::output:
        if (!is_zero(rx.d_plus) || !is_unit_vector(rx.d_minus))
          throw ValidationError(fmt::format("reaction {} is not a valid output", r));
        break;
    }
  }
  inverse_of_.assign(reactions_.size(), std::nullopt);
  for (const auto& [r, s] : inverse_pairs_) {
    if (r >= reactions_.size() || s >= reactions_.size() || r == s)
      throw ValidationError(fmt::format("invalid inverse pair ({}, {})", r, s));
    if (inverse_of_[r] || inverse_of_[s])
      throw ValidationError(fmt::format("reaction in more than one inverse pair ({}, {})", r, s));
    if (reactions_[r].d_minus != reactions_[s].d_plus ||
        reactions_[r].d_plus != reactions_[s].d_minus)
      throw ValidationError(
          fmt::format("reactions {} and {} are declared inverse but are not swapped", r, s));
    inverse_of_[r] = s;
    inverse_of_[s] = r;
  }
}

std::optional<std::size_t> ReactionNetwork::inverse_of(std::size_t r) const {
  return inverse_of_.at(r);
}

std::optional<std::size_t> ReactionNetwork::species_index(std::string_view name) const {
  for (std::size_t v = 0; v < species_.size(); ++v)
    if (species_[v].name == name) return v;
  return std::nullopt;
}

std::vector<std::string> ReactionNetwork::species_names() const {
  std::vector<std::string> out;
  out.reserve(species_.size());
  for (const auto& s : species_) out.push_back(s.name);
  return out;
}

bool ReactionNetwork::is_closed() const {
  for (const auto& r : reactions_)
    if (r.kind != ReactionKind::bulk) return false;
  return true;
}

std::string ReactionNetwork::complex_label(const std::vector<int>& complex) const {
  std::string out;
  for (std::size_t v = 0; v < complex.size() && v < species_.size(); ++v) {
    if (complex[v] == 0) continue;
    if (!out.empty()) out += " + ";
    if (complex[v] != 1) out += fmt::format("{} ", complex[v]);
    out += species_[v].name;
  }
  return out.empty() ? "0" : out;
}

std::string ReactionNetwork::reaction_label(std::size_t r) const {
  const auto& rx = reactions_.at(r);
  return complex_label(rx.d_minus) + " -> " + complex_label(rx.d_plus);
}

ReactionNetwork with_inferred_inverse_pairs(const ReactionNetwork& network) {
  auto pairs = network.inverse_pairs();
  std::vector<bool> used(network.reaction_count(), false);
  for (const auto& [r, s] : pairs) used[r] = used[s] = true;
  const auto& rx = network.reactions();
  for (std::size_t r = 0; r < rx.size(); ++r) {
    if (used[r]) continue;
    for (std::size_t s = r + 1; s < rx.size(); ++s) {
      if (used[s]) continue;
      if (rx[r].d_minus == rx[s].d_plus && rx[r].d_plus == rx[s].d_minus && !rx[r].is_null()) {
        pairs.emplace_back(r, s);
        used[r] = used[s] = true;
        break;
      }
    }
  }
  return ReactionNetwork(network.species(), network.reactions(), pairs, network.atom_types());
}

void validate_state(const ReactionNetwork& network, const State& state) {
  if (state.counts.size() != network.species_count())
    throw ValidationError("state has wrong number of species");
  if (!(state.scale > 0.0) || !std::isfinite(state.scale))
    throw ValidationError("state scale M must be positive");
  for (auto n : state.counts)
    if (n < 0) throw ValidationError("state counts must be non-negative");
}

void validate_concentrations(const ReactionNetwork& network, const Concentrations& c) {
  if (c.size() != network.species_count())
    throw ValidationError("concentration vector has wrong length");
  for (double x : c)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw ValidationError("concentrations must be non-negative and finite");
}

double falling_factorial(std::int64_t n, int k) {
  if (k > n) return 0.0;
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= static_cast<double>(n - i);
  return p;
}

double propensity(const ReactionNetwork& network, std::size_t reaction_index,
                  const State& state) {
  const auto& rx = network.reaction(reaction_index);
  double p = rx.rate * std::pow(state.scale, 1 - rx.order());
  for (std::size_t v = 0; v < rx.d_minus.size(); ++v) {
    const int d = rx.d_minus[v];
    if (d == 0) continue;
    const double ff = falling_factorial(state.counts[v], d);
    if (ff == 0.0) return 0.0;
    p *= ff;
  }
  return p;
}

double mass_action_flux(const Reaction& reaction, const Concentrations& c) {
  double p = reaction.rate;
  for (std::size_t v = 0; v < reaction.d_minus.size(); ++v) {
    const int d = reaction.d_minus[v];
    if (d == 0) continue;
    p *= d == 1 ? c[v] : std::pow(c[v], d);
  }
  return p;
}

std::vector<double> ode_rhs(const ReactionNetwork& network, const Concentrations& c) {
  const std::size_t V = network.species_count();
  std::vector<double> f(V, 0.0);
  for (const auto& rx : network.reactions()) {
    const double flux = mass_action_flux(rx, c);
    if (flux == 0.0) continue;
    // Production and consumption sums are applied separately, so species on
    // both sides of a reaction receive both contributions.
    for (std::size_t v = 0; v < V; ++v) {
      if (rx.d_plus[v] != 0) f[v] += rx.d_plus[v] * flux;
      if (rx.d_minus[v] != 0) f[v] -= rx.d_minus[v] * flux;
    }
  }
  return f;
}

std::vector<double> ode_jacobian(const ReactionNetwork& network, const Concentrations& c) {
  const std::size_t V = network.species_count();
  std::vector<double> jac(V * V, 0.0);
  for (const auto& rx : network.reactions()) {
    for (std::size_t u = 0; u < V; ++u) {
      const int du = rx.d_minus[u];
      if (du == 0) continue;
      double partial = rx.rate * du * (du == 1 ? 1.0 : std::pow(c[u], du - 1));
      for (std::size_t w = 0; w < V; ++w) {
        if (w == u || rx.d_minus[w] == 0) continue;
        partial *= std::pow(c[w], rx.d_minus[w]);
      }
      if (partial == 0.0) continue;
      for (std::size_t v = 0; v < V; ++v) {
        const int net = rx.d_plus[v] - rx.d_minus[v];
        if (net != 0) jac[v * V + u] += net * partial;
      }
    }
  }
  return jac;
}

State state_from_concentrations(const Concentrations& c, double scale) {
  State s;
  s.scale = scale;
  s.counts.reserve(c.size());
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  for (double x : c) s.counts.push_back(static_cast<std::int64_t>(std::nearbyint(x * scale)));
  std::fesetround(saved);
  return s;
}

}  // namespace kinetica
