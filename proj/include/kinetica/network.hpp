#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kinetica {

/// Thrown when a network, state or parameter vector violates its invariants.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ReactionKind { bulk, input, output };

std::string_view to_string(ReactionKind kind);

struct Species {
  std::string name;
  /// Atoms of each network-wide atom type contained in one molecule.
  std::optional<std::vector<int>> atom_counts;

  bool operator==(const Species&) const = default;
};

/// One mass-action reaction  sum_v d_minus[v] A_v -> sum_v d_plus[v] A_v.
struct Reaction {
  std::vector<int> d_minus;
  std::vector<int> d_plus;
  double rate = 0.0;
  ReactionKind kind = ReactionKind::bulk;

  /// Total substrate multiplicity m_-(r).
  int order() const;
  /// d_plus - d_minus.
  std::vector<int> net_change() const;
  /// True when d_minus == d_plus; such a reaction never changes the state.
  bool is_null() const { return d_minus == d_plus; }

  bool operator==(const Reaction&) const = default;
};

/// Builds a reaction and classifies it: an empty substrate complex with a
/// single product molecule is an input, the mirror image an output.
Reaction make_reaction(std::vector<int> d_minus, std::vector<int> d_plus, double rate);

using InversePair = std::pair<std::size_t, std::size_t>;

/// Immutable reaction network. Construction validates every invariant, so a
/// constructed network can be shared freely between threads.
class ReactionNetwork {
 public:
  ReactionNetwork() = default;
  ReactionNetwork(std::vector<Species> species, std::vector<Reaction> reactions,
                  std::vector<InversePair> inverse_pairs = {},
                  std::vector<std::string> atom_types = {});

  std::size_t species_count() const { return species_.size(); }
  std::size_t reaction_count() const { return reactions_.size(); }

  const std::vector<Species>& species() const { return species_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  const Reaction& reaction(std::size_t r) const { return reactions_.at(r); }
  const std::vector<InversePair>& inverse_pairs() const { return inverse_pairs_; }
  const std::vector<std::string>& atom_types() const { return atom_types_; }

  std::optional<std::size_t> inverse_of(std::size_t r) const;
  std::optional<std::size_t> species_index(std::string_view name) const;
  std::vector<std::string> species_names() const;

  /// A network is closed when it has no input or output reactions.
  bool is_closed() const;

  /// "2 X + Y" style label of a complex; "0" for the empty complex.
  std::string complex_label(const std::vector<int>& complex) const;
  std::string reaction_label(std::size_t r) const;

  bool operator==(const ReactionNetwork&) const = default;

 private:
  std::vector<Species> species_;
  std::vector<Reaction> reactions_;
  std::vector<InversePair> inverse_pairs_;
  std::vector<std::string> atom_types_;
  std::vector<std::optional<std::size_t>> inverse_of_;
};

/// Pairs every reaction lacking a declared inverse with the first later
/// unpaired reaction whose complexes are swapped.
ReactionNetwork with_inferred_inverse_pairs(const ReactionNetwork& network);

/// Molecule counts n_v together with the volume scale M.
struct State {
  std::vector<std::int64_t> counts;
  double scale = 1.0;

  bool operator==(const State&) const = default;
};

void validate_state(const ReactionNetwork& network, const State& state);

using Concentrations = std::vector<double>;

void validate_concentrations(const ReactionNetwork& network, const Concentrations& c);

/// n (n-1) ... (n-k+1) as a double; zero when k > n.
double falling_factorial(std::int64_t n, int k);

/// Jump rate of reaction r at state n under the canonical M-scaling.
double propensity(const ReactionNetwork& network, std::size_t reaction_index,
                  const State& state);

/// a_r prod_w c_w^{d_minus(w,r)}
double mass_action_flux(const Reaction& reaction, const Concentrations& c);

/// Right-hand side of the mean-field kinetic equations.
std::vector<double> ode_rhs(const ReactionNetwork& network, const Concentrations& c);

/// Row-major V x V Jacobian of ode_rhs, evaluated analytically.
std::vector<double> ode_jacobian(const ReactionNetwork& network, const Concentrations& c);

/// round(M c_v) with ties to even.
State state_from_concentrations(const Concentrations& c, double scale);

}  // namespace kinetica
