#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kinetica/markov_chain.hpp"
#include "kinetica/network.hpp"

namespace kinetica {

inline constexpr double kDefaultTolerance = 1e-9;

/// Positive parameter vector b of the product-Poisson measure with means M b_v.
class PoissonParams {
 public:
  PoissonParams() = default;
  explicit PoissonParams(std::vector<double> b);

  const std::vector<double>& values() const { return b_; }
  std::size_t size() const { return b_.size(); }
  double operator[](std::size_t v) const { return b_[v]; }

 private:
  std::vector<double> b_;
};

enum class ReversibilityStatus { holds, fails, inconsistent };

std::string to_string(ReversibilityStatus status);

struct Residual {
  std::string id;
  double value = 0.0;
};

struct ReversibilityReport {
  ReversibilityStatus status = ReversibilityStatus::holds;
  std::optional<PoissonParams> witness;
  std::vector<Residual> residuals;
  /// l_r = log(a_{r'} / a_r), keyed by "r<i>/r<j>".
  std::map<std::string, double> equilibrium_constants;
  /// Stationary measure on the states of a truncated chain (Kolmogorov test only).
  std::vector<double> stationary_measure;
  std::vector<std::string> notes;

  bool holds() const { return status == ReversibilityStatus::holds; }
  double max_residual() const;
};

/// Creation and annihilation rate sums balance for every complex d
/// (Stueckelberg condition) under the product-Poisson parameters b.
ReversibilityReport check_unitarity(const ReactionNetwork& network, const PoissonParams& b,
                                    double tol = kDefaultTolerance);

/// Compares the probability flow out of and into each sampled state under
/// the product-Poisson measure. All states must share the same scale M.
ReversibilityReport check_poisson_invariance_flows(const ReactionNetwork& network,
                                                   const PoissonParams& b,
                                                   const std::vector<State>& states,
                                                   double tol = kDefaultTolerance);

/// Forward and backward rates of every declared inverse pair agree at b.
ReversibilityReport check_detailed_balance(const ReactionNetwork& network, const PoissonParams& b,
                                           double tol = kDefaultTolerance);

/// Searches for alpha with sum_v alpha_v (d_minus - d_plus)(v,r) = log(a_{r'}/a_r)
/// for every declared pair. The solvability test is exact over the
/// rationals; on success the witness is b = exp(alpha) with free directions
/// fixed at alpha = 0.
ReversibilityReport solve_reversible_measure(const ReactionNetwork& network,
                                             double tol = kDefaultTolerance);

/// Kolmogorov cycle criterion on a finite chain: builds the measure along a
/// breadth-first spanning tree and checks detailed balance on every other edge.
ReversibilityReport kolmogorov_criterion(const FiniteChain& chain, double tol = kDefaultTolerance);

/// Same, on the chain of `network` truncated to `box`.
ReversibilityReport kolmogorov_criterion(const ReactionNetwork& network, const StateBox& box,
                                         double tol = kDefaultTolerance,
                                         std::size_t state_cap = kDefaultStateCap);

enum class ClampVerdict { reversible, generically_irreversible };

struct ClampedReversibility {
  ClampVerdict verdict = ClampVerdict::reversible;
  /// h(v) = ln(c_v / b_v) extended to all species when reversible.
  std::vector<double> extension;
  /// Weights y over the clamped species with y^T H = 0 but y . ln(c/b) != 0.
  std::vector<double> certificate;
  double certificate_residual = 0.0;
  std::size_t clamped_count = 0;
  std::size_t integral_dimension = 0;
  /// True when |W| > dim L, i.e. clamping is irreversible for generic values.
  bool generic_irreversibility_expected = false;
};

/// Decides whether holding the species in `clamped` at `fixed_values` keeps a
/// detailed-balance network reversible: ln(c_v / b_v) on the clamped set
/// must extend to an additive first integral.
ClampedReversibility clamped_reversibility_test(const ReactionNetwork& network,
                                                const PoissonParams& b,
                                                const std::vector<std::size_t>& clamped,
                                                const std::vector<double>& fixed_values,
                                                double tol = kDefaultTolerance);

/// log of prod_v (M b_v)^{n_v} e^{-M b_v} / n_v!
double log_poisson_weight(const PoissonParams& b, const State& state);

/// Draws `count` states from the product-Poisson measure with means M b_v.
std::vector<State> sample_poisson_states(const PoissonParams& b, double scale, std::size_t count,
                                         std::uint64_t seed);

}  // namespace kinetica
