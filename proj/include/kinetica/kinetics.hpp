#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kinetica/network.hpp"
#include "kinetica/reversibility.hpp"

namespace kinetica {

/// Integration aborted: blow-up, step-size underflow or step budget exhausted.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& message, double t) : std::runtime_error(message), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

struct IntegrationOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double initial_step = 1e-4;
  /// Abort once max_v |c_v| exceeds this bound.
  double blowup_bound = 1e12;
  std::size_t max_steps = 50'000'000;
  /// Keep every accepted step in Trajectory::step_times / step_states.
  bool record_steps = false;
};

/// A negative component set to zero after an accepted step.
struct ClipEvent {
  double t = 0.0;
  std::size_t species = 0;
  double value = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Concentrations> states;
  std::vector<double> step_times;
  std::vector<Concentrations> step_states;
  std::vector<ClipEvent> clip_events;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

/// Adaptive Dormand-Prince integration of dc/dt = F(c) from c0, reporting
/// the state at each of `sample_times` (increasing, within [0, t_end]).
/// An empty grid means {0, t_end}.
Trajectory integrate(const ReactionNetwork& network, const Concentrations& c0, double t_end,
                     const std::vector<double>& sample_times = {},
                     const IntegrationOptions& options = {});

enum class Stability { stable, unstable, marginal };

std::string to_string(Stability stability);

struct FixedPoint {
  Concentrations c;
  Stability stability = Stability::marginal;
  /// Eigenvalues of the Jacobian restricted to the leaf directions.
  std::vector<std::complex<double>> eigenvalues;
  double residual = 0.0;
};

struct SeedOutcome {
  /// Index into FixedPointResult::points of the point reached by integration.
  std::optional<std::size_t> point;
  bool quasi_stationary = false;
  std::string diagnostic;
};

struct FixedPointResult {
  std::vector<FixedPoint> points;
  /// One entry per seed; this is the basin tag.
  std::vector<SeedOutcome> seeds;
};

struct FixedPointOptions {
  double t_max = 1e4;
  double quasi_tol = 1e-6;
  int sustain_steps = 10;
  int newton_max_iterations = 60;
  double newton_tol = 1e-12;
  double dedup_radius = 1e-6;
  double marginal_band = 1e-8;
  /// Newton-polish the raw seeds as well, which also finds unstable points.
  bool polish_seeds = true;
  IntegrationOptions ode;
};

/// Fixed points of the kinetic equations reached from `seeds`. Each seed is
/// integrated to quasi-stationarity and then polished by Newton's method on
/// its leaf of the additive first integrals.
FixedPointResult find_fixed_points(const ReactionNetwork& network,
                                   const std::vector<Concentrations>& seeds,
                                   const FixedPointOptions& options = {});

/// Orthonormal basis (V x k) of the directions orthogonal to every additive
/// first integral, i.e. the tangent space of a leaf.
Eigen::MatrixXd leaf_basis(const ReactionNetwork& network);

/// sum_v c_v ln(e c0_v / c_v), with 0 ln(1/0) = 0.
double entropy(const Concentrations& c, const Concentrations& reference);

struct EntropySeries {
  std::vector<double> times;
  std::vector<double> values;
  Concentrations reference;
};

EntropySeries entropy_series(const std::vector<double>& times,
                             const std::vector<Concentrations>& states,
                             const Concentrations& reference);

/// KL divergence of product-Poisson(M p) from product-Poisson(M q):
/// sum_v M (p_v ln(p_v / q_v) + q_v - p_v).
double kl_poisson(const PoissonParams& q, const PoissonParams& p, double scale);

/// -M (H(c, c_bar) - sum_v c_bar_v); equals kl_poisson(c_bar, c, M).
double scaled_relative_entropy(const Concentrations& c, const Concentrations& c_bar, double scale);

enum class SchloeglCase { input_output, closed, balanced_ratio, non_unitary };

std::string to_string(SchloeglCase kind);

struct SchloeglClassification {
  SchloeglCase kind = SchloeglCase::non_unitary;
  std::optional<double> b;
};

/// Which unitarity case, if any, the rates 0->X (a01), X->0 (a10),
/// 2X->3X (a23) and 3X->2X (a32) fall into.
SchloeglClassification schloegl_classify(double a01, double a10, double a23, double a32);

/// Recognizes single-species networks made only of the four reactions
/// above and returns their rates {a01, a10, a23, a32}.
std::optional<std::array<double, 4>> schloegl_rates(const ReactionNetwork& network);

}  // namespace kinetica
