#include "kinetica/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "kinetica/exact_linear.hpp"

namespace kinetica {

namespace odeint = boost::numeric::odeint;

std::string to_string(Stability stability) {
  switch (stability) {
    case Stability::stable:
      return "stable";
    case Stability::unstable:
      return "unstable";
    case Stability::marginal:
      return "marginal";
  }
  return "marginal";
}

std::string to_string(SchloeglCase kind) {
  switch (kind) {
    case SchloeglCase::input_output:
      return "input_output";
    case SchloeglCase::closed:
      return "closed";
    case SchloeglCase::balanced_ratio:
      return "balanced_ratio";
    case SchloeglCase::non_unitary:
      return "non_unitary";
  }
  return "non_unitary";
}

namespace {

using StateVec = std::vector<double>;

/// Called after every accepted step; returning true stops the integration.
using StepHook = std::function<bool(double, const StateVec&)>;

double max_abs(const StateVec& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

void run_integration(const ReactionNetwork& network, StateVec& x, double& t,
                     const std::vector<double>& grid, const IntegrationOptions& options,
                     Trajectory& out, const StepHook& hook) {
  auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol,
                                         odeint::runge_kutta_dopri5<StateVec>());
  auto system = [&network](const StateVec& c, StateVec& dcdt, double) { dcdt = ode_rhs(network, c); };

  std::size_t k = 0;
  while (k < grid.size() && grid[k] <= t) {
    out.times.push_back(grid[k]);
    out.states.push_back(x);
    ++k;
  }
  double dt = options.initial_step;
  while (k < grid.size()) {
    const double target = grid[k];
    const bool lands = dt >= target - t;
    double step = lands ? target - t : dt;
    if (stepper.try_step(system, x, t, step) == odeint::fail) {
      ++out.rejected_steps;
      dt = step;
      if (dt < 1e-14 * std::max(1.0, std::abs(t)))
        throw IntegrationError(fmt::format("step size underflow at t = {}; system may be stiff", t), t);
      continue;
    }
    ++out.accepted_steps;
    if (out.accepted_steps > options.max_steps)
      throw IntegrationError(fmt::format("step budget of {} exhausted at t = {}", options.max_steps, t), t);
    if (lands) {
      t = target;
      dt = std::max(dt, step);
    } else {
      dt = step;
    }

    bool clipped = false;
    for (std::size_t v = 0; v < x.size(); ++v)
      if (x[v] < 0.0) {
        out.clip_events.push_back({t, v, x[v]});
        x[v] = 0.0;
        clipped = true;
      }
    if (clipped) stepper.reset();
    if (!(max_abs(x) <= options.blowup_bound))
      throw IntegrationError(
          fmt::format("concentration exceeded {} at t = {}", options.blowup_bound, t), t);
    if (options.record_steps) {
      out.step_times.push_back(t);
      out.step_states.push_back(x);
    }
    while (k < grid.size() && grid[k] <= t) {
      out.times.push_back(grid[k]);
      out.states.push_back(x);
      ++k;
    }
    if (hook && hook(t, x)) return;
  }
}

}  // namespace

Trajectory integrate(const ReactionNetwork& network, const Concentrations& c0, double t_end,
                     const std::vector<double>& sample_times, const IntegrationOptions& options) {
  validate_concentrations(network, c0);
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be positive");
  std::vector<double> grid = sample_times.empty() ? std::vector<double>{0.0, t_end} : sample_times;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] > t_end) throw ValidationError("sample times must lie in [0, t_end]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ValidationError("sample times must be increasing");
  }
  Trajectory out;
  StateVec x = c0;
  double t = 0.0;
  if (options.record_steps) {
    out.step_times.push_back(0.0);
    out.step_states.push_back(x);
  }
  run_integration(network, x, t, grid, options, out, {});
  return out;
}

Eigen::MatrixXd leaf_basis(const ReactionNetwork& network) {
  const auto V = static_cast<Eigen::Index>(network.species_count());
  const auto integrals = additive_integrals(network);
  if (integrals.empty()) return Eigen::MatrixXd::Identity(V, V);
  Eigen::MatrixXd h(static_cast<Eigen::Index>(integrals.size()), V);
  for (std::size_t k = 0; k < integrals.size(); ++k)
    for (Eigen::Index v = 0; v < V; ++v)
      h(static_cast<Eigen::Index>(k), v) = static_cast<double>(integrals[k][static_cast<std::size_t>(v)]);
  // The integrals are linearly independent by construction, so the last
  // V - K right singular vectors span their orthogonal complement.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeFullV);
  const auto K = static_cast<Eigen::Index>(integrals.size());
  return svd.matrixV().rightCols(V - K);
}

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

/// Scale of the reaction fluxes at c, used to make residual tests invariant
/// under a common rescaling of all rates.
double flux_scale(const ReactionNetwork& network, const Concentrations& c) {
  double s = 0.0;
  for (const auto& rx : network.reactions()) s += mass_action_flux(rx, c);
  return s;
}

struct NewtonOutcome {
  bool converged = false;
  Concentrations c;
  double residual = 0.0;
  std::string diagnostic;
};

NewtonOutcome newton_on_leaf(const ReactionNetwork& network, const Eigen::MatrixXd& q,
                             Concentrations c, const FixedPointOptions& options) {
  NewtonOutcome out;
  const auto V = network.species_count();
  auto residual_of = [&](const Concentrations& x) {
    const auto f = ode_rhs(network, x);
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
  };
  if (q.cols() == 0) {
    out.c = c;
    out.residual = residual_of(c);
    out.converged = out.residual == 0.0;
    if (!out.converged) out.diagnostic = "no free directions on the leaf";
    return out;
  }
  double res = residual_of(c);
  for (int it = 0; it < options.newton_max_iterations; ++it) {
    if (res <= options.newton_tol * flux_scale(network, c)) break;
    const auto f = to_eigen(ode_rhs(network, c));
    const auto jac = ode_jacobian(network, c);
    const Eigen::MatrixXd j =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            jac.data(), static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(V));
    const Eigen::MatrixXd a = q.transpose() * j * q;
    const Eigen::VectorXd y = a.fullPivLu().solve(-(q.transpose() * f));
    if (!y.allFinite()) {
      out.diagnostic = "singular Newton system";
      break;
    }
    const Eigen::VectorXd step = q * y;
    double lambda = 1.0;
    Concentrations trial(V);
    double trial_res = res;
    for (int halving = 0; halving < 30; ++halving) {
      for (std::size_t v = 0; v < V; ++v) trial[v] = c[v] + lambda * step(static_cast<Eigen::Index>(v));
      trial_res = residual_of(trial);
      if (trial_res < res) break;
      lambda *= 0.5;
    }
    if (!(trial_res < res)) {
      out.diagnostic = "Newton stalled";
      break;
    }
    c = trial;
    res = trial_res;
  }
  out.c = c;
  const double scale = std::max(1.0, max_abs(c));
  bool physical = true;
  for (auto& v : out.c) {
    if (v < -1e-9 * scale) physical = false;
    v = std::max(v, 0.0);
  }
  // The residual is judged against the fluxes at the point itself, so a
  // point near the boundary where every flux is tiny is not accepted merely
  // because |F| is small in absolute terms.
  auto tolerance = [&](const Concentrations& x) { return 1e3 * options.newton_tol * flux_scale(network, x); };
  res = residual_of(out.c);
  if (physical && !(res <= tolerance(out.c))) {
    // Boundary equilibria are approached only linearly; snap vanishing components.
    auto snapped = out.c;
    for (auto& v : snapped)
      if (v <= 1e-10 * scale) v = 0.0;
    const double snapped_res = residual_of(snapped);
    if (snapped_res <= tolerance(snapped)) {
      out.c = snapped;
      res = snapped_res;
    }
  }
  out.residual = res;
  const double tol = tolerance(out.c);
  if (!physical) {
    out.diagnostic = "Newton converged to a point with negative concentrations";
  } else if (!std::isfinite(res) || res > tol) {
    if (out.diagnostic.empty()) out.diagnostic = "Newton did not converge";
    out.diagnostic += fmt::format(" (residual {:.3g})", res);
  } else {
    out.converged = true;
    out.residual = residual_of(out.c);
  }
  return out;
}

FixedPoint classify(const ReactionNetwork& network, const Eigen::MatrixXd& q, const Concentrations& c,
                    double residual, double band) {
  FixedPoint p;
  p.c = c;
  p.residual = residual;
  const auto V = static_cast<Eigen::Index>(network.species_count());
  if (q.cols() == 0) {
    p.stability = Stability::marginal;
    return p;
  }
  const auto jac = ode_jacobian(network, c);
  const Eigen::MatrixXd j =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(jac.data(), V, V);
  const Eigen::MatrixXd a = q.transpose() * j * q;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  double max_re = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    p.eigenvalues.push_back(es.eigenvalues()(i));
    max_re = std::max(max_re, es.eigenvalues()(i).real());
  }
  if (max_re > band)
    p.stability = Stability::unstable;
  else if (max_re < -band)
    p.stability = Stability::stable;
  else
    p.stability = Stability::marginal;
  return p;
}

std::size_t insert_point(FixedPointResult& result, FixedPoint point, double radius) {
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    double d = 0.0;
    for (std::size_t v = 0; v < point.c.size(); ++v)
      d = std::max(d, std::abs(point.c[v] - result.points[i].c[v]));
    if (d <= radius) return i;
  }
  result.points.push_back(std::move(point));
  return result.points.size() - 1;
}

}  // namespace

FixedPointResult find_fixed_points(const ReactionNetwork& network,
                                   const std::vector<Concentrations>& seeds,
                                   const FixedPointOptions& options) {
  const Eigen::MatrixXd q = leaf_basis(network);
  FixedPointResult result;
  std::vector<Concentrations> polish_later;
  for (const auto& seed : seeds) {
    validate_concentrations(network, seed);
    SeedOutcome outcome;
    StateVec x = seed;
    double t = 0.0;
    int calm_steps = 0;
    Trajectory scratch;
    auto hook = [&](double, const StateVec& c) {
      const auto f = ode_rhs(network, c);
      calm_steps = max_abs(f) < options.quasi_tol ? calm_steps + 1 : 0;
      return calm_steps >= options.sustain_steps;
    };
    try {
      run_integration(network, x, t, {options.t_max}, options.ode, scratch, hook);
      outcome.quasi_stationary = calm_steps >= options.sustain_steps;
      if (!outcome.quasi_stationary)
        outcome.diagnostic = fmt::format("not quasi-stationary by t = {}", options.t_max);
    } catch (const IntegrationError& e) {
      outcome.diagnostic = e.what();
      result.seeds.push_back(outcome);
      if (options.polish_seeds) polish_later.push_back(seed);
      continue;
    }
    const auto polished = newton_on_leaf(network, q, x, options);
    if (polished.converged) {
      outcome.point = insert_point(
          result, classify(network, q, polished.c, polished.residual, options.marginal_band),
          options.dedup_radius);
    } else {
      outcome.diagnostic += (outcome.diagnostic.empty() ? "" : "; ") + polished.diagnostic;
    }
    result.seeds.push_back(outcome);
    if (options.polish_seeds) polish_later.push_back(seed);
  }
  for (const auto& seed : polish_later) {
    const auto polished = newton_on_leaf(network, q, seed, options);
    if (polished.converged)
      insert_point(result, classify(network, q, polished.c, polished.residual, options.marginal_band),
                   options.dedup_radius);
  }
  return result;
}

double entropy(const Concentrations& c, const Concentrations& reference) {
  if (c.size() != reference.size()) throw ValidationError("entropy arguments differ in length");
  double h = 0.0;
  for (std::size_t v = 0; v < c.size(); ++v) {
    if (!(reference[v] > 0.0)) throw ValidationError("entropy reference must be positive");
    if (c[v] < 0.0) throw ValidationError("concentrations must be non-negative");
    if (c[v] == 0.0) continue;
    h += c[v] * (1.0 + std::log(reference[v]) - std::log(c[v]));
  }
  return h;
}

EntropySeries entropy_series(const std::vector<double>& times, const std::vector<Concentrations>& states,
                             const Concentrations& reference) {
  if (times.size() != states.size()) throw ValidationError("times and states differ in length");
  EntropySeries out;
  out.reference = reference;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) throw ValidationError("times must be strictly increasing");
    out.times.push_back(times[i]);
    out.values.push_back(entropy(states[i], reference));
  }
  return out;
}

double kl_poisson(const PoissonParams& q, const PoissonParams& p, double scale) {
  if (q.size() != p.size()) throw ValidationError("parameter vectors differ in length");
  double kl = 0.0;
  for (std::size_t v = 0; v < p.size(); ++v) kl += p[v] * std::log(p[v] / q[v]) + q[v] - p[v];
  return scale * kl;
}

double scaled_relative_entropy(const Concentrations& c, const Concentrations& c_bar, double scale) {
  double total = 0.0;
  for (double x : c_bar) total += x;
  return -scale * (entropy(c, c_bar) - total);
}

SchloeglClassification schloegl_classify(double a01, double a10, double a23, double a32) {
  for (double a : {a01, a10, a23, a32})
    if (!(a >= 0.0) || !std::isfinite(a)) throw ValidationError("Schloegl rates must be non-negative");
  if (a01 == 0.0 && a10 == 0.0 && a23 == 0.0 && a32 == 0.0)
    throw ValidationError("at least one Schloegl rate must be positive");
  SchloeglClassification out;
  const bool io = a01 > 0.0 && a10 > 0.0;
  const bool cubic = a23 > 0.0 && a32 > 0.0;
  if (a23 == 0.0 && a32 == 0.0) {
    if (io) out = {SchloeglCase::input_output, a01 / a10};
  } else if (a01 == 0.0 && a10 == 0.0) {
    if (cubic) out = {SchloeglCase::closed, a23 / a32};
  } else if (io && cubic) {
    const double r1 = a01 / a10;
    const double r2 = a23 / a32;
    if (std::abs(r1 - r2) <= 1e-12 * std::max(r1, r2)) out = {SchloeglCase::balanced_ratio, r1};
  }
  return out;
}

std::optional<std::array<double, 4>> schloegl_rates(const ReactionNetwork& network) {
  if (network.species_count() != 1 || network.reaction_count() == 0) return std::nullopt;
  std::array<double, 4> rates{0.0, 0.0, 0.0, 0.0};
  for (const auto& rx : network.reactions()) {
    const int m = rx.d_minus[0];
    const int p = rx.d_plus[0];
    if (m == 0 && p == 1)
      rates[0] += rx.rate;
    else if (m == 1 && p == 0)
      rates[1] += rx.rate;
    else if (m == 2 && p == 3)
      rates[2] += rx.rate;
    else if (m == 3 && p == 2)
      rates[3] += rx.rate;
    else
      return std::nullopt;
  }
  return rates;
}

}  // namespace kinetica
