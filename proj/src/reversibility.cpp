#include "kinetica/reversibility.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "kinetica/exact_linear.hpp"
#include "kinetica/rng.hpp"

namespace kinetica {

PoissonParams::PoissonParams(std::vector<double> b) : b_(std::move(b)) {
  for (double x : b_)
    if (!(x > 0.0) || !std::isfinite(x))
      throw ValidationError("Poisson parameters must be positive and finite");
}

std::string to_string(ReversibilityStatus status) {
  switch (status) {
    case ReversibilityStatus::holds:
      return "holds";
    case ReversibilityStatus::fails:
      return "fails";
    case ReversibilityStatus::inconsistent:
      return "inconsistent";
  }
  return "fails";
}

double ReversibilityReport::max_residual() const {
  double m = 0.0;
  for (const auto& r : residuals) m = std::max(m, r.value);
  return m;
}

namespace {

void require_size(const ReactionNetwork& network, const PoissonParams& b) {
  if (b.size() != network.species_count())
    throw ValidationError(fmt::format("expected {} Poisson parameters, got {}",
                                      network.species_count(), b.size()));
}

double relative_gap(double x, double y) {
  const double mag = std::max(std::abs(x), std::abs(y));
  return mag > 0.0 ? std::abs(x - y) / mag : 0.0;
}

void finish(ReversibilityReport& report, const PoissonParams& b, double tol) {
  report.status = ReversibilityStatus::holds;
  for (const auto& r : report.residuals)
    if (!(r.value <= tol)) report.status = ReversibilityStatus::fails;
  if (report.holds()) report.witness = b;
}

}  // namespace

ReversibilityReport check_unitarity(const ReactionNetwork& network, const PoissonParams& b,
                                    double tol) {
  require_size(network, b);
  struct Group {
    double created = 0.0;
    double annihilated = 0.0;
  };
  std::map<std::vector<int>, Group> groups;
  ReversibilityReport report;
  const Concentrations& c = b.values();
  for (std::size_t r = 0; r < network.reaction_count(); ++r) {
    const auto& rx = network.reaction(r);
    if (rx.is_null()) {
      report.notes.push_back(
          fmt::format("reaction {} leaves the state unchanged and is excluded", r));
      continue;
    }
    const double flux = mass_action_flux(rx, c);
    groups[rx.d_minus].annihilated += flux;
    groups[rx.d_plus].created += flux;
  }
  for (const auto& [complex, g] : groups)
    report.residuals.push_back({network.complex_label(complex), relative_gap(g.created, g.annihilated)});
  finish(report, b, tol);
  return report;
}

double log_poisson_weight(const PoissonParams& b, const State& state) {
  double w = 0.0;
  for (std::size_t v = 0; v < b.size(); ++v) {
    const double mean = state.scale * b[v];
    const auto n = static_cast<double>(state.counts[v]);
    w += n * std::log(mean) - mean - std::lgamma(n + 1.0);
  }
  return w;
}

namespace {

/// log(mu(target) / mu(from)) evaluated as a short telescoping product.
double log_weight_ratio(const PoissonParams& b, double scale, const std::vector<std::int64_t>& from,
                        const std::vector<std::int64_t>& target) {
  double w = 0.0;
  for (std::size_t v = 0; v < from.size(); ++v) {
    const std::int64_t n = from[v];
    const std::int64_t m = target[v];
    if (n == m) continue;
    w += static_cast<double>(m - n) * std::log(scale * b[v]);
    // n! / m!
    if (m < n)
      for (std::int64_t k = m + 1; k <= n; ++k) w += std::log(static_cast<double>(k));
    else
      for (std::int64_t k = n + 1; k <= m; ++k) w -= std::log(static_cast<double>(k));
  }
  return w;
}

}  // namespace

ReversibilityReport check_poisson_invariance_flows(const ReactionNetwork& network,
                                                   const PoissonParams& b,
                                                   const std::vector<State>& states, double tol) {
  require_size(network, b);
  ReversibilityReport report;
  const std::size_t V = network.species_count();
  std::vector<std::int64_t> source(V);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& s = states[k];
    validate_state(network, s);
    if (s.scale != states.front().scale)
      throw ValidationError("all sampled states must share the same scale M");
    double out = 0.0;
    double in = 0.0;
    for (std::size_t r = 0; r < network.reaction_count(); ++r) {
      const auto& rx = network.reaction(r);
      out += propensity(network, r, s);
      bool admissible = true;
      for (std::size_t v = 0; v < V; ++v) {
        source[v] = s.counts[v] + rx.d_minus[v] - rx.d_plus[v];
        if (source[v] < 0) admissible = false;
      }
      if (!admissible) continue;
      const State prev{source, s.scale};
      const double rate = propensity(network, r, prev);
      if (rate == 0.0) continue;
      in += std::exp(log_weight_ratio(b, s.scale, s.counts, source)) * rate;
    }
    std::string id = "n=(";
    for (std::size_t v = 0; v < V; ++v) id += fmt::format("{}{}", v ? "," : "", s.counts[v]);
    id += ")";
    report.residuals.push_back({std::move(id), relative_gap(in, out)});
  }
  finish(report, b, tol);
  return report;
}

ReversibilityReport check_detailed_balance(const ReactionNetwork& network, const PoissonParams& b,
                                           double tol) {
  require_size(network, b);
  ReversibilityReport report;
  for (const auto& [r, s] : network.inverse_pairs()) {
    const double forward = mass_action_flux(network.reaction(r), b.values());
    const double backward = mass_action_flux(network.reaction(s), b.values());
    report.residuals.push_back({fmt::format("r{}<=>r{}", r, s), relative_gap(forward, backward)});
  }
  for (std::size_t r = 0; r < network.reaction_count(); ++r) {
    if (network.inverse_of(r)) continue;
    if (network.reaction(r).is_null()) {
      report.notes.push_back(fmt::format("reaction {} leaves the state unchanged", r));
      continue;
    }
    report.residuals.push_back({fmt::format("unpaired r{}", r), 1.0});
    report.notes.push_back(fmt::format("reaction {} ({}) has no declared inverse", r,
                                       network.reaction_label(r)));
  }
  finish(report, b, tol);
  return report;
}

namespace {

std::string combination_label(const std::vector<std::int64_t>& weights,
                              const std::vector<std::size_t>& reactions) {
  std::string out;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] == 0) continue;
    if (!out.empty()) out += " ";
    out += weights[j] > 0 ? "+" : "-";
    if (std::abs(weights[j]) != 1) out += fmt::format("{}*", std::abs(weights[j]));
    out += fmt::format("r{}", reactions[j]);
  }
  return out;
}

}  // namespace

ReversibilityReport solve_reversible_measure(const ReactionNetwork& network, double tol) {
  ReversibilityReport report;
  const std::size_t V = network.species_count();
  bool structural = false;
  for (std::size_t r = 0; r < network.reaction_count(); ++r) {
    if (network.inverse_of(r) || network.reaction(r).is_null()) continue;
    report.residuals.push_back({fmt::format("unpaired r{}", r), 1.0});
    report.notes.push_back(fmt::format("reaction {} ({}) has no declared inverse", r,
                                       network.reaction_label(r)));
    structural = true;
  }
  if (structural) {
    report.status = ReversibilityStatus::fails;
    return report;
  }

  const auto& pairs = network.inverse_pairs();
  std::vector<std::vector<int>> rows;
  std::vector<double> log_constants;
  std::vector<std::size_t> representatives;
  for (const auto& [r, s] : pairs) {
    const auto& rx = network.reaction(r);
    std::vector<int> d(V);
    for (std::size_t v = 0; v < V; ++v) d[v] = rx.d_minus[v] - rx.d_plus[v];
    rows.push_back(std::move(d));
    const double l = std::log(network.reaction(s).rate / rx.rate);
    log_constants.push_back(l);
    representatives.push_back(r);
    report.equilibrium_constants[fmt::format("r{}/r{}", r, s)] = l;
  }

  const auto reduction = row_reduce(RationalMatrix::from_integers(rows, V));
  const std::size_t P = rows.size();
  bool consistent = true;
  for (std::size_t i = reduction.rank(); i < P; ++i) {
    std::vector<Rational> y(P);
    for (std::size_t j = 0; j < P; ++j) y[j] = reduction.transform(i, j);
    const auto weights = primitive_integer_vector(y);
    double residual = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < P; ++j) {
      residual += static_cast<double>(weights[j]) * log_constants[j];
      scale += std::abs(static_cast<double>(weights[j]) * log_constants[j]);
    }
    const double value = std::abs(residual);
    report.residuals.push_back({"cycle " + combination_label(weights, representatives), value});
    if (value > tol * std::max(1.0, scale)) consistent = false;
  }
  if (!consistent) {
    report.status = ReversibilityStatus::inconsistent;
    report.notes.push_back(
        "equilibrium constants violate a cycle condition; no detailed-balance measure exists");
    return report;
  }

  std::vector<double> alpha(V, 0.0);
  for (std::size_t i = 0; i < reduction.rank(); ++i) {
    double a = 0.0;
    for (std::size_t j = 0; j < P; ++j)
      a += reduction.transform(i, j).convert_to<double>() * log_constants[j];
    alpha[reduction.pivot_columns[i]] = a;
  }
  std::vector<double> b(V);
  for (std::size_t v = 0; v < V; ++v) b[v] = std::exp(alpha[v]);

  // Cycle residuals within tolerance are kept for transparency; the pair
  // equations are what the witness must satisfy.
  for (std::size_t j = 0; j < P; ++j) {
    double lhs = 0.0;
    for (std::size_t v = 0; v < V; ++v) lhs += alpha[v] * rows[j][v];
    report.residuals.push_back(
        {fmt::format("r{}<=>r{}", pairs[j].first, pairs[j].second), std::abs(lhs - log_constants[j])});
  }
  report.status = ReversibilityStatus::holds;
  for (const auto& r : report.residuals)
    if (r.id.rfind("r", 0) == 0 && !(r.value <= tol * std::max(1.0, std::abs(r.value))))
      report.status = ReversibilityStatus::fails;
  if (report.holds()) report.witness = PoissonParams(std::move(b));
  return report;
}

ReversibilityReport kolmogorov_criterion(const FiniteChain& chain, double tol) {
  ReversibilityReport report;
  const std::size_t n = chain.size();
  const auto adj = chain.undirected_adjacency();
  std::vector<double> log_pi(n, 0.0);
  std::vector<bool> visited(n, false);
  std::vector<std::size_t> component(n, 0);
  std::size_t components = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (visited[root]) continue;
    visited[root] = true;
    component[root] = components;
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      for (std::size_t c : adj[p]) {
        if (visited[c]) continue;
        visited[c] = true;
        component[c] = components;
        const double forward = chain.rate(p, c);
        const double backward = chain.rate(c, p);
        log_pi[c] = (forward > 0.0 && backward > 0.0)
                        ? log_pi[p] + std::log(forward) - std::log(backward)
                        : log_pi[p];
        queue.push_back(c);
      }
    }
    ++components;
  }

  constexpr std::size_t kMaxReported = 32;
  std::size_t failures = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : adj[i]) {
      if (j < i) continue;
      const double forward = chain.rate(i, j);
      const double backward = chain.rate(j, i);
      double residual;
      std::string id;
      if (forward > 0.0 && backward > 0.0) {
        residual = std::abs(log_pi[i] + std::log(forward) - log_pi[j] - std::log(backward));
        id = fmt::format("edge {}<->{}", i, j);
      } else {
        residual = 1.0;
        id = fmt::format("one-way edge {}->{}", forward > 0.0 ? i : j, forward > 0.0 ? j : i);
      }
      worst = std::max(worst, residual);
      if (residual > tol) {
        ++failures;
        if (report.residuals.size() < kMaxReported) report.residuals.push_back({id, residual});
      }
    }
  }
  if (failures == 0) report.residuals.push_back({"max edge residual", worst});
  if (failures > kMaxReported)
    report.notes.push_back(fmt::format("{} failing edges, first {} reported", failures, kMaxReported));
  if (components > 1)
    report.notes.push_back(fmt::format("criterion applied to {} components separately", components));

  report.status = failures == 0 ? ReversibilityStatus::holds : ReversibilityStatus::fails;
  if (report.holds()) {
    std::vector<double> max_log(components, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
      max_log[component[i]] = std::max(max_log[component[i]], log_pi[i]);
    std::vector<double> total(components, 0.0);
    report.stationary_measure.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      report.stationary_measure[i] = std::exp(log_pi[i] - max_log[component[i]]);
      total[component[i]] += report.stationary_measure[i];
    }
    for (std::size_t i = 0; i < n; ++i) report.stationary_measure[i] /= total[component[i]];
  }
  return report;
}

ReversibilityReport kolmogorov_criterion(const ReactionNetwork& network, const StateBox& box,
                                         double tol, std::size_t state_cap) {
  auto report = kolmogorov_criterion(truncate_chain(network, box, state_cap), tol);
  report.notes.push_back(
      "truncated chain: jumps leaving the box are dropped, so the verdict concerns the restriction");
  return report;
}

ClampedReversibility clamped_reversibility_test(const ReactionNetwork& network,
                                                const PoissonParams& b,
                                                const std::vector<std::size_t>& clamped,
                                                const std::vector<double>& fixed_values,
                                                double tol) {
  require_size(network, b);
  if (clamped.size() != fixed_values.size())
    throw ValidationError("clamped species and fixed values differ in length");
  const std::size_t V = network.species_count();
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    if (clamped[i] >= V) throw ValidationError("clamped species index out of range");
    if (!(fixed_values[i] > 0.0)) throw ValidationError("fixed values must be positive");
  }
  if (!check_detailed_balance(network, b, tol).holds())
    throw ValidationError("network does not satisfy detailed balance at the given parameters");

  const auto integrals = additive_integrals(network);
  ClampedReversibility out;
  out.clamped_count = clamped.size();
  out.integral_dimension = integrals.size();
  out.generic_irreversibility_expected = clamped.size() > integrals.size();
  out.extension.assign(V, 0.0);
  if (clamped.empty()) return out;

  const std::size_t W = clamped.size();
  const std::size_t K = integrals.size();
  std::vector<double> target(W);
  std::vector<std::vector<int>> rows(W, std::vector<int>(K));
  for (std::size_t i = 0; i < W; ++i) {
    target[i] = std::log(fixed_values[i] / b[clamped[i]]);
    for (std::size_t k = 0; k < K; ++k) rows[i][k] = static_cast<int>(integrals[k][clamped[i]]);
  }
  const auto reduction = row_reduce(RationalMatrix::from_integers(rows, K));
  for (std::size_t i = reduction.rank(); i < W; ++i) {
    std::vector<Rational> y(W);
    for (std::size_t j = 0; j < W; ++j) y[j] = reduction.transform(i, j);
    const auto weights = primitive_integer_vector(y);
    double residual = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < W; ++j) {
      residual += static_cast<double>(weights[j]) * target[j];
      scale += std::abs(static_cast<double>(weights[j]) * target[j]);
    }
    if (std::abs(residual) > tol * std::max(1.0, scale)) {
      out.verdict = ClampVerdict::generically_irreversible;
      out.certificate.assign(weights.begin(), weights.end());
      out.certificate_residual = residual;
      out.extension.clear();
      return out;
    }
  }
  std::vector<double> coeff(K, 0.0);
  for (std::size_t i = 0; i < reduction.rank(); ++i) {
    double x = 0.0;
    for (std::size_t j = 0; j < W; ++j) x += reduction.transform(i, j).convert_to<double>() * target[j];
    coeff[reduction.pivot_columns[i]] = x;
  }
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t v = 0; v < V; ++v) out.extension[v] += coeff[k] * static_cast<double>(integrals[k][v]);
  return out;
}

std::vector<State> sample_poisson_states(const PoissonParams& b, double scale, std::size_t count,
                                         std::uint64_t seed) {
  Philox4x64 rng(seed, stream::initial_state);
  std::vector<State> out(count);
  for (auto& s : out) {
    s.scale = scale;
    s.counts.resize(b.size());
    for (std::size_t v = 0; v < b.size(); ++v) {
      std::poisson_distribution<std::int64_t> dist(scale * b[v]);
      s.counts[v] = dist(rng);
    }
  }
  return out;
}

}  // namespace kinetica
