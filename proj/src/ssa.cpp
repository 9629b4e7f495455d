#include "kinetica/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>
#include <omp.h>

#include "kinetica/kinetics.hpp"

namespace kinetica {

std::string to_string(Termination termination) {
  switch (termination) {
    case Termination::reached_end:
      return "reached_end";
    case Termination::absorbed:
      return "absorbed";
    case Termination::max_events:
      return "max_events";
  }
  return "reached_end";
}

std::vector<double> SimConfig::grid() const {
  return sample_times.empty() ? std::vector<double>{0.0, t_end} : sample_times;
}

void SimConfig::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("scale M must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be positive");
  if (max_events == 0) throw ValidationError("max_events must be positive");
  const auto g = grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] < 0.0 || g[i] > t_end) throw ValidationError("sample times must lie in [0, t_end]");
    if (i > 0 && !(g[i] > g[i - 1])) throw ValidationError("sample times must be increasing");
  }
}

namespace {

/// Propensities of one network at fixed M, with a dependency graph so that
/// only reactions touching changed species are re-evaluated.
class PropensityTable {
 public:
  PropensityTable(const ReactionNetwork& network, double scale) {
    const std::size_t R = network.reaction_count();
    const std::size_t V = network.species_count();
    prefactor_.resize(R);
    change_.resize(R);
    for (std::size_t r = 0; r < R; ++r) {
      const auto& rx = network.reaction(r);
      prefactor_[r] = rx.rate * std::pow(scale, 1 - rx.order());
      for (std::size_t v = 0; v < V; ++v) {
        const int delta = rx.d_plus[v] - rx.d_minus[v];
        if (delta != 0) change_[r].push_back({v, delta});
      }
    }
    substrates_.resize(R);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t v = 0; v < V; ++v)
        if (network.reaction(r).d_minus[v] > 0) substrates_[r].push_back({v, network.reaction(r).d_minus[v]});
    dependents_.resize(R);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t s = 0; s < R; ++s) {
        bool touches = false;
        for (const auto& [v, delta] : change_[r])
          for (const auto& [w, d] : substrates_[s])
            if (v == w) touches = true;
        if (touches) dependents_[r].push_back(s);
      }
  }

  double evaluate(std::size_t r, const std::vector<std::int64_t>& n) const {
    double p = prefactor_[r];
    for (const auto& [v, d] : substrates_[r]) {
      const double ff = falling_factorial(n[v], d);
      if (ff == 0.0) return 0.0;
      p *= ff;
    }
    return p;
  }

  void apply(std::size_t r, std::vector<std::int64_t>& n) const {
    for (const auto& [v, delta] : change_[r]) n[v] += delta;
  }

  const std::vector<std::size_t>& dependents(std::size_t r) const { return dependents_[r]; }

 private:
  std::vector<double> prefactor_;
  std::vector<std::vector<std::pair<std::size_t, int>>> change_;
  std::vector<std::vector<std::pair<std::size_t, int>>> substrates_;
  std::vector<std::vector<std::size_t>> dependents_;
};

}  // namespace

SsaTrajectory simulate(const ReactionNetwork& network, const State& initial, const SimConfig& config) {
  config.validate();
  validate_state(network, initial);
  if (initial.scale != config.scale) throw ValidationError("initial state scale differs from config scale");
  const std::size_t R = network.reaction_count();
  const PropensityTable table(network, config.scale);
  Philox4x64 rng(config.seed, stream::dynamics);
  const auto grid = config.grid();

  SsaTrajectory out;
  out.reaction_counts.assign(R, 0);
  out.integrated_propensity.assign(R, 0.0);
  std::vector<std::int64_t> n = initial.counts;
  std::vector<double> a(R);
  for (std::size_t r = 0; r < R; ++r) a[r] = table.evaluate(r, n);

  double t = 0.0;
  std::size_t k = 0;
  auto record_until = [&](double limit) {
    while (k < grid.size() && grid[k] <= limit) {
      out.times.push_back(grid[k]);
      out.counts.push_back(n);
      ++k;
    }
  };
  record_until(0.0);
  while (true) {
    double total = 0.0;
    for (double x : a) total += x;
    if (!std::isfinite(total)) throw SimulationError(fmt::format("total propensity overflow at t = {}", t));
    if (total == 0.0) {
      record_until(config.t_end);
      out.termination = Termination::absorbed;
      out.end_time = config.t_end;
      return out;
    }
    const double t_next = t + rng.exponential(total);
    const double horizon = std::min(t_next, config.t_end);
    for (std::size_t r = 0; r < R; ++r) out.integrated_propensity[r] += a[r] * (horizon - t);
    if (t_next > config.t_end) {
      record_until(config.t_end);
      out.termination = Termination::reached_end;
      out.end_time = config.t_end;
      return out;
    }
    // Samples strictly before the jump see the pre-jump state.
    while (k < grid.size() && grid[k] < t_next) {
      out.times.push_back(grid[k]);
      out.counts.push_back(n);
      ++k;
    }
    if (out.events == config.max_events) {
      out.termination = Termination::max_events;
      out.end_time = t;
      return out;
    }
    const double u = rng.uniform() * total;
    std::size_t chosen = R - 1;
    double acc = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      acc += a[r];
      if (u < acc && a[r] > 0.0) {
        chosen = r;
        break;
      }
    }
    while (a[chosen] == 0.0) --chosen;  // rounding fell past the last positive entry
    table.apply(chosen, n);
    for (std::size_t s : table.dependents(chosen)) a[s] = table.evaluate(s, n);
    ++out.reaction_counts[chosen];
    ++out.events;
    t = t_next;
  }
}

State draw_initial_state(const InitialLaw& law, double scale, std::uint64_t replica_seed) {
  if (law.fixed) return *law.fixed;
  if (!law.poisson) throw ValidationError("initial law is empty");
  Philox4x64 rng(replica_seed, stream::initial_state);
  State s;
  s.scale = scale;
  for (std::size_t v = 0; v < law.poisson->size(); ++v) {
    std::poisson_distribution<std::int64_t> dist(scale * (*law.poisson)[v]);
    s.counts.push_back(dist(rng));
  }
  return s;
}

namespace {

Replica run_replica(const ReactionNetwork& network, const InitialLaw& law, const SimConfig& config,
                    std::size_t index) {
  Replica rep;
  rep.seed = derive_seed(config.seed, index);
  SimConfig local = config;
  local.seed = rep.seed;
  try {
    rep.initial = draw_initial_state(law, config.scale, rep.seed);
    rep.trajectory = simulate(network, rep.initial, local);
  } catch (const std::exception& e) {
    rep.error = e.what();
  }
  return rep;
}

void check_ensemble_args(const ReactionNetwork& network, const InitialLaw& law, const SimConfig& config,
                         std::size_t replicas) {
  if (replicas == 0) throw ValidationError("at least one replica is required");
  config.validate();
  if (law.poisson && law.poisson->size() != network.species_count())
    throw ValidationError("Poisson parameters do not match the species count");
  if (law.fixed) validate_state(network, *law.fixed);
}

}  // namespace

Ensemble run_ensemble(const ReactionNetwork& network, const InitialLaw& law, const SimConfig& config,
                      std::size_t replicas, int workers) {
  check_ensemble_args(network, law, config, replicas);
  Ensemble ens;
  ens.config = config;
  ens.replicas.resize(replicas);
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(replicas);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i)
    ens.replicas[static_cast<std::size_t>(i)] = run_replica(network, law, config, static_cast<std::size_t>(i));
  return ens;
}

Ensemble run_ensemble_serial(const ReactionNetwork& network, const InitialLaw& law,
                             const SimConfig& config, std::size_t replicas) {
  check_ensemble_args(network, law, config, replicas);
  Ensemble ens;
  ens.config = config;
  for (std::size_t i = 0; i < replicas; ++i) ens.replicas.push_back(run_replica(network, law, config, i));
  return ens;
}

std::vector<std::vector<double>> ensemble_mean_concentrations(const Ensemble& ensemble) {
  const auto grid = ensemble.config.grid();
  std::vector<std::vector<double>> mean;
  std::size_t used = 0;
  for (const auto& rep : ensemble.replicas) {
    if (!rep.ok()) continue;
    if (mean.empty()) mean.assign(grid.size(), std::vector<double>(rep.initial.counts.size(), 0.0));
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t v = 0; v < mean[i].size(); ++v)
        mean[i][v] += static_cast<double>(rep.trajectory.counts[i][v]);
    ++used;
  }
  if (used == 0) throw SimulationError("no replica completed successfully");
  const double denom = static_cast<double>(used) * ensemble.config.scale;
  for (auto& row : mean)
    for (auto& x : row) x /= denom;
  return mean;
}

MeanFieldTable meanfield_convergence(const ReactionNetwork& network, const Concentrations& c0,
                                     const std::vector<double>& scales,
                                     const std::vector<double>& sample_times, std::size_t replicas,
                                     std::uint64_t seed, int workers) {
  validate_concentrations(network, c0);
  if (scales.size() < 2) throw ValidationError("at least two scales are required");
  if (sample_times.empty()) throw ValidationError("sample times are required");
  for (std::size_t k = 1; k < scales.size(); ++k)
    if (!(scales[k] > scales[k - 1])) throw ValidationError("scales must be increasing");
  const double t_end = sample_times.back();
  const auto reference = integrate(network, c0, t_end, sample_times);

  MeanFieldTable table;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    SimConfig config;
    config.scale = scales[k];
    config.t_end = t_end;
    config.sample_times = sample_times;
    config.seed = derive_seed(seed, k);
    const auto ens = run_ensemble(network, InitialLaw::deterministic(state_from_concentrations(c0, scales[k])),
                                  config, replicas, workers);
    MeanFieldRow row;
    row.scale = scales[k];
    for (const auto& rep : ens.replicas)
      if (!rep.ok()) ++row.failed_replicas;
    const auto mean = ensemble_mean_concentrations(ens);
    for (std::size_t i = 0; i < sample_times.size(); ++i)
      for (std::size_t v = 0; v < c0.size(); ++v)
        row.error = std::max(row.error, std::abs(mean[i][v] - reference.states[i][v]));
    table.rows.push_back(row);
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(table.rows.size());
  table.decreasing = true;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const double x = std::log(table.rows[k].scale);
    const double y = std::log(table.rows[k].error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    if (k > 0 && !(table.rows[k].error < table.rows[k - 1].error)) table.decreasing = false;
  }
  table.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return table;
}

namespace {

double poisson_log_pmf(std::int64_t k, double mu) {
  return static_cast<double>(k) * std::log(mu) - mu - std::lgamma(static_cast<double>(k) + 1.0);
}

/// Chi-square statistic of `counts` against Poisson(mu), bins merged so
/// that each expected count is at least 5. Returns {statistic, bins}.
std::pair<double, std::size_t> poisson_chi_square(const std::vector<std::int64_t>& counts, double mu) {
  const double R = static_cast<double>(counts.size());
  // Upper edges (inclusive) of the merged bins; the last bin is open.
  std::vector<std::int64_t> edges;
  std::vector<double> expected;
  double acc = 0.0;
  double cumulative = 0.0;
  const auto k_max = static_cast<std::int64_t>(mu + 12.0 * std::sqrt(mu) + 30.0);
  for (std::int64_t k = 0; k <= k_max; ++k) {
    const double p = std::exp(poisson_log_pmf(k, mu));
    acc += R * p;
    cumulative += p;
    if (acc >= 5.0 && R * (1.0 - cumulative) >= 5.0) {
      edges.push_back(k);
      expected.push_back(acc);
      acc = 0.0;
    }
  }
  // Remaining mass, including the tail beyond k_max, forms the last bin.
  double tail = R - std::accumulate(expected.begin(), expected.end(), 0.0);
  expected.push_back(tail);
  const std::size_t bins = expected.size();
  if (bins < 2) return {0.0, bins};
  std::vector<double> observed(bins, 0.0);
  for (auto c : counts) {
    const auto it = std::lower_bound(edges.begin(), edges.end(), c);
    observed[static_cast<std::size_t>(it - edges.begin())] += 1.0;
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  return {stat, bins};
}

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

/// z-score of the sample mean of n^(k) against its Poisson value mu^k.
double factorial_moment_z(const std::vector<std::int64_t>& counts, double mu, int k) {
  double mean = 0.0;
  for (auto c : counts) mean += falling_factorial(c, k);
  mean /= static_cast<double>(counts.size());
  double second = 0.0;
  double fact = 1.0;
  for (int j = 0; j <= k; ++j) {
    if (j > 0) fact *= j;
    second += binomial(k, j) * binomial(k, j) * fact * std::pow(mu, 2 * k - j);
  }
  const double target = std::pow(mu, k);
  const double var = second - target * target;
  if (!(var > 0.0)) return mean == target ? 0.0 : std::numeric_limits<double>::infinity();
  return (mean - target) / std::sqrt(var / static_cast<double>(counts.size()));
}

}  // namespace

StationarityReport stationarity_test(const ReactionNetwork& network, const PoissonParams& b,
                                     const SimConfig& config, std::size_t replicas, double alpha,
                                     int workers) {
  if (b.size() != network.species_count())
    throw ValidationError("Poisson parameters do not match the species count");
  const auto ens = run_ensemble(network, InitialLaw::product_poisson(b), config, replicas, workers);
  const auto grid = config.grid();
  const std::size_t V = network.species_count();

  StationarityReport report;
  report.alpha = alpha;
  const double tests = static_cast<double>(std::max<std::size_t>(1, V * grid.size()));
  report.bonferroni_alpha = alpha / tests;
  // Three moment z-tests per marginal share the same correction.
  const boost::math::normal standard;
  report.z_threshold =
      std::max(3.0, boost::math::quantile(boost::math::complement(standard, report.bonferroni_alpha / 6.0)));

  std::vector<const Replica*> good;
  for (const auto& rep : ens.replicas) {
    if (rep.ok())
      good.push_back(&rep);
    else
      ++report.failed_replicas;
  }
  if (good.size() < 2) throw SimulationError("too few successful replicas for a stationarity test");

  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t v = 0; v < V; ++v) {
      std::vector<std::int64_t> counts;
      counts.reserve(good.size());
      for (const auto* rep : good) counts.push_back(rep->trajectory.counts[i][v]);
      const double mu = config.scale * b[v];
      MarginalTest test;
      test.species = v;
      test.time = grid[i];
      const auto [stat, bins] = poisson_chi_square(counts, mu);
      if (bins < 2)
        throw ValidationError(
            fmt::format("{} replicas are too few to form two chi-square bins at mean {}", good.size(), mu));
      test.chi_square = stat;
      test.degrees_of_freedom = bins - 1;
      const boost::math::chi_squared dist(static_cast<double>(test.degrees_of_freedom));
      test.p_value = boost::math::cdf(boost::math::complement(dist, stat));
      test.passed = test.p_value > report.bonferroni_alpha;
      for (int k = 1; k <= 3; ++k) {
        const double z = factorial_moment_z(counts, mu, k);
        test.moment_z.push_back(z);
        if (!(std::abs(z) <= report.z_threshold)) test.passed = false;
      }
      if (!test.passed) report.stationary = false;
      report.tests.push_back(std::move(test));
    }
  }
  return report;
}

}  // namespace kinetica
