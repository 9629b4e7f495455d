#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinetica/network.hpp"
#include "kinetica/reversibility.hpp"
#include "kinetica/rng.hpp"

namespace kinetica {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  /// Volume scale M.
  double scale = 1.0;
  double t_end = 1.0;
  /// Increasing times in [0, t_end]; empty means {0, t_end}.
  std::vector<double> sample_times;
  std::uint64_t seed = 0;
  std::uint64_t max_events = 1'000'000'000;

  std::vector<double> grid() const;
  void validate() const;
};

enum class Termination { reached_end, absorbed, max_events };

std::string to_string(Termination termination);

struct SsaTrajectory {
  /// Sample times actually reached; shorter than the grid only on truncation.
  std::vector<double> times;
  std::vector<std::vector<std::int64_t>> counts;
  std::uint64_t events = 0;
  /// Number of firings of each reaction.
  std::vector<std::uint64_t> reaction_counts;
  /// Time integral of each propensity over [0, end].
  std::vector<double> integrated_propensity;
  Termination termination = Termination::reached_end;
  double end_time = 0.0;
};

/// Exact direct-method simulation of the jump process from `initial`,
/// driven by stream `stream::dynamics` of config.seed.
SsaTrajectory simulate(const ReactionNetwork& network, const State& initial, const SimConfig& config);

/// Either a fixed initial state or independent Poisson(M b_v) counts.
struct InitialLaw {
  std::optional<State> fixed;
  std::optional<PoissonParams> poisson;

  static InitialLaw deterministic(State s) { return {std::move(s), std::nullopt}; }
  static InitialLaw product_poisson(PoissonParams b) { return {std::nullopt, std::move(b)}; }
};

struct Replica {
  std::uint64_t seed = 0;
  State initial;
  SsaTrajectory trajectory;
  /// Empty on success; otherwise the error raised by simulate.
  std::string error;

  bool ok() const { return error.empty() && trajectory.termination != Termination::max_events; }
};

struct Ensemble {
  SimConfig config;
  std::vector<Replica> replicas;
};

/// Initial state of replica `index` under master seed `master`.
State draw_initial_state(const InitialLaw& law, double scale, std::uint64_t replica_seed);

/// Independent replicas; replica i uses seed derive_seed(config.seed, i).
/// Runs on `workers` OpenMP threads (0 = runtime default). The result does
/// not depend on the number of workers.
Ensemble run_ensemble(const ReactionNetwork& network, const InitialLaw& law, const SimConfig& config,
                      std::size_t replicas, int workers = 0);

/// Single-threaded reference for run_ensemble.
Ensemble run_ensemble_serial(const ReactionNetwork& network, const InitialLaw& law,
                             const SimConfig& config, std::size_t replicas);

/// Mean over successful replicas of n_v(t) / M, indexed [time][species].
std::vector<std::vector<double>> ensemble_mean_concentrations(const Ensemble& ensemble);

struct MeanFieldRow {
  double scale = 0.0;
  double error = 0.0;
  std::size_t failed_replicas = 0;
};

struct MeanFieldTable {
  std::vector<MeanFieldRow> rows;
  /// Least-squares slope of log error against log M.
  double exponent = 0.0;
  bool decreasing = false;
};

/// err(M) = max_{t, v} |mean n_v(t) / M - c_v(t)| starting from round(M c0),
/// for each M in `scales`. Ensemble k uses master seed derive_seed(seed, k).
MeanFieldTable meanfield_convergence(const ReactionNetwork& network, const Concentrations& c0,
                                     const std::vector<double>& scales,
                                     const std::vector<double>& sample_times, std::size_t replicas,
                                     std::uint64_t seed, int workers = 0);

struct MarginalTest {
  std::size_t species = 0;
  double time = 0.0;
  double chi_square = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
  /// z-scores of the factorial moments of order 1..3.
  std::vector<double> moment_z;
  bool passed = true;
};

struct StationarityReport {
  bool stationary = true;
  double alpha = 0.01;
  double bonferroni_alpha = 0.01;
  double z_threshold = 3.0;
  std::vector<MarginalTest> tests;
  std::size_t failed_replicas = 0;
};

/// Starts replicas from product-Poisson(M b) and compares every species
/// marginal at every sample time with Poisson(M b_v): chi-square on merged
/// bins (expected count >= 5) and factorial moments up to order 3, with a
/// Bonferroni correction over species and times.
StationarityReport stationarity_test(const ReactionNetwork& network, const PoissonParams& b,
                                     const SimConfig& config, std::size_t replicas, double alpha = 0.01,
                                     int workers = 0);

}  // namespace kinetica
