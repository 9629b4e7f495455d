#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kinetica/network.hpp"

namespace kinetica {

enum class Scaling { euler, diffusive, anisotropic };

std::string to_string(Scaling scaling);
Scaling scaling_from_string(const std::string& name);

/// Jump directions, in this order, for every species.
enum Direction : std::size_t { plus_x = 0, minus_x = 1, plus_y = 2, minus_y = 3 };

struct LatticeConfig {
  int dimension = 1;
  /// Sites per axis; only the first `dimension` entries are used.
  std::array<std::size_t, 2> extent{1, 1};
  /// jump_rates[v][direction]; y rates must be zero in one dimension.
  std::vector<std::array<double, 4>> jump_rates;
  double epsilon = 0.1;
  Scaling scaling = Scaling::euler;
  std::uint64_t max_events = 2'000'000'000;

  /// Factor applied to every reaction rate: epsilon (euler) or epsilon^2.
  double reaction_rate_scale() const;
  /// Microscopic time per unit of macroscopic time.
  double time_factor() const;
  /// Macroscopic distance between neighbouring sites along an axis.
  double spacing(std::size_t axis) const;
  /// Macroscopic domain length along an axis.
  double domain_length(std::size_t axis) const;
  std::size_t site_count() const;
  /// m_v = sum_e e lambda_{e,v}, per axis.
  std::array<double, 2> drift(std::size_t species) const;
  /// (lambda_{+e} + lambda_{-e}) / 2, per axis.
  std::array<double, 2> diffusivity(std::size_t species) const;

  void validate(const ReactionNetwork& network) const;
};

/// Initial concentration c_v(0, X, Y) in macroscopic coordinates.
using Profile = std::function<double(std::size_t species, double x, double y)>;

struct LatticeRun {
  std::vector<double> taus;
  /// fields[k][site * V + v]; site = x + extent_x * y.
  std::vector<std::vector<std::int64_t>> fields;
  std::uint64_t events = 0;
  std::uint64_t reaction_events = 0;
  std::uint64_t jump_events = 0;
  bool truncated = false;
};

/// Exact event-driven simulation of per-site reactions (M = 1, rates scaled
/// by the configuration) and independent particle jumps on the periodic
/// lattice. Sites start independently Poisson(c_v(0, position)).
LatticeRun simulate_lattice(const ReactionNetwork& network, const LatticeConfig& config,
                            const Profile& profile, const std::vector<double>& taus,
                            std::uint64_t seed);

struct PdeOptions {
  /// Grid points per lattice site along each axis.
  std::size_t refine = 4;
  /// Time step; 0 picks 0.4 of the stability limit.
  double dt = 0.0;
  /// Evaluate the right-hand side with OpenMP.
  bool parallel = true;
  int workers = 0;
};

struct PdeSolution {
  std::vector<double> taus;
  std::array<std::size_t, 2> points{1, 1};
  std::array<double, 2> step{1.0, 1.0};
  double dt = 0.0;
  /// fields[k][point * V + v].
  std::vector<std::vector<double>> fields;
  std::size_t clip_events = 0;

  /// Periodic bilinear interpolation of field k at (x, y).
  double sample(std::size_t k, std::size_t species, std::size_t species_count, double x, double y) const;
};

/// Method-of-lines solution of the limit equation of `config.scaling`:
/// upwind advection by m_v, central diffusion with coefficient
/// (lambda_+ + lambda_-)/2 where the scaling keeps it, plus F_v(c).
/// Throws ValidationError when dt violates the stability bound.
PdeSolution reference_pde(const ReactionNetwork& network, const LatticeConfig& config,
                          const Profile& profile, const std::vector<double>& taus,
                          const PdeOptions& options = {});

struct ScalingRow {
  double epsilon = 0.0;
  double error = 0.0;
  /// Same measurement with every reaction removed (transport-only control).
  std::optional<double> control_error;
  std::size_t truncated_replicas = 0;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  bool decreasing = false;
};

struct ScalingOptions {
  std::size_t replicas = 128;
  std::uint64_t seed = 0;
  int workers = 0;
  bool control = false;
  PdeOptions pde;
};

/// For each epsilon, block-averages replica fields over cells of macroscopic
/// width 1 and reports the largest deviation from the reference PDE
/// averaged over the same cells. `base` fixes the macroscopic domain through
/// extent * spacing at its own epsilon.
ScalingTable scaling_convergence(const ReactionNetwork& network, const LatticeConfig& base,
                                 const std::vector<double>& epsilons, const Profile& profile,
                                 const std::vector<double>& taus, const ScalingOptions& options);

/// Network with the same species and no reactions.
ReactionNetwork without_reactions(const ReactionNetwork& network);

}  // namespace kinetica
