#include "kinetica/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>
#include <omp.h>

#include "kinetica/rng.hpp"

namespace kinetica {

std::string to_string(Scaling scaling) {
  switch (scaling) {
    case Scaling::euler:
      return "euler";
    case Scaling::diffusive:
      return "diffusive";
    case Scaling::anisotropic:
      return "anisotropic";
  }
  return "euler";
}

Scaling scaling_from_string(const std::string& name) {
  if (name == "euler") return Scaling::euler;
  if (name == "diffusive") return Scaling::diffusive;
  if (name == "anisotropic") return Scaling::anisotropic;
  throw ValidationError(fmt::format("unknown scaling '{}'", name));
}

double LatticeConfig::reaction_rate_scale() const {
  return scaling == Scaling::euler ? epsilon : epsilon * epsilon;
}

double LatticeConfig::time_factor() const { return 1.0 / reaction_rate_scale(); }

double LatticeConfig::spacing(std::size_t axis) const {
  if (scaling == Scaling::anisotropic && axis == 1) return epsilon * epsilon;
  return epsilon;
}

double LatticeConfig::domain_length(std::size_t axis) const {
  return static_cast<double>(extent[axis]) * spacing(axis);
}

std::size_t LatticeConfig::site_count() const { return dimension == 2 ? extent[0] * extent[1] : extent[0]; }

std::array<double, 2> LatticeConfig::drift(std::size_t species) const {
  const auto& l = jump_rates.at(species);
  return {l[plus_x] - l[minus_x], l[plus_y] - l[minus_y]};
}

std::array<double, 2> LatticeConfig::diffusivity(std::size_t species) const {
  const auto& l = jump_rates.at(species);
  return {0.5 * (l[plus_x] + l[minus_x]), 0.5 * (l[plus_y] + l[minus_y])};
}

void LatticeConfig::validate(const ReactionNetwork& network) const {
  if (dimension != 1 && dimension != 2) throw ValidationError("lattice dimension must be 1 or 2");
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  if (extent[0] == 0 || (dimension == 2 && extent[1] == 0)) throw ValidationError("lattice extent must be positive");
  if (jump_rates.size() != network.species_count())
    throw ValidationError("jump rates must be given for every species");
  bool any_drift = false;
  bool any_x_drift = false;
  bool any_y_drift = false;
  for (std::size_t v = 0; v < jump_rates.size(); ++v) {
    for (double l : jump_rates[v])
      if (!(l >= 0.0) || !std::isfinite(l)) throw ValidationError("jump rates must be non-negative");
    if (dimension == 1 && (jump_rates[v][plus_y] != 0.0 || jump_rates[v][minus_y] != 0.0))
      throw ValidationError("a one-dimensional lattice has no y jumps");
    const auto m = drift(v);
    any_drift = any_drift || m[0] != 0.0 || m[1] != 0.0;
    any_x_drift = any_x_drift || m[0] != 0.0;
    any_y_drift = any_y_drift || m[1] != 0.0;
  }
  switch (scaling) {
    case Scaling::euler:
      if (!any_drift) throw ValidationError("euler scaling needs a non-zero drift");
      break;
    case Scaling::diffusive:
      if (any_drift) throw ValidationError("diffusive scaling needs zero drift for every species");
      break;
    case Scaling::anisotropic:
      if (dimension != 2) throw ValidationError("anisotropic scaling needs a two-dimensional lattice");
      if (any_x_drift) throw ValidationError("anisotropic scaling needs zero drift along x");
      if (!any_y_drift) throw ValidationError("anisotropic scaling needs a non-zero drift along y");
      break;
  }
}

namespace {

/// Binary indexed tree over non-negative weights.
template <class T>
class Fenwick {
 public:
  explicit Fenwick(std::size_t n = 0) : tree_(n + 1, T{}) {}

  std::size_t size() const { return tree_.size() - 1; }

  void add(std::size_t i, T delta) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  T total() const {
    T s{};
    for (std::size_t i = size(); i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  /// Smallest index whose inclusive prefix sum exceeds `target`.
  std::size_t find(T target) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 <= size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step <= size() && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    return std::min(pos, size() - 1);
  }

  void rebuild(const std::vector<T>& values) {
    std::fill(tree_.begin(), tree_.end(), T{});
    for (std::size_t i = 0; i < values.size(); ++i) tree_[i + 1] = values[i];
    for (std::size_t i = 1; i < tree_.size(); ++i) {
      const std::size_t parent = i + (i & (~i + 1));
      if (parent < tree_.size()) tree_[parent] += tree_[i];
    }
  }

 private:
  std::vector<T> tree_;
};

struct SiteGeometry {
  std::size_t nx = 1;
  std::size_t ny = 1;

  std::size_t neighbour(std::size_t site, std::size_t direction) const {
    const std::size_t x = site % nx;
    const std::size_t y = site / nx;
    switch (direction) {
      case plus_x:
        return (x + 1) % nx + nx * y;
      case minus_x:
        return (x + nx - 1) % nx + nx * y;
      case plus_y:
        return x + nx * ((y + 1) % ny);
      default:
        return x + nx * ((y + ny - 1) % ny);
    }
  }
};

}  // namespace

LatticeRun simulate_lattice(const ReactionNetwork& network, const LatticeConfig& config,
                            const Profile& profile, const std::vector<double>& taus, std::uint64_t seed) {
  config.validate(network);
  for (std::size_t k = 0; k < taus.size(); ++k)
    if (taus[k] < 0.0 || (k > 0 && !(taus[k] > taus[k - 1])))
      throw ValidationError("sample times must be non-negative and increasing");
  const std::size_t V = network.species_count();
  const std::size_t R = network.reaction_count();
  const std::size_t sites = config.site_count();
  const SiteGeometry geo{config.extent[0], config.dimension == 2 ? config.extent[1] : 1};

  Philox4x64 init_rng(seed, stream::initial_state);
  std::vector<std::int64_t> n(sites * V);
  for (std::size_t s = 0; s < sites; ++s) {
    const double x = static_cast<double>(s % geo.nx) * config.spacing(0);
    const double y = static_cast<double>(s / geo.nx) * config.spacing(1);
    for (std::size_t v = 0; v < V; ++v) {
      const double c = profile(v, x, y);
      if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("initial profile must be non-negative");
      if (c == 0.0) continue;
      std::poisson_distribution<std::int64_t> dist(c);
      n[s * V + v] = dist(init_rng);
    }
  }

  // Per-site reaction propensities with M = 1.
  const double kappa = config.reaction_rate_scale();
  std::vector<double> prefactor(R);
  std::vector<std::vector<std::pair<std::size_t, int>>> substrates(R);
  std::vector<std::vector<std::pair<std::size_t, int>>> changes(R);
  for (std::size_t r = 0; r < R; ++r) {
    const auto& rx = network.reaction(r);
    prefactor[r] = kappa * rx.rate;
    for (std::size_t v = 0; v < V; ++v) {
      if (rx.d_minus[v] > 0) substrates[r].push_back({v, rx.d_minus[v]});
      if (rx.d_plus[v] != rx.d_minus[v]) changes[r].push_back({v, rx.d_plus[v] - rx.d_minus[v]});
    }
  }
  auto reaction_rate = [&](std::size_t r, std::size_t site) {
    double p = prefactor[r];
    for (const auto& [v, d] : substrates[r]) {
      const double ff = falling_factorial(n[site * V + v], d);
      if (ff == 0.0) return 0.0;
      p *= ff;
    }
    return p;
  };
  auto site_rate = [&](std::size_t site) {
    double s = 0.0;
    for (std::size_t r = 0; r < R; ++r) s += reaction_rate(r, site);
    return s;
  };

  std::vector<double> site_rates(sites);
  for (std::size_t s = 0; s < sites; ++s) site_rates[s] = site_rate(s);
  Fenwick<double> reaction_tree(sites);
  reaction_tree.rebuild(site_rates);

  std::vector<double> jump_total(V, 0.0);
  for (std::size_t v = 0; v < V; ++v)
    for (double l : config.jump_rates[v]) jump_total[v] += l;
  std::vector<Fenwick<std::int64_t>> count_tree(V, Fenwick<std::int64_t>(sites));
  std::vector<std::int64_t> particles(V, 0);
  for (std::size_t v = 0; v < V; ++v) {
    std::vector<std::int64_t> column(sites);
    for (std::size_t s = 0; s < sites; ++s) {
      column[s] = n[s * V + v];
      particles[v] += column[s];
    }
    count_tree[v].rebuild(column);
  }

  auto refresh_site = [&](std::size_t site) {
    const double updated = site_rate(site);
    reaction_tree.add(site, updated - site_rates[site]);
    site_rates[site] = updated;
  };
  auto change_count = [&](std::size_t site, std::size_t v, std::int64_t delta) {
    n[site * V + v] += delta;
    count_tree[v].add(site, delta);
    particles[v] += delta;
  };

  LatticeRun run;
  run.taus = taus;
  const double factor = config.time_factor();
  Philox4x64 rng(seed, stream::dynamics);
  double t = 0.0;
  std::size_t k = 0;
  constexpr std::uint64_t kRebuildInterval = 1 << 16;
  const double t_end = taus.empty() ? 0.0 : taus.back() * factor;
  while (k < taus.size() && taus[k] * factor <= t) {
    run.fields.push_back(n);
    ++k;
  }
  while (k < taus.size()) {
    if (run.events % kRebuildInterval == 0) reaction_tree.rebuild(site_rates);
    const double reaction_total = std::max(0.0, reaction_tree.total());
    double jump_sum = 0.0;
    for (std::size_t v = 0; v < V; ++v) jump_sum += jump_total[v] * static_cast<double>(particles[v]);
    const double total = reaction_total + jump_sum;
    const double t_next = total > 0.0 ? t + rng.exponential(total) : std::numeric_limits<double>::infinity();
    while (k < taus.size() && taus[k] * factor < t_next) {
      run.fields.push_back(n);
      ++k;
    }
    if (k == taus.size() || t_next > t_end) break;
    if (run.events == config.max_events) {
      run.truncated = true;
      break;
    }
    t = t_next;
    ++run.events;
    double u = rng.uniform() * total;
    if (u < reaction_total) {
      const std::size_t site = reaction_tree.find(u);
      double acc = 0.0;
      const double target = rng.uniform() * site_rates[site];
      std::size_t chosen = R;
      for (std::size_t r = 0; r < R; ++r) {
        const double a = reaction_rate(r, site);
        acc += a;
        if (a > 0.0 && target < acc) {
          chosen = r;
          break;
        }
      }
      if (chosen == R) {
        for (std::size_t r = R; r-- > 0;)
          if (reaction_rate(r, site) > 0.0) {
            chosen = r;
            break;
          }
        if (chosen == R) continue;  // stale tree weight; rebuilt shortly
      }
      for (const auto& [v, delta] : changes[chosen]) change_count(site, v, delta);
      refresh_site(site);
      ++run.reaction_events;
      continue;
    }
    u -= reaction_total;
    std::size_t v = 0;
    for (; v + 1 < V; ++v) {
      const double w = jump_total[v] * static_cast<double>(particles[v]);
      if (u < w) break;
      u -= w;
    }
    while (particles[v] == 0 || jump_total[v] == 0.0) v = (v + V - 1) % V;
    const auto which = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(particles[v]));
    const std::size_t from = count_tree[v].find(std::min(which, particles[v] - 1));
    double d = rng.uniform() * jump_total[v];
    std::size_t dir = 0;
    for (; dir < 3; ++dir) {
      if (d < config.jump_rates[v][dir] && config.jump_rates[v][dir] > 0.0) break;
      d -= config.jump_rates[v][dir];
    }
    while (config.jump_rates[v][dir] == 0.0) --dir;
    const std::size_t to = geo.neighbour(from, dir);
    change_count(from, v, -1);
    change_count(to, v, +1);
    if (R > 0) {
      refresh_site(from);
      refresh_site(to);
    }
    ++run.jump_events;
  }
  return run;
}

double PdeSolution::sample(std::size_t k, std::size_t species, std::size_t species_count, double x,
                           double y) const {
  const auto& f = fields.at(k);
  auto at = [&](std::size_t i, std::size_t j) { return f[(i + points[0] * j) * species_count + species]; };
  auto split = [](double pos, double h, std::size_t count, std::size_t& lo, std::size_t& hi) {
    const double period = h * static_cast<double>(count);
    double u = std::fmod(pos, period);
    if (u < 0.0) u += period;
    const double s = u / h;
    const auto base = static_cast<std::size_t>(std::floor(s));
    lo = base % count;
    hi = (base + 1) % count;
    return s - std::floor(s);
  };
  std::size_t x0, x1, y0 = 0, y1 = 0;
  const double fx = split(x, step[0], points[0], x0, x1);
  const double fy = points[1] > 1 ? split(y, step[1], points[1], y0, y1) : 0.0;
  return (1 - fx) * (1 - fy) * at(x0, y0) + fx * (1 - fy) * at(x1, y0) + (1 - fx) * fy * at(x0, y1) +
         fx * fy * at(x1, y1);
}

PdeSolution reference_pde(const ReactionNetwork& network, const LatticeConfig& config, const Profile& profile,
                          const std::vector<double>& taus, const PdeOptions& options) {
  config.validate(network);
  if (options.refine == 0) throw ValidationError("grid refinement must be positive");
  for (std::size_t k = 0; k < taus.size(); ++k)
    if (taus[k] < 0.0 || (k > 0 && !(taus[k] > taus[k - 1])))
      throw ValidationError("sample times must be non-negative and increasing");
  const std::size_t V = network.species_count();
  const std::size_t axes = static_cast<std::size_t>(config.dimension);

  PdeSolution sol;
  sol.taus = taus;
  for (std::size_t a = 0; a < axes; ++a) {
    sol.points[a] = config.extent[a] * options.refine;
    sol.step[a] = config.spacing(a) / static_cast<double>(options.refine);
  }
  const std::size_t nx = sol.points[0];
  const std::size_t ny = sol.points[1];
  const std::size_t cells = nx * ny;

  // Per-species transport coefficients of the limit equation.
  std::vector<std::array<double, 2>> velocity(V, {0.0, 0.0});
  std::vector<std::array<double, 2>> diffusion(V, {0.0, 0.0});
  for (std::size_t v = 0; v < V; ++v) {
    const auto m = config.drift(v);
    const auto d = config.diffusivity(v);
    switch (config.scaling) {
      case Scaling::euler:
        velocity[v] = m;
        break;
      case Scaling::diffusive:
        diffusion[v] = d;
        break;
      case Scaling::anisotropic:
        velocity[v] = {0.0, m[1]};
        diffusion[v] = {d[0], 0.0};
        break;
    }
  }
  double rate_bound = 0.0;
  for (std::size_t v = 0; v < V; ++v) {
    double r = 0.0;
    for (std::size_t a = 0; a < axes; ++a)
      r += std::abs(velocity[v][a]) / sol.step[a] + 2.0 * diffusion[v][a] / (sol.step[a] * sol.step[a]);
    rate_bound = std::max(rate_bound, r);
  }
  double dt = options.dt;
  if (dt <= 0.0) {
    dt = rate_bound > 0.0 ? 0.4 / rate_bound : 1e-2;
    dt = std::min(dt, 1e-2);
  }
  if (dt * rate_bound > 1.0)
    throw ValidationError(fmt::format("time step {} violates the stability bound {}", dt, 1.0 / rate_bound));
  sol.dt = dt;

  std::vector<double> c(cells * V);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t v = 0; v < V; ++v) {
        const double value = profile(v, static_cast<double>(i) * sol.step[0], static_cast<double>(j) * sol.step[1]);
        if (!(value >= 0.0) || !std::isfinite(value)) throw ValidationError("initial profile must be non-negative");
        c[(i + nx * j) * V + v] = value;
      }

  const int threads = options.workers > 0 ? options.workers : omp_get_max_threads();
  auto rhs = [&](const std::vector<double>& u, std::vector<double>& out) {
    const auto count = static_cast<std::int64_t>(cells);
#pragma omp parallel for schedule(static) num_threads(threads) if (options.parallel)
    for (std::int64_t idx = 0; idx < count; ++idx) {
      const auto cell = static_cast<std::size_t>(idx);
      const std::size_t i = cell % nx;
      const std::size_t j = cell / nx;
      const std::array<std::size_t, 2> forward{(i + 1) % nx + nx * j, i + nx * ((j + 1) % ny)};
      const std::array<std::size_t, 2> backward{(i + nx - 1) % nx + nx * j, i + nx * ((j + ny - 1) % ny)};
      Concentrations local(u.begin() + static_cast<std::ptrdiff_t>(cell * V),
                           u.begin() + static_cast<std::ptrdiff_t>((cell + 1) * V));
      const auto f = ode_rhs(network, local);
      for (std::size_t v = 0; v < V; ++v) {
        double du = f[v];
        const double here = u[cell * V + v];
        for (std::size_t a = 0; a < axes; ++a) {
          const double ahead = u[forward[a] * V + v];
          const double behind = u[backward[a] * V + v];
          const double m = velocity[v][a];
          const double h = sol.step[a];
          if (m > 0.0)
            du -= m * (here - behind) / h;
          else if (m < 0.0)
            du -= m * (ahead - here) / h;
          if (diffusion[v][a] != 0.0) du += diffusion[v][a] * (ahead - 2.0 * here + behind) / (h * h);
        }
        out[cell * V + v] = du;
      }
    }
  };

  std::vector<double> k1(c.size()), k2(c.size()), k3(c.size()), k4(c.size()), tmp(c.size());
  auto axpy = [](const std::vector<double>& x, double a, const std::vector<double>& y, std::vector<double>& out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * y[i];
  };
  double tau = 0.0;
  for (double target : taus) {
    while (tau < target - 1e-12 * std::max(1.0, target)) {
      const double h = std::min(dt, target - tau);
      rhs(c, k1);
      axpy(c, 0.5 * h, k1, tmp);
      rhs(tmp, k2);
      axpy(c, 0.5 * h, k2, tmp);
      rhs(tmp, k3);
      axpy(c, h, k3, tmp);
      rhs(tmp, k4);
      for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (c[i] < 0.0) {
          c[i] = 0.0;
          ++sol.clip_events;
        }
      }
      tau += h;
    }
    sol.fields.push_back(c);
  }
  return sol;
}

ReactionNetwork without_reactions(const ReactionNetwork& network) {
  return ReactionNetwork(network.species(), {}, {}, network.atom_types());
}

namespace {

/// Block-averaged site occupancy per (tau, block, species) for one replica.
std::vector<double> block_means(const LatticeRun& run, const LatticeConfig& config, std::size_t V,
                                const std::array<std::size_t, 2>& block, const std::array<std::size_t, 2>& blocks) {
  const std::size_t nx = config.extent[0];
  const std::size_t ny = config.dimension == 2 ? config.extent[1] : 1;
  const std::size_t block_count = blocks[0] * blocks[1];
  std::vector<double> out(run.fields.size() * block_count * V, 0.0);
  const double per_block = static_cast<double>(block[0] * block[1]);
  for (std::size_t k = 0; k < run.fields.size(); ++k)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t x = 0; x < nx; ++x) {
        const std::size_t b = x / block[0] + blocks[0] * (y / block[1]);
        for (std::size_t v = 0; v < V; ++v)
          out[(k * block_count + b) * V + v] += static_cast<double>(run.fields[k][(x + nx * y) * V + v]) / per_block;
      }
  return out;
}

std::size_t exact_ratio(double numerator, double denominator, const char* what) {
  const double q = numerator / denominator;
  const auto rounded = static_cast<std::size_t>(std::llround(q));
  if (rounded == 0 || std::abs(q - static_cast<double>(rounded)) > 1e-6 * q)
    throw ValidationError(fmt::format("{} is not an integer number of sites ({})", what, q));
  return rounded;
}

double measure(const ReactionNetwork& network, const LatticeConfig& config, const Profile& profile,
               const std::vector<double>& taus, const ScalingOptions& options, std::uint64_t master,
               std::size_t& truncated) {
  const std::size_t V = network.species_count();
  const std::size_t axes = static_cast<std::size_t>(config.dimension);
  std::array<std::size_t, 2> block{1, 1};
  std::array<std::size_t, 2> blocks{1, 1};
  for (std::size_t a = 0; a < axes; ++a) {
    block[a] = exact_ratio(1.0, config.spacing(a), "a unit macroscopic cell");
    blocks[a] = config.extent[a] / block[a];
    if (blocks[a] * block[a] != config.extent[a])
      throw ValidationError("the domain is not an integer number of unit cells");
  }
  const std::size_t R = options.replicas;
  std::vector<std::vector<double>> per_replica(R);
  std::vector<char> cut(R, 0);
  const int threads = options.workers > 0 ? options.workers : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(R);
  std::vector<std::string> errors(R);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const auto run = simulate_lattice(network, config, profile, taus, derive_seed(master, idx));
      cut[idx] = run.truncated ? 1 : 0;
      if (!run.truncated) per_replica[idx] = block_means(run, config, V, block, blocks);
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw ValidationError(e);
  std::vector<double> mean;
  std::size_t used = 0;
  for (std::size_t i = 0; i < R; ++i) {
    if (cut[i]) {
      ++truncated;
      continue;
    }
    if (mean.empty()) mean.assign(per_replica[i].size(), 0.0);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += per_replica[i][j];
    ++used;
  }
  if (used == 0) throw ValidationError("every lattice replica exhausted its event budget");
  for (auto& x : mean) x /= static_cast<double>(used);

  const auto pde = reference_pde(network, config, profile, taus, options.pde);
  const std::size_t block_count = blocks[0] * blocks[1];
  const std::size_t nx = config.extent[0];
  const std::size_t ny = config.dimension == 2 ? config.extent[1] : 1;
  std::vector<double> reference(mean.size(), 0.0);
  const double per_block = static_cast<double>(block[0] * block[1]);
  for (std::size_t k = 0; k < taus.size(); ++k)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t x = 0; x < nx; ++x) {
        const std::size_t b = x / block[0] + blocks[0] * (y / block[1]);
        const double px = static_cast<double>(x) * config.spacing(0);
        const double py = static_cast<double>(y) * config.spacing(1);
        for (std::size_t v = 0; v < V; ++v)
          reference[(k * block_count + b) * V + v] += pde.sample(k, v, V, px, py) / per_block;
      }
  double err = 0.0;
  for (std::size_t j = 0; j < mean.size(); ++j) err = std::max(err, std::abs(mean[j] - reference[j]));
  return err;
}

}  // namespace

ScalingTable scaling_convergence(const ReactionNetwork& network, const LatticeConfig& base,
                                 const std::vector<double>& epsilons, const Profile& profile,
                                 const std::vector<double>& taus, const ScalingOptions& options) {
  base.validate(network);
  if (epsilons.empty()) throw ValidationError("at least one epsilon is required");
  if (options.replicas == 0) throw ValidationError("at least one replica is required");
  for (std::size_t k = 1; k < epsilons.size(); ++k)
    if (!(epsilons[k] < epsilons[k - 1])) throw ValidationError("epsilons must be decreasing");
  const std::array<double, 2> length{base.domain_length(0), base.domain_length(1)};

  ScalingTable table;
  table.decreasing = true;
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    LatticeConfig config = base;
    config.epsilon = epsilons[k];
    for (std::size_t a = 0; a < static_cast<std::size_t>(config.dimension); ++a)
      config.extent[a] = exact_ratio(length[a], config.spacing(a), "the macroscopic domain");
    config.validate(network);
    ScalingRow row;
    row.epsilon = epsilons[k];
    const std::uint64_t master = derive_seed(options.seed, k);
    row.error = measure(network, config, profile, taus, options, master, row.truncated_replicas);
    if (options.control) {
      std::size_t ignored = 0;
      row.control_error = measure(without_reactions(network), config, profile, taus, options, master, ignored);
    }
    if (k > 0 && !(row.error < table.rows.back().error)) table.decreasing = false;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace kinetica
