#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "kinetica/dsl.hpp"
#include "kinetica/exact_linear.hpp"
#include "kinetica/fluctuations.hpp"
#include "kinetica/io.hpp"
#include "kinetica/kinetics.hpp"
#include "kinetica/lattice.hpp"
#include "kinetica/reversibility.hpp"
#include "kinetica/ssa.hpp"

namespace fs = std::filesystem;
using namespace kinetica;
using io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;
constexpr int kExitFailure = 3;

/// Bad flag values or inconsistent options; maps to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError(fmt::format("'{}' is not a number", s));
  }
  if (used != s.size()) throw UsageError(fmt::format("'{}' is not a number", s));
  return x;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number(item));
  return out;
}

std::vector<std::vector<double>> parse_vectors(const std::string& text) {
  std::vector<std::vector<double>> out;
  for (const auto& item : split(text, ';'))
    if (!item.empty()) out.push_back(parse_list(item));
  return out;
}

std::vector<double> uniform_grid(double t_end, std::size_t samples) {
  if (samples < 2) throw UsageError("at least two samples are required");
  std::vector<double> grid(samples);
  for (std::size_t i = 0; i < samples; ++i)
    grid[i] = t_end * static_cast<double>(i) / static_cast<double>(samples - 1);
  return grid;
}

/// Common state of every verb.
struct Context {
  std::string network_path;
  std::string out_dir = "kinetica_out";
  std::string config_path;
  std::string seed_text;
  int workers = 0;

  std::uint64_t seed = 0;
  std::string seed_source;

  void resolve_seed() {
    if (!seed_text.empty()) {
      seed = std::stoull(seed_text);
      seed_source = "flag";
    } else if (const char* env = std::getenv("KINETICA_SEED"); env && *env) {
      try {
        seed = std::stoull(env);
      } catch (const std::exception&) {
        throw UsageError("KINETICA_SEED is not an unsigned integer");
      }
      seed_source = "environment";
    } else {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      seed_source = "entropy";
    }
  }

  ReactionNetwork load() const {
    if (network_path.empty()) throw UsageError("--network is required");
    return load_network(network_path);
  }

  Json manifest(const std::string& verb) const {
    Json m;
    m["verb"] = verb;
    m["network"] = fs::path(network_path).filename().string();
    m["seed"] = seed;
    m["seed_source"] = seed_source;
    return m;
  }
};

void add_common(CLI::App* sub, Context& ctx) {
  sub->add_option("--network", ctx.network_path, "Network file");
  sub->add_option("--out", ctx.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--seed", ctx.seed_text, "Master seed (unsigned 64-bit)")
      ->check([](const std::string& s) -> std::string {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return "seed must be an unsigned integer";
        try {
          (void)std::stoull(s);
        } catch (const std::exception&) {
          return "seed out of range";
        }
        return {};
      });
  sub->add_option("--workers", ctx.workers, "Worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  sub->add_option("--config", ctx.config_path, "JSON overlay with option values keyed by long flag name");
}

/// Fills options not given on the command line from the JSON overlay.
void apply_overlay(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot read config {}", path));
  Json overlay;
  try {
    overlay = Json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError(fmt::format("config {} is not valid JSON: {}", path, e.what()));
  }
  if (!overlay.is_object()) throw UsageError("config overlay must be a JSON object");
  for (const auto& [key, value] : overlay.items()) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw UsageError(fmt::format("unknown config key '{}'", key));
    if (opt->count() > 0) continue;
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i)
        text += (i ? "," : "") + (value[i].is_string() ? value[i].get<std::string>() : value[i].dump());
    } else {
      text = value.dump();
    }
    opt->add_result(text);
    opt->run_callback();
  }
}

fs::path out_path(const Context& ctx, const std::string& name) { return fs::path(ctx.out_dir) / name; }

// ---------------------------------------------------------------- validate

int run_validate(Context& ctx) {
  const auto net = ctx.load();
  Json report;
  report["species"] = net.species_names();
  Json reactions = Json::array();
  for (std::size_t r = 0; r < net.reaction_count(); ++r)
    reactions.push_back({{"label", net.reaction_label(r)},
                         {"rate", net.reaction(r).rate},
                         {"kind", std::string(to_string(net.reaction(r).kind))}});
  report["reactions"] = reactions;
  Json pairs = Json::array();
  for (const auto& [a, b] : net.inverse_pairs()) pairs.push_back({a, b});
  report["inverse_pairs"] = pairs;
  report["closed"] = net.is_closed();
  report["conservation_laws"] = conservation_laws(net);
  report["additive_integrals"] = additive_integrals(net);
  Json schloegl;
  if (const auto rates = schloegl_rates(net)) {
    const auto cls = schloegl_classify((*rates)[0], (*rates)[1], (*rates)[2], (*rates)[3]);
    schloegl = {{"case", to_string(cls.kind)}, {"b", cls.b ? Json(*cls.b) : Json()}};
    std::cerr << "Schloegl pattern: " << to_string(cls.kind) << "\n";
  }
  report["schloegl"] = schloegl;
  io::write_json(out_path(ctx, "report.json"), report);
  std::cerr << fmt::format("valid network: {} species, {} reactions\n", net.species_count(), net.reaction_count());
  return kExitOk;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string b;
  double tolerance = kDefaultTolerance;
  double scale = 1.0;
  std::size_t flow_samples = 64;
  std::string box;
  std::string clamp;
};

StateBox parse_box(const std::string& text, const ReactionNetwork& net, double scale) {
  StateBox box;
  box.scale = scale;
  for (const auto& item : split(text, ',')) {
    const auto bounds = split(item, ':');
    if (bounds.size() != 2) throw UsageError("box entries must look like lo:hi");
    box.lower.push_back(static_cast<std::int64_t>(parse_number(bounds[0])));
    box.upper.push_back(static_cast<std::int64_t>(parse_number(bounds[1])));
  }
  if (box.lower.size() != net.species_count()) throw UsageError("--box needs one lo:hi pair per species");
  return box;
}

int run_analyze(Context& ctx, const AnalyzeArgs& args) {
  const auto net = with_inferred_inverse_pairs(ctx.load());
  Json report;
  bool violation = false;

  const auto measure = solve_reversible_measure(net, args.tolerance);
  report["reversible_measure"] = io::to_json(measure);
  if (!measure.holds()) violation = true;

  std::optional<PoissonParams> b;
  std::string b_source;
  if (!args.b.empty()) {
    b = PoissonParams(parse_list(args.b));
    b_source = "flag";
  } else if (measure.witness) {
    b = measure.witness;
    b_source = "reversible_measure";
  } else if (net.species_count() > 0) {
    // A unitary network is unitary at each of its fixed points.
    const auto fp = find_fixed_points(net, {Concentrations(net.species_count(), 1.0)});
    for (const auto& p : fp.points)
      if (std::all_of(p.c.begin(), p.c.end(), [](double x) { return x > 0.0; })) {
        b = PoissonParams(p.c);
        b_source = "fixed_point";
        break;
      }
  }
  report["b_source"] = b ? Json(b_source) : Json();
  if (b) {
    const auto unitarity = check_unitarity(net, *b, args.tolerance);
    const auto balance = check_detailed_balance(net, *b, args.tolerance);
    const auto states = sample_poisson_states(*b, args.scale, args.flow_samples, ctx.seed);
    const auto flows = check_poisson_invariance_flows(net, *b, states, args.tolerance);
    report["unitarity"] = io::to_json(unitarity);
    report["detailed_balance"] = io::to_json(balance);
    report["poisson_flows"] = io::to_json(flows);
    violation = violation || !unitarity.holds() || !balance.holds() || !flows.holds();
    if (!args.clamp.empty()) {
      std::vector<std::size_t> clamped;
      std::vector<double> values;
      for (const auto& item : split(args.clamp, ',')) {
        const auto kv = split(item, '=');
        if (kv.size() != 2) throw UsageError("--clamp entries must look like NAME=value");
        const auto idx = net.species_index(kv[0]);
        if (!idx) throw UsageError(fmt::format("unknown species '{}'", kv[0]));
        clamped.push_back(*idx);
        values.push_back(parse_number(kv[1]));
      }
      if (balance.holds())
        report["clamped"] = io::to_json(clamped_reversibility_test(net, *b, clamped, values, args.tolerance));
      else
        report["clamped"] = Json();
    }
  } else {
    report["unitarity"] = Json();
    report["detailed_balance"] = Json();
    report["poisson_flows"] = Json();
    violation = true;
  }
  if (!args.box.empty()) {
    const auto kolmogorov = kolmogorov_criterion(net, parse_box(args.box, net, args.scale), args.tolerance);
    report["kolmogorov"] = io::to_json(kolmogorov);
    violation = violation || !kolmogorov.holds();
  }
  report["violation"] = violation;
  io::write_json(out_path(ctx, "analysis.json"), report);
  std::cerr << (violation ? "violation found\n" : "reversible\n");
  return violation ? kExitViolation : kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  double scale = 100.0;
  double t_end = 10.0;
  std::size_t samples = 101;
  std::size_t replicas = 1;
  std::string c0;
  std::string poisson;
  std::uint64_t max_events = 1'000'000'000;
};

Json sim_config_json(const SimConfig& config, std::size_t samples) {
  return {{"M", config.scale}, {"t_end", config.t_end}, {"samples", samples}, {"max_events", config.max_events}};
}

int run_simulate(Context& ctx, const SimulateArgs& args) {
  const auto net = ctx.load();
  SimConfig config;
  config.scale = args.scale;
  config.t_end = args.t_end;
  config.sample_times = uniform_grid(args.t_end, args.samples);
  config.seed = ctx.seed;
  config.max_events = args.max_events;
  InitialLaw law;
  if (!args.poisson.empty() && !args.c0.empty()) throw UsageError("--c0 and --poisson are exclusive");
  if (!args.poisson.empty())
    law = InitialLaw::product_poisson(PoissonParams(parse_list(args.poisson)));
  else if (!args.c0.empty())
    law = InitialLaw::deterministic(state_from_concentrations(parse_list(args.c0), args.scale));
  else
    throw UsageError("one of --c0 or --poisson is required");

  const auto ens = run_ensemble(net, law, config, args.replicas, ctx.workers);
  const auto names = net.species_names();
  Json manifest = ctx.manifest("simulate");
  manifest["config"] = sim_config_json(config, args.samples);
  Json reps = Json::array();
  bool any_failed = false;
  for (std::size_t i = 0; i < ens.replicas.size(); ++i) {
    const auto& rep = ens.replicas[i];
    const std::string file = fmt::format("replica_{:04d}.csv", i);
    Json entry = {{"index", i}, {"seed", rep.seed}, {"file", file}};
    if (rep.error.empty()) {
      io::write_text(out_path(ctx, file), io::trajectory_csv(names, rep.trajectory));
      entry["status"] = to_string(rep.trajectory.termination);
      entry["events"] = rep.trajectory.events;
    } else {
      entry["status"] = "failed";
      entry["error"] = rep.error;
      any_failed = true;
    }
    if (!rep.ok()) any_failed = true;
    reps.push_back(entry);
  }
  manifest["replicas"] = reps;
  io::write_json(out_path(ctx, "manifest.json"), manifest);
  return any_failed ? kExitFailure : kExitOk;
}

// ------------------------------------------------------------ fixed-points

std::vector<Concentrations> default_seeds(std::size_t V) {
  std::vector<Concentrations> seeds;
  for (double s : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) seeds.emplace_back(V, s);
  return seeds;
}

int run_fixed_points(Context& ctx, const std::string& seeds_text) {
  const auto net = ctx.load();
  const auto seeds = seeds_text.empty() ? default_seeds(net.species_count()) : parse_vectors(seeds_text);
  const auto result = find_fixed_points(net, seeds);
  Json out = io::to_json(result);
  out["species"] = net.species_names();
  io::write_json(out_path(ctx, "fixed_points.json"), out);
  std::cerr << fmt::format("{} fixed point(s)\n", result.points.size());
  return kExitOk;
}

// ------------------------------------------------------------ fluctuations

struct FluctuationArgs {
  std::string c_bar;
  std::string lags = "0,0.25,0.5,1,2";
  bool empirical = false;
  double scale = 1e4;
  std::size_t replicas = 64;
  double lag_step = 0.0;
  std::size_t lag_count = 10;
};

int run_fluctuations(Context& ctx, const FluctuationArgs& args) {
  const auto net = ctx.load();
  Concentrations c_bar;
  if (!args.c_bar.empty()) {
    c_bar = parse_list(args.c_bar);
  } else if (const auto measure = solve_reversible_measure(with_inferred_inverse_pairs(net)); measure.witness) {
    c_bar = measure.witness->values();
  } else {
    const auto fp = find_fixed_points(net, default_seeds(net.species_count()));
    for (const auto& p : fp.points)
      if (p.stability == Stability::stable && std::all_of(p.c.begin(), p.c.end(), [](double x) { return x > 0.0; })) {
        c_bar = p.c;
        break;
      }
    if (c_bar.empty()) throw std::runtime_error("no stable strictly positive fixed point found; pass --c-bar");
  }
  const auto lin = linearize(net, c_bar);
  const auto names = net.species_names();
  Json report;
  report["species"] = names;
  report["linearization"] = io::to_json(lin);
  report["onsager"] = io::to_json(check_onsager(lin));
  io::write_text(out_path(ctx, "lambda.csv"), io::matrix_csv(names, lin.lambda));
  io::write_text(out_path(ctx, "gamma.csv"), io::matrix_csv(names, lin.gamma));

  std::vector<CovarianceEstimate> theory;
  for (double lag : parse_list(args.lags)) {
    const auto phi = ou_covariance(lin, lag);
    theory.push_back({lag, phi, Eigen::MatrixXd::Zero(phi.rows(), phi.cols())});
  }
  io::write_text(out_path(ctx, "ou_covariance.csv"), io::covariance_csv(names, theory));

  double gap = 0.0;
  try {
    gap = spectral_gap(lin);
    report["kubo"] = io::to_json(kubo_check(lin));
  } catch (const NotHurwitzError& e) {
    report["kubo"] = Json();
    report["kubo_note"] = e.what();
  }

  if (args.empirical) {
    if (gap <= 0.0) throw std::runtime_error("empirical comparison needs a stable linearization");
    const double step = args.lag_step > 0.0 ? args.lag_step : 0.1 / gap;
    const double burn_in = 10.0 / gap;
    const double window = 20.0 / gap + step * static_cast<double>(args.lag_count);
    const auto samples = static_cast<std::size_t>(std::ceil((burn_in + window) / step)) + 1;
    SimConfig config;
    config.scale = args.scale;
    config.t_end = step * static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) config.sample_times.push_back(step * static_cast<double>(i));
    config.sample_times.back() = config.t_end;
    config.seed = ctx.seed;
    const auto ens = run_ensemble(net, InitialLaw::product_poisson(PoissonParams(c_bar)), config, args.replicas,
                                  ctx.workers);
    EmpiricalOptions opts;
    opts.burn_in = burn_in;
    opts.lag_steps.clear();
    for (std::size_t k = 0; k < args.lag_count; ++k) opts.lag_steps.push_back(k);
    const auto emp = empirical_fluctuations(ens, opts);
    io::write_text(out_path(ctx, "empirical_covariance.csv"), io::covariance_csv(names, emp.covariance));
    double worst = 0.0;
    for (const auto& est : emp.covariance) {
      const auto phi = ou_covariance(lin, est.lag);
      for (Eigen::Index v = 0; v < phi.rows(); ++v)
        for (Eigen::Index w = 0; w < phi.cols(); ++w) {
          const double se = est.standard_error(v, w);
          if (se > 0.0) worst = std::max(worst, std::abs(est.value(v, w) - phi(v, w)) / se);
        }
    }
    report["empirical"] = {{"M", args.scale},
                           {"replicas", emp.replicas_used},
                           {"lag_step", step},
                           {"burn_in", burn_in},
                           {"max_abs_z", worst}};
  }
  Json manifest = ctx.manifest("fluctuations");
  io::write_json(out_path(ctx, "fluctuations.json"), report);
  io::write_json(out_path(ctx, "manifest.json"), manifest);
  return kExitOk;
}

// ------------------------------------------------------------------ lattice

struct LatticeArgs {
  int dimension = 1;
  std::string extent = "100";
  std::string jumps;
  double epsilon = 0.1;
  std::string scaling = "euler";
  std::string profile;
  std::string taus = "0,1";
  std::size_t refine = 4;
  bool no_pde = false;
  std::string epsilons;
  std::size_t replicas = 32;
  bool control = false;
};

LatticeConfig build_lattice(const LatticeArgs& args, const ReactionNetwork& net) {
  LatticeConfig config;
  config.dimension = args.dimension;
  const auto ext = parse_list(args.extent);
  if (ext.size() != static_cast<std::size_t>(args.dimension)) throw UsageError("--extent needs one entry per axis");
  for (std::size_t a = 0; a < ext.size(); ++a) config.extent[a] = static_cast<std::size_t>(ext[a]);
  config.epsilon = args.epsilon;
  config.scaling = scaling_from_string(args.scaling);
  config.jump_rates.assign(net.species_count(), {0.0, 0.0, 0.0, 0.0});
  for (const auto& item : split(args.jumps, ';')) {
    if (item.empty()) continue;
    const auto kv = split(item, '=');
    if (kv.size() != 2) throw UsageError("--jumps entries must look like NAME=r+x,r-x[,r+y,r-y]");
    const auto idx = net.species_index(kv[0]);
    if (!idx) throw UsageError(fmt::format("unknown species '{}'", kv[0]));
    const auto rates = parse_list(kv[1]);
    if (rates.size() != 2 && rates.size() != 4) throw UsageError("each species needs 2 or 4 jump rates");
    for (std::size_t d = 0; d < rates.size(); ++d) config.jump_rates[*idx][d] = rates[d];
  }
  return config;
}

/// NAME=const:c | sin:base:amp:period | siny:base:amp:period | step:lo:hi:x0:x1 |
/// gauss:base:amp:center:width, joined by ';'.
Profile parse_profile(const std::string& text, const ReactionNetwork& net) {
  struct Piece {
    std::string kind;
    std::vector<double> p;
  };
  std::vector<std::optional<Piece>> pieces(net.species_count());
  for (const auto& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto kv = split(item, '=');
    if (kv.size() != 2) throw UsageError("--profile entries must look like NAME=kind:args");
    const auto idx = net.species_index(kv[0]);
    if (!idx) throw UsageError(fmt::format("unknown species '{}'", kv[0]));
    auto parts = split(kv[1], ':');
    Piece piece{parts.front(), {}};
    for (std::size_t i = 1; i < parts.size(); ++i) piece.p.push_back(parse_number(parts[i]));
    const std::map<std::string, std::size_t> arity{{"const", 1}, {"sin", 3}, {"siny", 3}, {"step", 4}, {"gauss", 4}};
    const auto it = arity.find(piece.kind);
    if (it == arity.end()) throw UsageError(fmt::format("unknown profile kind '{}'", piece.kind));
    if (piece.p.size() != it->second)
      throw UsageError(fmt::format("profile '{}' takes {} parameters", piece.kind, it->second));
    pieces[*idx] = piece;
  }
  for (std::size_t v = 0; v < pieces.size(); ++v)
    if (!pieces[v]) throw UsageError(fmt::format("no profile for species '{}'", net.species_names()[v]));
  return [pieces](std::size_t v, double x, double y) {
    constexpr double two_pi = 6.283185307179586;
    const auto& pc = *pieces[v];
    const auto& p = pc.p;
    if (pc.kind == "const") return p[0];
    if (pc.kind == "sin") return p[0] + p[1] * std::sin(two_pi * x / p[2]);
    if (pc.kind == "siny") return p[0] + p[1] * std::sin(two_pi * y / p[2]);
    if (pc.kind == "step") return (x >= p[2] && x < p[3]) ? p[1] : p[0];
    return p[0] + p[1] * std::exp(-0.5 * (x - p[2]) * (x - p[2]) / (p[3] * p[3]));
  };
}

Json lattice_json(const LatticeConfig& config) {
  Json jumps = Json::array();
  for (const auto& j : config.jump_rates) jumps.push_back(j);
  return {{"dimension", config.dimension},
          {"extent", {config.extent[0], config.extent[1]}},
          {"epsilon", config.epsilon},
          {"scaling", to_string(config.scaling)},
          {"jump_rates", jumps}};
}

int run_lattice(Context& ctx, const LatticeArgs& args) {
  const auto net = ctx.load();
  const auto config = build_lattice(args, net);
  const auto profile = parse_profile(args.profile, net);
  const auto taus = parse_list(args.taus);
  const auto names = net.species_names();
  const auto run = simulate_lattice(net, config, profile, taus, ctx.seed);
  io::write_text(out_path(ctx, "field.csv"), io::lattice_csv(names, config, run));
  Json manifest = ctx.manifest("lattice");
  manifest["config"] = lattice_json(config);
  manifest["events"] = run.events;
  manifest["truncated"] = run.truncated;
  if (!args.no_pde) {
    PdeOptions opts;
    opts.refine = args.refine;
    opts.workers = ctx.workers;
    const auto pde = reference_pde(net, config, profile, taus, opts);
    io::write_text(out_path(ctx, "pde.csv"), io::pde_csv(names, config, pde));
    manifest["pde"] = {{"dt", pde.dt}, {"refine", args.refine}, {"clip_events", pde.clip_events}};
  }
  io::write_json(out_path(ctx, "manifest.json"), manifest);
  return run.truncated ? kExitFailure : kExitOk;
}

// -------------------------------------------------------------- convergence

struct ConvergenceArgs {
  std::string mode = "meanfield";
  std::string c0;
  std::string scales = "100,1000,10000";
  double t_end = 10.0;
  std::size_t samples = 21;
  LatticeArgs lattice;
};

int run_convergence(Context& ctx, const ConvergenceArgs& args) {
  const auto net = ctx.load();
  Json out;
  std::string csv;
  if (args.mode == "meanfield") {
    if (args.c0.empty()) throw UsageError("--c0 is required for meanfield convergence");
    const auto table = meanfield_convergence(net, parse_list(args.c0), parse_list(args.scales),
                                             uniform_grid(args.t_end, args.samples), args.lattice.replicas,
                                             ctx.seed, ctx.workers);
    out = io::to_json(table);
    csv = "M,error\n";
    for (const auto& r : table.rows) csv += io::format_number(r.scale) + "," + io::format_number(r.error) + "\n";
  } else if (args.mode == "scaling") {
    const auto config = build_lattice(args.lattice, net);
    ScalingOptions opts;
    opts.replicas = args.lattice.replicas;
    opts.seed = ctx.seed;
    opts.workers = ctx.workers;
    opts.control = args.lattice.control;
    opts.pde.refine = args.lattice.refine;
    opts.pde.workers = ctx.workers;
    const auto eps = args.lattice.epsilons.empty() ? std::vector<double>{config.epsilon}
                                                   : parse_list(args.lattice.epsilons);
    const auto table = scaling_convergence(net, config, eps, parse_profile(args.lattice.profile, net),
                                           parse_list(args.lattice.taus), opts);
    out = io::to_json(table);
    csv = "epsilon,error,control_error\n";
    for (const auto& r : table.rows)
      csv += io::format_number(r.epsilon) + "," + io::format_number(r.error) + "," +
             (r.control_error ? io::format_number(*r.control_error) : "") + "\n";
  } else {
    throw UsageError("--mode must be meanfield or scaling");
  }
  io::write_json(out_path(ctx, "convergence.json"), out);
  io::write_text(out_path(ctx, "convergence.csv"), csv);
  io::write_json(out_path(ctx, "manifest.json"), ctx.manifest("convergence"));
  return kExitOk;
}

void add_lattice_options(CLI::App* sub, LatticeArgs& a) {
  sub->add_option("--dimension", a.dimension, "Lattice dimension (1 or 2)")->capture_default_str();
  sub->add_option("--extent", a.extent, "Sites per axis, comma separated")->capture_default_str();
  sub->add_option("--jumps", a.jumps, "NAME=r+x,r-x[,r+y,r-y];...");
  sub->add_option("--epsilon", a.epsilon, "Scaling parameter")->capture_default_str();
  sub->add_option("--scaling", a.scaling, "euler, diffusive or anisotropic")->capture_default_str();
  sub->add_option("--profile", a.profile, "Initial profile, NAME=kind:args;...");
  sub->add_option("--taus", a.taus, "Macroscopic sample times, comma separated")->capture_default_str();
  sub->add_option("--refine", a.refine, "PDE grid points per site")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mass-action reaction networks: reversibility, kinetics, fluctuations and simulation"};
  app.require_subcommand(1);
  Context ctx;

  auto* validate = app.add_subcommand("validate", "Parse a network and report its structure");
  add_common(validate, ctx);

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Unitarity, detailed balance and Kolmogorov reports");
  add_common(analyze, ctx);
  analyze->add_option("--b", analyze_args.b, "Poisson parameters to test, comma separated");
  analyze->add_option("--tolerance", analyze_args.tolerance, "Residual tolerance")->capture_default_str();
  analyze->add_option("--M", analyze_args.scale, "Scale for sampled states and the state box")->capture_default_str();
  analyze->add_option("--flow-samples", analyze_args.flow_samples, "Sampled states for the flow check")
      ->capture_default_str();
  analyze->add_option("--box", analyze_args.box, "State box lo:hi per species for the Kolmogorov test");
  analyze->add_option("--clamp", analyze_args.clamp, "NAME=value,... species held fixed");

  SimulateArgs sim_args;
  auto* simulate_cmd = app.add_subcommand("simulate", "Stochastic simulation ensemble");
  add_common(simulate_cmd, ctx);
  simulate_cmd->add_option("--M", sim_args.scale, "Volume scale")->capture_default_str();
  simulate_cmd->add_option("--t-end", sim_args.t_end, "End time")->capture_default_str();
  simulate_cmd->add_option("--samples", sim_args.samples, "Uniform sample count")->capture_default_str();
  simulate_cmd->add_option("--replicas", sim_args.replicas, "Replica count")->capture_default_str();
  simulate_cmd->add_option("--c0", sim_args.c0, "Initial concentrations; counts are round(M c0)");
  simulate_cmd->add_option("--poisson", sim_args.poisson, "Poisson parameters b of the initial law");
  simulate_cmd->add_option("--max-events", sim_args.max_events, "Event budget per replica")->capture_default_str();

  std::string seeds_text;
  auto* fixed = app.add_subcommand("fixed-points", "Fixed points of the kinetic equations");
  add_common(fixed, ctx);
  fixed->add_option("--seeds", seeds_text, "Seeds as c1,c2;c1,c2;...");

  FluctuationArgs fl_args;
  auto* fluct = app.add_subcommand("fluctuations", "Linearization, Onsager, OU covariance and Kubo");
  add_common(fluct, ctx);
  fluct->add_option("--c-bar", fl_args.c_bar, "Fixed point; found automatically when omitted");
  fluct->add_option("--lags", fl_args.lags, "Lags for the OU covariance")->capture_default_str();
  fluct->add_flag("--empirical", fl_args.empirical, "Compare with a stochastic ensemble");
  fluct->add_option("--M", fl_args.scale, "Volume scale of the ensemble")->capture_default_str();
  fluct->add_option("--replicas", fl_args.replicas, "Replica count")->capture_default_str();
  fluct->add_option("--lag-step", fl_args.lag_step, "Sample spacing (default 0.1 / spectral gap)");
  fluct->add_option("--lag-count", fl_args.lag_count, "Number of empirical lags")->capture_default_str();

  LatticeArgs lat_args;
  auto* lattice = app.add_subcommand("lattice", "Lattice simulation and reference PDE");
  add_common(lattice, ctx);
  add_lattice_options(lattice, lat_args);
  lattice->add_flag("--no-pde", lat_args.no_pde, "Skip the reference PDE");

  ConvergenceArgs conv_args;
  auto* conv = app.add_subcommand("convergence", "Mean-field or lattice scaling convergence tables");
  add_common(conv, ctx);
  conv->add_option("--mode", conv_args.mode, "meanfield or scaling")->capture_default_str();
  conv->add_option("--c0", conv_args.c0, "Initial concentrations (meanfield)");
  conv->add_option("--M-list", conv_args.scales, "Scales M, comma separated")->capture_default_str();
  conv->add_option("--t-end", conv_args.t_end, "End time (meanfield)")->capture_default_str();
  conv->add_option("--samples", conv_args.samples, "Uniform sample count (meanfield)")->capture_default_str();
  conv->add_option("--replicas", conv_args.lattice.replicas, "Replicas per ensemble")->capture_default_str();
  conv->add_option("--epsilon-list", conv_args.lattice.epsilons, "Decreasing epsilons (scaling)");
  conv->add_flag("--control", conv_args.lattice.control, "Also run the reaction-free control (scaling)");
  add_lattice_options(conv, conv_args.lattice);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    apply_overlay(sub, ctx.config_path);
    ctx.resolve_seed();
    if (sub == validate) return run_validate(ctx);
    if (sub == analyze) return run_analyze(ctx, analyze_args);
    if (sub == simulate_cmd) return run_simulate(ctx, sim_args);
    if (sub == fixed) return run_fixed_points(ctx, seeds_text);
    if (sub == fluct) return run_fluctuations(ctx, fl_args);
    if (sub == lattice) return run_lattice(ctx, lat_args);
    if (sub == conv) return run_convergence(ctx, conv_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
