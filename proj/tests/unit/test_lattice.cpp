#include <doctest.h>

#include <cmath>
#include <numeric>

#include "kinetica/dsl.hpp"
#include "kinetica/lattice.hpp"

using namespace kinetica;

namespace {

LatticeConfig drift_config(double epsilon, std::size_t sites) {
  LatticeConfig config;
  config.dimension = 1;
  config.extent = {sites, 1};
  config.jump_rates = {{0.75, 0.25, 0.0, 0.0}, {0.75, 0.25, 0.0, 0.0}};
  config.epsilon = epsilon;
  config.scaling = Scaling::euler;
  return config;
}

const double kPi = std::acos(-1.0);

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("scaling names") {
    for (auto s : {Scaling::euler, Scaling::diffusive, Scaling::anisotropic})
      CHECK(scaling_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(scaling_from_string("ballistic"), ValidationError);
  }

  TEST_CASE("drift, diffusivity and spacings") {
    const auto config = drift_config(0.1, 40);
    CHECK(config.drift(0)[0] == doctest::Approx(0.5));
    CHECK(config.diffusivity(0)[0] == doctest::Approx(0.5));
    CHECK(config.spacing(0) == doctest::Approx(0.1));
    CHECK(config.domain_length(0) == doctest::Approx(4.0));
    CHECK(config.reaction_rate_scale() == doctest::Approx(0.1));
    CHECK(config.time_factor() == doctest::Approx(10.0));

    LatticeConfig aniso;
    aniso.dimension = 2;
    aniso.extent = {10, 100};
    aniso.jump_rates = {{0.5, 0.5, 0.75, 0.25}};
    aniso.epsilon = 0.1;
    aniso.scaling = Scaling::anisotropic;
    CHECK(aniso.spacing(1) == doctest::Approx(0.01));
    CHECK(aniso.reaction_rate_scale() == doctest::Approx(0.01));
    CHECK_NOTHROW(aniso.validate(parse_network("A -> 0 @ 1\n")));
  }

  TEST_CASE("scaling preconditions") {
    const auto net = parse_network("A <=> B @ 1, 1\n");
    auto config = drift_config(0.1, 10);
    config.scaling = Scaling::diffusive;
    CHECK_THROWS_AS(config.validate(net), ValidationError);
    config.jump_rates = {{0.5, 0.5, 0, 0}, {0.5, 0.5, 0, 0}};
    CHECK_NOTHROW(config.validate(net));
    config.scaling = Scaling::euler;
    CHECK_THROWS_AS(config.validate(net), ValidationError);
    config.scaling = Scaling::anisotropic;
    CHECK_THROWS_AS(config.validate(net), ValidationError);
    auto bad = drift_config(1.5, 10);
    CHECK_THROWS_AS(bad.validate(net), ValidationError);
    auto y_jump = drift_config(0.1, 10);
    y_jump.jump_rates[0][2] = 1.0;
    CHECK_THROWS_AS(y_jump.validate(net), ValidationError);
  }

  TEST_CASE("pure transport conserves particles") {
    const auto net = without_reactions(parse_network("A <=> B @ 1, 1\n"));
    const auto config = drift_config(0.1, 20);
    const auto run = simulate_lattice(net, config, [](std::size_t, double, double) { return 3.0; }, {0.0, 1.0}, 5);
    REQUIRE(run.fields.size() == 2);
    for (std::size_t v = 0; v < 2; ++v) {
      std::int64_t before = 0, after = 0;
      for (std::size_t s = 0; s < 20; ++s) {
        before += run.fields[0][s * 2 + v];
        after += run.fields[1][s * 2 + v];
      }
      CHECK(before == after);
    }
    CHECK(run.reaction_events == 0);
    CHECK(run.jump_events == run.events);
  }

  TEST_CASE("lattice runs are reproducible") {
    const auto net = parse_network("A <=> B @ 1, 1\n");
    const auto config = drift_config(0.1, 20);
    const auto profile = [](std::size_t v, double x, double) { return v == 0 ? 1.0 + 0.5 * std::sin(kPi * x / 2) : 1.0; };
    const auto a = simulate_lattice(net, config, profile, {0.0, 0.5}, 42);
    const auto b = simulate_lattice(net, config, profile, {0.0, 0.5}, 42);
    CHECK(a.fields == b.fields);
    CHECK(a.events == b.events);
    CHECK(simulate_lattice(net, config, profile, {0.0, 0.5}, 43).fields != a.fields);
  }

  TEST_CASE("reference PDE advects a profile with the drift") {
    const auto net = without_reactions(parse_network("A -> 0 @ 1\n"));
    LatticeConfig config;
    config.extent = {100, 1};
    config.jump_rates = {{0.75, 0.25, 0, 0}};
    config.epsilon = 0.1;
    // Domain length 10; profile 1 + 0.5 sin(2 pi x / 10) moves right at speed 0.5.
    const auto profile = [](std::size_t, double x, double) { return 1.0 + 0.5 * std::sin(2 * kPi * x / 10.0); };
    PdeOptions options;
    options.refine = 8;
    const auto pde = reference_pde(net, config, profile, {0.0, 2.0}, options);
    double err = 0.0;
    for (double x = 0.0; x < 10.0; x += 0.25)
      err = std::max(err, std::abs(pde.sample(1, 0, 1, x, 0.0) - profile(0, x - 1.0, 0.0)));
    CHECK(err < 0.02);
  }

  TEST_CASE("reference PDE reactions follow the rate equation") {
    const auto net = parse_network("A <=> B @ 1, 2\n");
    auto config = drift_config(0.1, 10);
    const auto pde = reference_pde(net, config, [](std::size_t v, double, double) { return v == 0 ? 3.0 : 0.0; },
                                   {0.0, 1.0});
    // Uniform data: c_A(t) = 2 + exp(-3t).
    CHECK(pde.sample(1, 0, 2, 0.35, 0.0) == doctest::Approx(2.0 + std::exp(-3.0)).epsilon(1e-6));
  }

  TEST_CASE("serial and parallel PDE agree exactly") {
    const auto net = parse_network("A <=> B @ 1, 2\n");
    const auto config = drift_config(0.05, 80);
    const auto profile = [](std::size_t v, double x, double) { return v == 0 ? 1.0 + 0.5 * std::cos(kPi * x / 2) : 0.5; };
    PdeOptions serial;
    serial.parallel = false;
    PdeOptions parallel;
    parallel.workers = 3;
    CHECK(reference_pde(net, config, profile, {0.0, 0.7}, serial).fields ==
          reference_pde(net, config, profile, {0.0, 0.7}, parallel).fields);
    PdeOptions unstable;
    unstable.dt = 10.0;
    CHECK_THROWS_AS(reference_pde(net, config, profile, {0.0, 1.0}, unstable), ValidationError);
  }

  TEST_CASE("scaling convergence at small size") {
    const auto net = parse_network("A <=> B @ 1, 1\n");
    const auto profile = [](std::size_t v, double x, double) { return v == 0 ? 2.0 + std::sin(kPi * x / 2) : 1.0; };
    ScalingOptions options;
    options.replicas = 16;
    options.seed = 3;
    const auto table = scaling_convergence(net, drift_config(0.25, 16), {0.25, 0.125}, profile, {1.0}, options);
    REQUIRE(table.rows.size() == 2);
    for (const auto& row : table.rows) CHECK(row.error < 0.5);
    CHECK_THROWS_AS(scaling_convergence(net, drift_config(0.25, 16), {0.125, 0.25}, profile, {1.0}, options),
                    ValidationError);
  }
}
