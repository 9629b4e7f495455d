#include "kinetica/io.hpp"

#include <fstream>

#include <fmt/format.h>

namespace kinetica::io {

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

void write_json(const std::filesystem::path& path, const Json& value) { write_text(path, value.dump(2) + "\n"); }

std::string trajectory_csv(const std::vector<std::string>& names, const SsaTrajectory& trajectory) {
  std::string out = "t";
  for (const auto& n : names) out += ",n_" + n;
  out += "\n";
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    out += format_number(trajectory.times[i]);
    for (auto c : trajectory.counts[i]) out += fmt::format(",{}", c);
    out += "\n";
  }
  return out;
}

std::string concentration_csv(const std::vector<std::string>& names, const std::vector<double>& times,
                              const std::vector<Concentrations>& states) {
  std::string out = "t";
  for (const auto& n : names) out += ",c_" + n;
  out += "\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += format_number(times[i]);
    for (double c : states[i]) out += "," + format_number(c);
    out += "\n";
  }
  return out;
}

std::string entropy_csv(const EntropySeries& series) {
  std::string out = "t,H\n";
  for (std::size_t i = 0; i < series.times.size(); ++i)
    out += format_number(series.times[i]) + "," + format_number(series.values[i]) + "\n";
  return out;
}

std::string matrix_csv(const std::vector<std::string>& names, const Eigen::MatrixXd& matrix) {
  std::string out;
  for (std::size_t j = 0; j < names.size(); ++j) out += (j ? "," : "") + names[j];
  out += "\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out += (j ? "," : "") + format_number(matrix(i, j));
    out += "\n";
  }
  return out;
}

std::string covariance_csv(const std::vector<std::string>& names, const std::vector<CovarianceEstimate>& estimates) {
  std::string out = "lag,v,w,value,stderr\n";
  for (const auto& e : estimates)
    for (Eigen::Index v = 0; v < e.value.rows(); ++v)
      for (Eigen::Index w = 0; w < e.value.cols(); ++w)
        out += fmt::format("{},{},{},{},{}\n", format_number(e.lag), names[static_cast<std::size_t>(v)],
                           names[static_cast<std::size_t>(w)], format_number(e.value(v, w)),
                           format_number(e.standard_error(v, w)));
  return out;
}

std::string lattice_csv(const std::vector<std::string>& names, const LatticeConfig& config, const LatticeRun& run) {
  const bool two_d = config.dimension == 2;
  std::string out = two_d ? "tau,X,Y,species,value\n" : "tau,X,species,value\n";
  const std::size_t nx = config.extent[0];
  const std::size_t sites = config.site_count();
  const std::size_t V = names.size();
  for (std::size_t k = 0; k < run.fields.size(); ++k)
    for (std::size_t s = 0; s < sites; ++s)
      for (std::size_t v = 0; v < V; ++v) {
        out += format_number(run.taus[k]) + "," + format_number(static_cast<double>(s % nx) * config.spacing(0));
        if (two_d) out += "," + format_number(static_cast<double>(s / nx) * config.spacing(1));
        out += fmt::format(",{},{}\n", names[v], run.fields[k][s * V + v]);
      }
  return out;
}

std::string pde_csv(const std::vector<std::string>& names, const LatticeConfig& config, const PdeSolution& solution) {
  const bool two_d = config.dimension == 2;
  std::string out = two_d ? "tau,X,Y,species,value\n" : "tau,X,species,value\n";
  const std::size_t nx = solution.points[0];
  const std::size_t cells = solution.points[0] * solution.points[1];
  const std::size_t V = names.size();
  for (std::size_t k = 0; k < solution.fields.size(); ++k)
    for (std::size_t s = 0; s < cells; ++s)
      for (std::size_t v = 0; v < V; ++v) {
        out += format_number(solution.taus[k]) + "," + format_number(static_cast<double>(s % nx) * solution.step[0]);
        if (two_d) out += "," + format_number(static_cast<double>(s / nx) * solution.step[1]);
        out += fmt::format(",{},{}\n", names[v], format_number(solution.fields[k][s * V + v]));
      }
  return out;
}

namespace {

/// JSON has no infinities; they are written as strings.
Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

Json numbers(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

}  // namespace

Json matrix_json(const Eigen::MatrixXd& matrix) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) row.push_back(number(matrix(i, j)));
    out.push_back(row);
  }
  return out;
}

Json to_json(const ReversibilityReport& report) {
  Json out;
  out["status"] = to_string(report.status);
  out["witness"] = report.witness ? Json{{"b", numbers(report.witness->values())}} : Json();
  Json residuals = Json::array();
  for (const auto& r : report.residuals) residuals.push_back({{"id", r.id}, {"value", number(r.value)}});
  out["residuals"] = residuals;
  out["max_residual"] = number(report.max_residual());
  Json constants = Json::object();
  for (const auto& [k, v] : report.equilibrium_constants) constants[k] = number(v);
  out["equilibrium_constants"] = constants;
  if (!report.stationary_measure.empty()) out["stationary_measure"] = numbers(report.stationary_measure);
  out["notes"] = report.notes;
  return out;
}

Json to_json(const FixedPointResult& result) {
  Json out;
  Json points = Json::array();
  for (const auto& p : result.points) {
    Json eig = Json::array();
    for (const auto& e : p.eigenvalues) eig.push_back({number(e.real()), number(e.imag())});
    points.push_back({{"c", numbers(p.c)},
                      {"stability", to_string(p.stability)},
                      {"eigenvalues", eig},
                      {"residual", number(p.residual)}});
  }
  out["points"] = points;
  Json seeds = Json::array();
  for (const auto& s : result.seeds)
    seeds.push_back({{"point", s.point ? Json(*s.point) : Json()},
                     {"quasi_stationary", s.quasi_stationary},
                     {"diagnostic", s.diagnostic}});
  out["seeds"] = seeds;
  return out;
}

Json to_json(const Linearization& lin) {
  return {{"fixed_point", numbers(lin.fixed_point)},
          {"lambda", matrix_json(lin.lambda)},
          {"beta_inv", matrix_json(lin.beta_inv)},
          {"gamma", matrix_json(lin.gamma)}};
}

Json to_json(const OnsagerReport& report) {
  return {{"symmetric", report.symmetric},
          {"max_residual", number(report.max_residual)},
          {"worst", {report.worst_v, report.worst_u}}};
}

Json to_json(const KuboReport& report) {
  return {{"integral", matrix_json(report.lhs)},
          {"gamma", matrix_json(report.rhs)},
          {"residual", number(report.residual)},
          {"flipped_residual", number(report.flipped_residual)},
          {"sign_discrepancy", report.sign_discrepancy},
          {"tail_bound", number(report.tail_bound)},
          {"quadrature_error", number(report.quadrature_error)},
          {"horizon", number(report.horizon)},
          {"spectral_gap", number(report.gap)}};
}

Json to_json(const StationarityReport& report) {
  Json tests = Json::array();
  for (const auto& t : report.tests)
    tests.push_back({{"species", t.species},
                     {"time", number(t.time)},
                     {"chi_square", number(t.chi_square)},
                     {"degrees_of_freedom", t.degrees_of_freedom},
                     {"p_value", number(t.p_value)},
                     {"moment_z", numbers(t.moment_z)},
                     {"passed", t.passed}});
  return {{"stationary", report.stationary},
          {"alpha", number(report.alpha)},
          {"bonferroni_alpha", number(report.bonferroni_alpha)},
          {"z_threshold", number(report.z_threshold)},
          {"failed_replicas", report.failed_replicas},
          {"tests", tests}};
}

Json to_json(const MeanFieldTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"M", number(r.scale)}, {"error", number(r.error)}, {"failed_replicas", r.failed_replicas}});
  return {{"kind", "meanfield"}, {"rows", rows}, {"exponent", number(table.exponent)}, {"decreasing", table.decreasing}};
}

Json to_json(const ScalingTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"epsilon", number(r.epsilon)},
                    {"error", number(r.error)},
                    {"control_error", r.control_error ? number(*r.control_error) : Json()},
                    {"truncated_replicas", r.truncated_replicas}});
  return {{"kind", "scaling"}, {"rows", rows}, {"decreasing", table.decreasing}};
}

Json to_json(const ClampedReversibility& result) {
  return {{"verdict", result.verdict == ClampVerdict::reversible ? "reversible" : "generically_irreversible"},
          {"extension", numbers(result.extension)},
          {"certificate", numbers(result.certificate)},
          {"certificate_residual", number(result.certificate_residual)},
          {"clamped_count", result.clamped_count},
          {"integral_dimension", result.integral_dimension},
          {"generic_irreversibility_expected", result.generic_irreversibility_expected}};
}

}  // namespace kinetica::io
