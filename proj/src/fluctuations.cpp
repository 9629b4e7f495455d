#include "kinetica/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "kinetica/kinetics.hpp"

namespace kinetica {

Linearization linearize(const ReactionNetwork& network, const Concentrations& c_bar) {
  validate_concentrations(network, c_bar);
  const std::size_t V = network.species_count();
  for (std::size_t v = 0; v < V; ++v)
    if (!(c_bar[v] > 0.0)) throw ValidationError("linearization point must be strictly positive");

  Linearization lin;
  lin.fixed_point = c_bar;
  const auto n = static_cast<Eigen::Index>(V);
  lin.lambda = Eigen::MatrixXd::Zero(n, n);
  for (const auto& rx : network.reactions()) {
    for (std::size_t u = 0; u < V; ++u) {
      const int du = rx.d_minus[u];
      if (du == 0) continue;
      double partial = rx.rate * du * std::pow(c_bar[u], du - 1);
      for (std::size_t w = 0; w < V; ++w)
        if (w != u && rx.d_minus[w] > 0) partial *= std::pow(c_bar[w], rx.d_minus[w]);
      for (std::size_t v = 0; v < V; ++v) {
        const int change = rx.d_plus[v] - rx.d_minus[v];
        if (change != 0)
          lin.lambda(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) += change * partial;
      }
    }
  }
  lin.beta_inv = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t v = 0; v < V; ++v) lin.beta_inv(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v)) = c_bar[v];
  lin.gamma = lin.lambda * lin.beta_inv;
  lin.leaf = leaf_basis(network);
  return lin;
}

OnsagerReport check_onsager(const Linearization& lin, double tol) {
  OnsagerReport report;
  const double scale = lin.gamma.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return report;
  for (Eigen::Index v = 0; v < lin.gamma.rows(); ++v)
    for (Eigen::Index u = 0; u < lin.gamma.cols(); ++u) {
      const double r = std::abs(lin.gamma(v, u) - lin.gamma(u, v)) / scale;
      if (r > report.max_residual) {
        report.max_residual = r;
        report.worst_v = static_cast<std::size_t>(v);
        report.worst_u = static_cast<std::size_t>(u);
      }
    }
  report.symmetric = report.max_residual <= tol;
  return report;
}

Eigen::VectorXcd leaf_spectrum(const Linearization& lin) {
  if (lin.leaf.cols() == 0) return {};
  const Eigen::MatrixXd restricted = lin.leaf.transpose() * lin.lambda * lin.leaf;
  return Eigen::EigenSolver<Eigen::MatrixXd>(restricted, false).eigenvalues();
}

double spectral_gap(const Linearization& lin) {
  const auto spectrum = leaf_spectrum(lin);
  if (spectrum.size() == 0) throw NotHurwitzError("no dynamical directions on the leaf");
  double max_re = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) max_re = std::max(max_re, spectrum(i).real());
  if (!(max_re < 0.0))
    throw NotHurwitzError(fmt::format("leaf spectrum has an eigenvalue with real part {}", max_re));
  return -max_re;
}

Eigen::MatrixXd ou_covariance(const Linearization& lin, double t) {
  if (t < 0.0) return ou_covariance(lin, -t).transpose();
  const Eigen::MatrixXd scaled = lin.lambda * t;
  return scaled.exp() * lin.beta_inv;
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss = boost::math::quadrature::gauss<double, 7>;

struct Panel {
  double a = 0.0;
  double b = 0.0;
  Eigen::MatrixXd estimate;
  double error = 0.0;
  /// Rounding level of the estimate; refining below it is pointless.
  double floor = 0.0;
  unsigned depth = 0;

  bool operator<(const Panel& other) const { return error < other.error; }
};

/// Integrand value with the size of the operands it was computed from.
struct Sample {
  Eigen::MatrixXd value;
  double magnitude = 0.0;
};

/// Kronrod estimate on [a, b] and the max-norm gap to the embedded Gauss rule.
template <class F>
Panel integrate_panel(const F& f, double a, double b, unsigned depth) {
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const Sample center = f(mid);
  Eigen::MatrixXd kronrod = wk[0] * center.value;
  Eigen::MatrixXd gauss = wg[0] * center.value;
  double magnitude = wk[0] * center.magnitude;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const Sample lo = f(mid - half * x[i]);
    const Sample hi = f(mid + half * x[i]);
    const Eigen::MatrixXd sum = lo.value + hi.value;
    kronrod += wk[i] * sum;
    if (i % 2 == 0) gauss += wg[i / 2] * sum;
    magnitude += wk[i] * (lo.magnitude + hi.magnitude);
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.estimate = half * kronrod;
  p.error = half * (kronrod - gauss).cwiseAbs().maxCoeff();
  p.floor = 64.0 * std::numeric_limits<double>::epsilon() * half * magnitude;
  p.depth = depth;
  return p;
}

double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

KuboReport kubo_check(const Linearization& lin, const KuboOptions& options) {
  KuboReport report;
  report.gap = spectral_gap(lin);
  report.horizon = options.horizon > 0.0 ? options.horizon : options.horizon_gaps / report.gap;
  const Eigen::MatrixXd lambda_sq = lin.lambda * lin.lambda;
  const double lambda_sq_norm = inf_norm(lambda_sq);
  // Rounding in exp(lambda t) is amplified by lambda^2, so the noise level
  // follows the operands rather than theta itself.
  auto theta = [&](double t) -> Sample {
    const Eigen::MatrixXd scaled = lin.lambda * t;
    const Eigen::MatrixXd phi = scaled.exp() * lin.beta_inv;
    return {-lambda_sq * phi, lambda_sq_norm * inf_norm(phi)};
  };

  const double scale = std::max(1.0, lin.gamma.cwiseAbs().maxCoeff());
  const double target = options.tolerance * scale;
  // Start with panels one relaxation time wide so the decay is resolved.
  const auto initial = static_cast<std::size_t>(std::clamp(std::ceil(report.horizon * report.gap), 1.0, 256.0));
  std::priority_queue<Panel> queue;
  for (std::size_t i = 0; i < initial; ++i) {
    const double a = report.horizon * static_cast<double>(i) / static_cast<double>(initial);
    const double b = report.horizon * static_cast<double>(i + 1) / static_cast<double>(initial);
    queue.push(integrate_panel(theta, a, b, 0));
  }
  // Panels that reached their rounding floor or the depth limit.
  std::vector<Panel> settled;
  auto total_error = [&] {
    double e = 0.0;
    for (const auto& p : settled) e += p.error;
    auto copy = queue;
    for (; !copy.empty(); copy.pop()) e += copy.top().error;
    return e;
  };
  double err = total_error();
  constexpr std::size_t kMaxPanels = 1u << 16;
  std::size_t panels = queue.size();
  while (!queue.empty() && err > target && panels < kMaxPanels) {
    Panel worst = queue.top();
    queue.pop();
    if (worst.error <= worst.floor || worst.depth >= options.max_depth) {
      settled.push_back(std::move(worst));
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = integrate_panel(theta, worst.a, mid, worst.depth + 1);
    Panel right = integrate_panel(theta, mid, worst.b, worst.depth + 1);
    err += left.error + right.error - worst.error;
    ++panels;
    queue.push(std::move(left));
    queue.push(std::move(right));
  }
  report.lhs = Eigen::MatrixXd::Zero(lin.lambda.rows(), lin.lambda.cols());
  report.quadrature_error = 0.0;
  for (; !queue.empty(); queue.pop()) settled.push_back(queue.top());
  for (const auto& p : settled) {
    report.lhs += p.estimate;
    report.quadrature_error += p.error;
  }
  report.rhs = lin.gamma;
  report.residual = (report.lhs - report.rhs).cwiseAbs().maxCoeff();
  report.flipped_residual = (report.lhs + report.rhs).cwiseAbs().maxCoeff();
  report.sign_discrepancy = report.flipped_residual < report.residual;
  const Eigen::MatrixXd scaled = lin.lambda * report.horizon;
  report.tail_bound = (lin.lambda * scaled.exp() * lin.beta_inv).cwiseAbs().maxCoeff();
  return report;
}

EmpiricalFluctuations empirical_fluctuations(const Ensemble& ensemble, const EmpiricalOptions& options) {
  std::vector<const Replica*> good;
  for (const auto& rep : ensemble.replicas)
    if (rep.ok()) good.push_back(&rep);
  if (good.size() < std::max<std::size_t>(options.min_replicas, 2))
    throw ValidationError(fmt::format("{} usable replicas, at least {} required", good.size(),
                                      std::max<std::size_t>(options.min_replicas, 2)));
  const auto grid = ensemble.config.grid();
  if (grid.size() < 2) throw ValidationError("at least two sample times are required");
  const double dt = grid[1] - grid[0];
  for (std::size_t i = 2; i < grid.size(); ++i)
    if (std::abs(grid[i] - grid[i - 1] - dt) > 1e-9 * std::max(1.0, grid[i]))
      throw ValidationError("empirical covariance needs a uniform sample grid");

  const std::size_t R = good.size();
  const std::size_t S = grid.size();
  const std::size_t V = good.front()->initial.counts.size();
  const double M = ensemble.config.scale;

  EmpiricalFluctuations out;
  out.replicas_used = R;
  out.series.times = grid;
  out.series.scale = M;
  out.series.source_seed = ensemble.config.seed;

  std::vector<std::vector<double>> mean(S, std::vector<double>(V, 0.0));
  for (const auto* rep : good)
    for (std::size_t i = 0; i < S; ++i)
      for (std::size_t v = 0; v < V; ++v) mean[i][v] += static_cast<double>(rep->trajectory.counts[i][v]);
  for (auto& row : mean)
    for (auto& x : row) x /= static_cast<double>(R);

  const double root_m = std::sqrt(M);
  out.series.xi.resize(R);
  for (std::size_t r = 0; r < R; ++r) {
    out.series.xi[r].assign(S, std::vector<double>(V));
    for (std::size_t i = 0; i < S; ++i)
      for (std::size_t v = 0; v < V; ++v)
        out.series.xi[r][i][v] = (static_cast<double>(good[r]->trajectory.counts[i][v]) - mean[i][v]) / root_m;
  }

  std::size_t first = 0;
  while (first < S && grid[first] < options.burn_in) ++first;
  // Centering on the ensemble mean biases covariances by the factor (R-1)/R.
  const double correction = static_cast<double>(R) / static_cast<double>(R - 1);
  const auto n = static_cast<Eigen::Index>(V);
  for (std::size_t lag : options.lag_steps) {
    if (first + lag >= S) throw ValidationError(fmt::format("lag of {} samples leaves no time origins", lag));
    const std::size_t origins = S - lag - first;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t r = 0; r < R; ++r) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
      for (std::size_t i = first; i + lag < S; ++i) {
        const auto& later = out.series.xi[r][i + lag];
        const auto& now = out.series.xi[r][i];
        for (std::size_t v = 0; v < V; ++v)
          for (std::size_t w = 0; w < V; ++w)
            acc(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)) += later[v] * now[w];
      }
      acc *= correction / static_cast<double>(origins);
      sum += acc;
      sum_sq += acc.cwiseProduct(acc);
    }
    CovarianceEstimate est;
    est.lag = static_cast<double>(lag) * dt;
    est.value = sum / static_cast<double>(R);
    const Eigen::MatrixXd var =
        (sum_sq / static_cast<double>(R) - est.value.cwiseProduct(est.value)) * correction;
    est.standard_error = (var.cwiseMax(0.0) / static_cast<double>(R)).cwiseSqrt();
    out.covariance.push_back(std::move(est));
  }
  return out;
}

}  // namespace kinetica
