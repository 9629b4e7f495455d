#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinetica/fluctuations.hpp"
#include "kinetica/kinetics.hpp"
#include "kinetica/lattice.hpp"
#include "kinetica/reversibility.hpp"
#include "kinetica/ssa.hpp"

namespace kinetica::io {

using Json = nlohmann::ordered_json;

/// 17 significant digits, enough to round-trip a double.
std::string format_number(double x);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& value);

/// `t,n_<name>...`
std::string trajectory_csv(const std::vector<std::string>& names, const SsaTrajectory& trajectory);
/// `t,c_<name>...`
std::string concentration_csv(const std::vector<std::string>& names, const std::vector<double>& times,
                              const std::vector<Concentrations>& states);
/// `t,H`
std::string entropy_csv(const EntropySeries& series);
/// Header row of species names, one row per matrix row.
std::string matrix_csv(const std::vector<std::string>& names, const Eigen::MatrixXd& matrix);
/// `lag,v,w,value,stderr`
std::string covariance_csv(const std::vector<std::string>& names,
                           const std::vector<CovarianceEstimate>& estimates);
/// `tau,X[,Y],species,value` for every site of every sample.
std::string lattice_csv(const std::vector<std::string>& names, const LatticeConfig& config,
                        const LatticeRun& run);
/// Same layout for the reference solution at its grid points.
std::string pde_csv(const std::vector<std::string>& names, const LatticeConfig& config,
                    const PdeSolution& solution);

Json to_json(const ReversibilityReport& report);
Json to_json(const FixedPointResult& result);
Json to_json(const Linearization& lin);
Json to_json(const OnsagerReport& report);
Json to_json(const KuboReport& report);
Json to_json(const StationarityReport& report);
Json to_json(const MeanFieldTable& table);
Json to_json(const ScalingTable& table);
Json to_json(const ClampedReversibility& result);
Json matrix_json(const Eigen::MatrixXd& matrix);

}  // namespace kinetica::io
