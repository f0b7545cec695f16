/** \file    pipeline.hpp
    \brief   The stages behind every subcommand, wired from one RunConfig:
             value field, feedback occupation run, Mather LP, diagnostics, alpha sweep.
*/
#pragma once
#include "mather/config.hpp"
#include "mather/diagnostics.hpp"
#include "mather/flow.hpp"
#include "mather/mather_lp.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace mather::pipeline {

/// Lagrangian and grids shared by all stages of one run.
struct Setup {
    hull::QuasiPeriodicLagrangian lag;
    hj::OmegaGrid wgrid;
    hj::ControlGrid vgrid;
    double h;
};

Setup make_setup(const cfg::RunConfig& c);

hj::ValueField solve_field(const cfg::RunConfig& c, const Setup& s, double alpha);

flow::OccupationRun run_flow(const cfg::RunConfig& c, const Setup& s, const hj::ValueField& field);

/// The configured trace: the occupation run's hull marginal, uniform, or a delta.
/// `run` may be null unless nu = "occupation".
std::vector<double> trace_measure(const cfg::RunConfig& c, const Setup& s, const flow::OccupationRun* run);

struct LPStage {
    lp::MatherLP problem;
    lp::MatherSolution solution;
    lp::DualityReport report;
};

/// Builds and solves the LP for the field's alpha; status is reported, not thrown.
LPStage run_lp(const cfg::RunConfig& c, const Setup& s, const hj::ValueField& field, const std::vector<double>& nu);

struct SweepRow {
    double alpha = 0;
    bool ok = false;
    std::string error;
    double lp_value = 0;
    double pde_value = 0;  ///< alpha int U dnu
    double osc = 0;        ///< osc(alpha U)
    std::optional<double> graph_c;
    double max_spread = 0;  ///< LP measure, bins above the mass floor
};

struct HbarEstimate {
    bool available = false;
    double value = 0;
    int order = 1;
    double alpha = 0;        ///< the pair (alpha, 2 alpha) used
    std::string note;
};

struct SweepResult {
    std::vector<SweepRow> rows;  ///< in the configured order
    HbarEstimate hbar;
};

/// Every alpha runs the full pipeline; a failing alpha is recorded and the sweep goes on.
SweepResult alpha_sweep(const cfg::RunConfig& c, const Setup& s);

/// Order-one Richardson on pde_value at the smallest successful alpha whose double
/// also succeeded.
HbarEstimate estimate_hbar(const std::vector<SweepRow>& rows);

std::string sweep_csv(const SweepResult& r);
nlohmann::json sweep_json(const SweepResult& r);

struct DiagnosticsReport {
    double alpha = 0;
    std::vector<double> holonomy;
    diag::InvarianceResult invariance;
    diag::GraphTable graph;
    double gradient_consistency = 0;
    std::optional<diag::CurvatureReport> curvature;  ///< d = n = 1, A = (1) only
    lp::DualityReport duality;
    double osc = 0;
    std::vector<std::string> warnings;
};

/// Single-alpha diagnostics of the LP measure against the value field.
DiagnosticsReport diagnose(const cfg::RunConfig& c, const Setup& s, const hj::ValueField& field, const LPStage& lp);

nlohmann::json to_json(const DiagnosticsReport& r);
nlohmann::json to_json(const lp::DualityReport& r);

}  // namespace mather::pipeline
