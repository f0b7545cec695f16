/** \file    config.hpp
    \brief   Run configuration: one JSON document drives every stage so that the
             value field, the occupation measure and the linear program are built
             on identical grids.

    Unknown keys are rejected; every error carries the JSON pointer of the
    offending value.  Defaults are materialized on load, so writing a loaded
    config and loading it again gives the same RunConfig.
*/
#pragma once
#include "mather/hull.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace mather::cfg {

struct SolverConfig {
    int N = 128;
    int M = 33;
    std::optional<double> v_max;  ///< unset: hj::default_v_max
    double alpha = 0.25;
    std::optional<double> h;      ///< unset: hj::default_h
    double tol = 1e-8;
    int max_iter = 200000;
    std::string sweep = "gauss-seidel";  ///< or "jacobi"
};

struct LPConfig {
    int basis_K = 2;
    double slack = 1e-6;
    std::string nu = "occupation";  ///< "occupation" | "uniform" | "delta:<w1,...,wd>"
    bool holonomic = false;
    long max_variables = 200000;
};

struct FlowConfig {
    double T = 100.0;
    double dt = 0.01;
    Vec omega0;                 ///< base point; defaults to the origin
    int seeds = 4;              ///< ignored when seed_points is non-empty
    std::vector<Vec> seed_points;
};

struct SweepConfig {
    std::vector<double> alphas{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
};

struct RunConfig {
    int d = 1, n = 1;
    Mat A;
    double m = 1.0;
    Vec b;
    double c0 = 0.0;
    std::vector<hull::TrigMode> modes;
    bool auto_shift = true;
    int shift_resolution = 512;
    SolverConfig solver;
    LPConfig lp;
    FlowConfig flow;
    SweepConfig sweep;
    std::string output_dir = "out";
};

/// Validates and fills defaults.  Throws InputError with a JSON pointer.
RunConfig parse_config(const nlohmann::json& doc);
/// Reads a UTF-8 JSON file and parses it.
RunConfig load_config(const std::string& path);
/// Full, normalized echo (every default written out).
nlohmann::json to_json(const RunConfig& c);

/// Hull, potential and Lagrangian as configured, auto-shifted when requested.
hull::QuasiPeriodicLagrangian make_lagrangian(const RunConfig& c);
/// Seed hull points: explicit list, or omega0 + (2s + 1)/(2 seeds) (1, ..., 1).
std::vector<hull::HullPoint> seed_points(const RunConfig& c);

}  // namespace mather::cfg
