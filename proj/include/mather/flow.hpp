/** \file    flow.hpp
    \brief   Discounted Euler-Lagrange flow, value-gradient feedback trajectories
             and occupation measures.

    For L = m/2 |v-b|^2 + P(omega + A x) the discounted Euler-Lagrange field is
        x' = v,   v' = (1/m) A^T grad P(theta) + alpha (v - b),
    with theta = omega0 + A x.  Feedback trajectories follow the Hamiltonian
    maximiser of the value gradient, x' = b - D_x u(x)/m.
*/
#pragma once
#include "mather/hj.hpp"
#include "mather/measure.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mather::flow {

struct PhaseState {
    Vec x;
    Vec v;
    hull::HullPoint omega0;
};

struct Sample {
    double t;
    Vec x;
    Vec v;
    Vec theta;
};

struct Trajectory {
    double dt = 0;
    double alpha = 0;
    hull::HullPoint omega0;
    std::vector<Sample> samples;
    std::vector<std::string> warnings;
};

/// (X, Y) = (v, (1/m) A^T grad P + alpha (v - b)).
std::pair<Vec, Vec> el_field(const hull::QuasiPeriodicLagrangian& lag, double alpha, const Vec& x, const Vec& v,
                             const hull::HullPoint& omega);

/// E = v.D_vL - L = m/2 |v|^2 - m/2 |b|^2 - P(theta); conserved when alpha = 0.
double energy(const hull::QuasiPeriodicLagrangian& lag, const Vec& x, const Vec& v, const hull::HullPoint& omega);

/// Classical RK4 for the Euler-Lagrange field, one sample per step.  Throws
/// NumericError when |v| exceeds 10 v_max.
Trajectory integrate_el(const hull::QuasiPeriodicLagrangian& lag, double alpha, const PhaseState& state, double dt,
                        double T, double v_max);

struct FeedbackResult {
    Trajectory traj;
    double running_cost = 0;     ///< int_0^T e^{-alpha t} L(x, x', omega0) dt
    double initial_value = 0;    ///< U(omega0)
    double terminal_value = 0;   ///< U(theta(T))
    double dpp_residual = 0;     ///< |running_cost + e^{-alpha T} U(theta_T) - U(omega0)|
    std::size_t kink_samples = 0;
};

/// Integrates x' = b - x_gradient(field, theta)/m (RK4, the discounted cost rides
/// along as an extra state).  Samples whose forward and backward differences of U
/// disagree by more than `kink_tol` (relative) are counted and reported as a warning.
FeedbackResult feedback_trajectory(const hj::ValueField& field, const hull::QuasiPeriodicLagrangian& lag,
                                   const hull::HullPoint& omega0, double dt, double T, double kink_tol = 0.5);

/// Feedback velocity b - x_gradient(field, theta)/m.
Vec feedback_velocity(const hj::ValueField& field, const hull::QuasiPeriodicLagrangian& lag,
                      const hull::HullPoint& theta);

/// Time average over the left-endpoint samples of [0, t_end] (all samples when
/// t_end <= 0).  Velocities outside the control box are clamped with a warning.
DiscreteMeasure occupation_measure(const Trajectory& traj, const hj::ControlGrid& vgrid, const hj::OmegaGrid& wgrid,
                                   double t_end = 0, std::vector<std::string>* warnings = nullptr);

/// Occupation measures at T/8, T/4, T/2, T.
std::vector<DiscreteMeasure> checkpoint_measures(const Trajectory& traj, const hj::ControlGrid& vgrid,
                                                 const hj::OmegaGrid& wgrid);

struct OccupationRun {
    DiscreteMeasure measure;                  ///< equal-weight mixture over seeds
    std::vector<DiscreteMeasure> per_seed;
    std::vector<FeedbackResult> runs;
    std::vector<double> checkpoint_l1;        ///< L1 distance between successive checkpoints (seed mixture)
    double seed_spread = 0;                   ///< max L1 distance of a seed measure from the mixture
    std::vector<std::string> warnings;
};

/// Feedback trajectories from every seed, occupation measures merged deterministically.
OccupationRun occupation_run(const hj::ValueField& field, const hull::QuasiPeriodicLagrangian& lag,
                             const std::vector<hull::HullPoint>& seeds, double dt, double T,
                             const hj::ControlGrid& vgrid);

}  // namespace mather::flow
