/** \file    diagnostics.hpp
    \brief   Checks run on computed measures and value fields: holonomy and
             invariance residuals, the velocity graph of a measure, gradient
             consistency, the 1-D curvature bound and the alpha sweep estimate.

    Almost-everywhere statements become mass-threshold statements: bins carrying
    less than the mass floor (default 1e-4 / #hull bins) are ignored.
*/
#pragma once
#include "mather/hj.hpp"
#include "mather/measure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mather::diag {

/// |sum mu (v.D_x phi_k - alpha phi_k) + alpha sum phi_k nu| / (sup|D_x phi_k| + alpha), per basis element.
/// `nu` may be empty when alpha = 0.
std::vector<double> holonomy_residual(const DiscreteMeasure& mu, const hull::StationaryBasis& basis, double alpha,
                                      const std::vector<double>& nu);

/// Test functions psi_k(omega + A x) chi_r(v): psi from the constant plus a stationary
/// basis, chi_r(v) = exp(1 - 1/(1 - |v - c_r|^2/rho^2)) bumps on a lattice of centres.
struct InvarianceTests {
    int K = 1;
    double radius = 0;          ///< rho; 0 picks v_max / 5 (fixed in velocity units so refinement converges)
    int bumps_per_axis = 0;     ///< 0 picks enough bumps to cover [-v_max, v_max] at spacing rho/2
};

struct InvarianceResult {
    std::vector<double> residuals;   ///< normalized, one per (psi, chi) pair
    std::vector<double> alpha_terms; ///< normalized |sum mu psi grad chi . alpha (v - b)|
    double max = 0;
    double max_alpha_term = 0;
    std::vector<std::string> warnings;
};

/// |sum mu [v.A^T grad psi chi + psi grad chi . Y]| with Y the discounted Euler-Lagrange
/// acceleration, each divided by the sup over the grid of |first term| + |second term|.
InvarianceResult invariance_residual(const DiscreteMeasure& mu, const hull::QuasiPeriodicLagrangian& lag,
                                     double alpha, const InvarianceTests& tests = {});

struct GraphRow {
    std::size_t iw;
    double mass;
    Vec vbar;       ///< mass-weighted mean velocity
    double spread;  ///< largest distance between occupied velocity bins
};

struct GraphTable {
    std::vector<GraphRow> rows;
    double mass_floor = 0;
    double max_spread = 0;
    std::optional<double> lipschitz;  ///< unset when fewer than two hull bins are occupied
    int lipschitz_pairs = 0;
};

double default_mass_floor(const hj::OmegaGrid& grid);

/// Rows for hull bins with mass >= mass_floor; velocity bins below the floor do not
/// count towards the spread.  The Lipschitz estimate compares rows at omega and at
/// the node nearest omega + A y for y in {+-1, +-2, +-4}/N along each action axis.
GraphTable graph_extract(const DiscreteMeasure& mu, const hull::TorusHull& hull, double mass_floor);

/// sup over graph rows of |vbar(omega) - (b - x_gradient(U)(omega)/m)|.
double gradient_consistency(const GraphTable& table, const hj::ValueField& field,
                            const hull::QuasiPeriodicLagrangian& lag);

struct CurvatureReport {
    double lhs = 0;     ///< sum over the support of u_xx^2 times theta-mass
    double rhs = 0;     ///< sum of (alpha^2 + 2 P'') times theta-mass
    double margin = 0;  ///< rhs - lhs
    double sup_uxx = 0; ///< max |u_xx| over the support
    double semiconcavity = 0;  ///< max u_xx over all nodes
    int stencil = 1;    ///< second differences span +-stencil nodes
};

/// floor(sqrt(N)).  The upwind scheme bends U within a few cells of a minimum,
/// so the nearest-neighbour second difference overshoots there by a factor that
/// does not shrink with N; a stencil growing like sqrt(N) averages it out.
int default_curvature_stencil(const hj::OmegaGrid& grid);

/// Requires d = n = 1 and A = (1); throws InputError otherwise.  stencil = 0 picks
/// default_curvature_stencil.
CurvatureReport curvature_check_1d(const hj::ValueField& field, const DiscreteMeasure& mu,
                                   const hull::QuasiPeriodicLagrangian& lag, double mass_floor,
                                   int stencil = 0);

/// Oscillation max - min of alpha U over the nodes.
double oscillation(const hj::ValueField& field);

/// Order-one Richardson extrapolation to alpha = 0 from values at alpha and 2 alpha.
double richardson(double f_alpha, double f_2alpha);

}  // namespace mather::diag
