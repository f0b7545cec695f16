/** \file    hj.hpp
    \brief   Semi-Lagrangian solver for the discounted stationary Hamilton-Jacobi
             equation  H(0, D_x u, omega) + alpha u = 0  on the torus hull.

    The stationary value function is represented by its trace U on an N^d lattice
    of the hull, with u(x,omega) = U(omega + A x).  The Bellman update is

        U(omega) = min_v { w_h L(0,v,omega) + g Interp(U)(omega + h A v) },

    g = exp(-alpha h), w_h = (1 - g)/alpha.  The weight w_h is the exact discounted
    integral of a cost held constant over [0,h]; it replaces the plain h and makes
    a constant running cost c produce exactly U = c/alpha.
*/
#pragma once
#include "mather/hull.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mather::hj {

/// N^d lattice {j/N} on the hull; node index has the first axis slowest.
class OmegaGrid {
public:
    OmegaGrid(int d, int N);

    int d() const { return d_; }
    int N() const { return N_; }
    std::size_t size() const { return size_; }
    double spacing() const { return 1.0 / N_; }

    std::vector<int> multi_index(std::size_t i) const;
    std::size_t linear_index(const std::vector<int>& idx) const;  ///< wraps periodically
    Vec node(std::size_t i) const;
    /// Index of the node closest to theta (ties go to the lower node).
    std::size_t nearest(const Vec& theta) const;

    /// Periodic multilinear interpolation of nodal values at theta.
    double interpolate(const std::vector<double>& U, const Vec& theta) const;

private:
    int d_;
    int N_;
    std::size_t size_;
    std::vector<std::size_t> stride_;
};

/// Uniform lattice on [-v_max, v_max]^n with M (odd) points per axis.
class ControlGrid {
public:
    ControlGrid(int n, double v_max, int M);

    int n() const { return n_; }
    int M() const { return M_; }
    double v_max() const { return v_max_; }
    double spacing() const { return 2.0 * v_max_ / (M_ - 1); }
    std::size_t size() const { return nodes_.size(); }
    const Vec& node(std::size_t i) const { return nodes_[i]; }
    std::size_t center() const { return center_; }
    /// True when some component sits at +-v_max.
    bool on_boundary(std::size_t i) const;
    /// Nearest node, components clamped into the box; `clamped` is set when clamping occurred.
    std::size_t nearest(const Vec& v, bool* clamped = nullptr) const;

private:
    int n_;
    double v_max_;
    int M_;
    std::size_t center_;
    std::vector<Vec> nodes_;
};

/// |b|_inf + 2 sqrt(2 (max P - min P)/m) + 1, the potential range taken on a grid.
double default_v_max(const hull::QuasiPeriodicLagrangian& lag, int resolution = 512);
/// 1 / (2 v_max N max|A|): one step moves at most half a cell per unit column weight.
double default_h(double v_max, int N, const hull::TorusHull& hull);

enum class Sweep { Jacobi, GaussSeidel };

struct ValueField {
    OmegaGrid grid;
    hull::TorusHull hull;
    double alpha = 0;
    double h = 0;
    std::vector<double> U;
    int iterations = 0;
    double residual = 0;  ///< sup |T(U) - U| for the Jacobi operator T

    double at(const hull::HullPoint& omega) const { return grid.interpolate(U, omega.coords()); }
    /// u(x, omega) = U(omega + A x)
    double u(const Vec& x, const hull::HullPoint& omega) const;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 200000;
    Sweep sweep = Sweep::GaussSeidel;
};

/// Value iteration to a fixed point.  Throws NumericError when the minimising
/// control lies on the boundary of the control box or when max_iter is reached.
ValueField solve_value_function(const hull::QuasiPeriodicLagrangian& lag, const OmegaGrid& grid,
                                const ControlGrid& ctrl, double alpha, double h,
                                const SolveOptions& opts = {});

/// One plain (Jacobi) application of the Bellman operator to nodal values.
std::vector<double> bellman_apply(const hull::QuasiPeriodicLagrangian& lag, const OmegaGrid& grid,
                                  const ControlGrid& ctrl, double alpha, double h,
                                  const std::vector<double>& U);

/// Field on a grid with prescribed nodal values (for tests and post-processing).
ValueField make_field(const hull::TorusHull& hull, const OmegaGrid& grid, double alpha,
                      std::vector<double> U);

/// D_x u(0, omega) = A^T grad U(omega), central differences with spacing 1/N.
Vec x_gradient(const ValueField& field, const hull::HullPoint& omega);

struct HJResidual {
    double sup = 0;
    double trimmed_mean = 0;  ///< mean after dropping 5% at each end
};

/// |H(0, A^T grad U, omega) + alpha U| at every node.  Central, all-forward and
/// all-backward differences are tried and the smallest value is kept.
HJResidual residual_hj(const ValueField& field, const hull::QuasiPeriodicLagrangian& lag);
std::vector<double> residual_nodes(const ValueField& field, const hull::QuasiPeriodicLagrangian& lag);

struct MollifyResult {
    ValueField field;
    bool collapsed = false;  ///< kernel narrower than half a cell: identity returned
    std::string warning;
};

/// U_eps(omega) = sum_q w_q U(omega + A y_q) with the bump exp(-1/(1-|y/eps|^2))
/// sampled at the midpoints of a `nodes`^n lattice on [-eps, eps]^n.
MollifyResult action_mollify(const ValueField& field, double eps, int nodes = 16);

struct RegularityReport {
    double lip_x = 0;
    double lip_omega = 0;
    double osc_alpha_u = 0;
    double semiconcavity = 0;
};

RegularityReport regularity_report(const ValueField& field);

}  // namespace mather::hj
