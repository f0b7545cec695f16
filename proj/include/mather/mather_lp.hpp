/** \file    mather_lp.hpp
    \brief   The discounted stationary Mather problem as a finite linear program.

    Unknowns are weights mu_ij on (velocity node i, hull node j).  Rows:

      0             sum mu = 1
      1 .. B        sum mu_ij [v_i . D_x phi_k(0,w_j) - alpha phi_k(w_j)] = -alpha sum_j phi_k(w_j) nu_j
      B+1 .. 2B     sum mu_ij phi_k(w_j) = sum_j phi_k(w_j) nu_j            (holonomic variant only)

    each equality relaxed to a band of half-width `slack` after dividing the row by
    n_k = sup|D_x phi_k| + alpha.  The objective is sum mu_ij L(0, v_i, w_j).  Columns
    are never stored: pricing contracts the duals against the basis tables once per
    hull node, so one pass costs O(#w * B * n + #w * #v * n).
*/
#pragma once
#include "mather/hj.hpp"
#include "mather/measure.hpp"
#include "mather/simplex.hpp"

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace mather::lp {

/// Trace measure selector: "occupation", "uniform" or "delta:<w1,...,wd>".
struct TraceSpec {
    enum class Kind { Occupation, Uniform, Delta } kind = Kind::Occupation;
    Vec point;  ///< for Delta

    static TraceSpec parse(const std::string& s, int d);
    std::string str() const;
};

std::vector<double> uniform_trace(const hj::OmegaGrid& grid);
/// Unit mass at the hull node nearest to omega.
std::vector<double> delta_trace(const hj::OmegaGrid& grid, const Vec& omega);

struct LPOptions {
    double slack = 1e-6;
    bool holonomic = false;
    std::size_t max_variables = 200000;
};

class MatherLP : public ColumnModel {
public:
    MatherLP(const hull::QuasiPeriodicLagrangian& lag, hj::ControlGrid vgrid, hj::OmegaGrid wgrid,
             const hull::StationaryBasis& basis, double alpha, std::vector<double> nu, LPOptions opts = {});

    std::size_t rows() const override { return 1 + B_ * (opts_.holonomic ? 2 : 1); }
    std::size_t cols() const override { return V_ * W_; }
    double cost(std::size_t j) const override { return kin_[j % V_] + pot_[j / V_]; }
    void column(std::size_t j, Vec& out) const override;
    void products(const Vec& y, std::vector<double>& out) const override;
    double row_lower(std::size_t i) const override { return lo_[i]; }
    double row_upper(std::size_t i) const override { return hi_[i]; }
    /// Velocity-major, hull nodes in van der Corput order: consecutive candidates sit
    /// far apart on the hull, which keeps the simplex bases well conditioned.
    std::vector<std::size_t> priority() const override;

    const hj::ControlGrid& vgrid() const { return vgrid_; }
    const hj::OmegaGrid& wgrid() const { return wgrid_; }
    double alpha() const { return alpha_; }
    const std::vector<double>& nu() const { return nu_; }
    const LPOptions& options() const { return opts_; }
    std::size_t basis_size() const { return B_; }
    int basis_order() const { return K_; }
    /// Row scale n_k of discounted row k.
    double scale(std::size_t k) const { return scale_[k]; }

    /// Unscaled discounted-row activities sum mu (v.D_x phi_k - alpha phi_k), one per basis element.
    Vec activity(const DiscreteMeasure& mu) const;
    /// Unscaled right-hand sides -alpha sum_j phi_k(w_j) nu_j.
    Vec rhs() const;

    /// Sparse dump: a one-line JSON header followed by "row col value" lines (scaled rows).
    void write_triplets(std::ostream& os) const;

private:
    hj::ControlGrid vgrid_;
    hj::OmegaGrid wgrid_;
    double alpha_;
    std::vector<double> nu_;
    LPOptions opts_;
    int n_;
    int K_;
    std::size_t V_, W_, B_;
    std::vector<double> kin_, pot_, vflat_;
    std::vector<double> phi_;   ///< phi_k(w_j) at [j * B + k]
    std::vector<double> dphi_;  ///< D_x phi_k(0,w_j) at [(j * B + k) * n + a]
    std::vector<double> scale_, nu_phi_;
    std::vector<double> lo_, hi_;
    // Pricing evaluates the trig sums axis by axis instead of reading phi_/dphi_.
    std::vector<std::size_t> slot_;      ///< element k -> index of its lattice vector in the (2K+1)^d cube
    std::vector<char> is_sin_;
    std::vector<double> atk_;            ///< 2 pi A^T k at [k * n + a]
    std::vector<std::complex<double>> E_;  ///< exp(2 pi i m j / N) at [j * (2K+1) + m + K]
    void trig_sum(std::vector<std::complex<double>>& coef, std::vector<double>& out) const;
};

struct MatherSolution {
    Solution raw;
    double value = 0;             ///< LP objective (NaN unless feasible)
    DiscreteMeasure measure;
    double y0 = 0;                ///< dual of the normalisation row
    std::vector<double> coeffs;   ///< phi = sum_k coeffs[k] phi_k, the approximate dual minimiser
    std::vector<double> trace_duals;
};

MatherSolution solve(const MatherLP& lp, const SimplexOptions& opts = {});

struct DualityReport {
    std::string status;
    double lp_value = 0;
    double pde_value = 0;      ///< alpha sum_j U(w_j) nu_j
    double gap = 0;            ///< lp_value - pde_value
    double dual_value = 0;     ///< discrete dual objective of the LP multipliers
    double certificate = 0;    ///< alpha int phi dnu - max_j [H(D_x phi) + alpha phi](w_j), phi from coeffs
    double mollified_margin = 0;  ///< max_j [-alpha int phi dnu + H + alpha phi] + lp_value, phi = mollified U
    bool mollifier_collapsed = false;
    int basis_K = 0;
    double slack = 0;
};

/// Compares the LP with the value field built on the same grids.  Throws InputError
/// on a grid or discount mismatch.
DualityReport duality_report(const MatherLP& lp, const MatherSolution& sol, const hull::QuasiPeriodicLagrangian& lag,
                             const hull::StationaryBasis& basis, const hj::ValueField& field, double mollify_eps);

}  // namespace mather::lp
