/** \file    hull.hpp
    \brief   Torus hull with a linear R^n action, trigonometric potentials,
             the mechanical Lagrangian family and the stationary test basis.

    The hull is T^d = R^d / Z^d, and a position shift y in R^n acts on it by
    omega -> omega + A y (mod 1).  Every stationary object is a function of the
    hull coordinate theta = omega + A x, so it suffices to evaluate at x = 0.
*/
#pragma once
#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

namespace mather {

using Vec  = Eigen::VectorXd;
using Mat  = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

namespace hull {

/// Canonical representative of t in [0,1); values within 1e-15 of 1 fold to 0.
double wrap01(double t);

/// A point of T^d, always stored as its canonical representative in [0,1)^d.
class HullPoint {
public:
    HullPoint() = default;
    explicit HullPoint(const Vec& theta);
    static HullPoint zero(int d) { return HullPoint(Vec::Zero(d)); }

    int dim() const { return static_cast<int>(theta_.size()); }
    const Vec& coords() const { return theta_; }
    double operator[](int i) const { return theta_[i]; }

private:
    Vec theta_;
};

/// Euclidean length of the shortest representative of a - b on the torus.
double torus_distance(const HullPoint& a, const HullPoint& b);

/// Compact hull T^d with action generator A (d x n).
class TorusHull {
public:
    explicit TorusHull(Mat A);

    int d() const { return static_cast<int>(A_.rows()); }
    int n() const { return static_cast<int>(A_.cols()); }
    const Mat& A() const { return A_; }
    /// Largest absolute entry of A.
    double max_abs() const { return A_.cwiseAbs().maxCoeff(); }

    /// tau_y omega = omega + A y (mod 1). Throws InputError for non-finite y.
    HullPoint act(const HullPoint& omega, const Vec& y) const;

private:
    Mat A_;
};

/// Result of the resonance heuristic: an integer relation m with A^T m ~ 0
/// means the orbit {omega + A x} stays on a proper subtorus.
struct ResonanceReport {
    bool resonant = false;
    IVec relation;          ///< shortest relation found (empty when none)
    double residual = 0.0;  ///< |A^T m| for that relation
};

/// Search integer vectors with |m|_inf <= max_coeff for A^T m = 0 (up to tol).
/// This only reports; density of the orbit is assumed, never enforced.
ResonanceReport rationality_heuristic(const TorusHull& hull, int max_coeff = 12, double tol = 1e-9);

// ---------------------------------------------------------------------------

struct TrigMode {
    IVec k;        ///< integer wave vector (length d)
    double a = 0;  ///< cosine coefficient
    double b = 0;  ///< sine coefficient
};

/// P(theta) = c0 + sum_k [a_k cos(2 pi k.theta) + b_k sin(2 pi k.theta)].
class TrigPotential {
public:
    TrigPotential(int d, double c0, std::vector<TrigMode> modes);

    int dim() const { return d_; }
    double c0() const { return c0_; }
    const std::vector<TrigMode>& modes() const { return modes_; }

    double value(const Vec& theta) const;
    Vec gradient(const Vec& theta) const;
    Mat hessian(const Vec& theta) const;

    /// sum_k 2 pi |k| (|a_k| + |b_k|), an upper bound for |grad P|.
    double gradient_bound() const;

    /// Same potential with c0 replaced by c0 + delta.
    TrigPotential shifted(double delta) const;

    /// Minimum and maximum of P over the uniform grid with `resolution` points per axis.
    std::pair<double, double> grid_range(int resolution) const;

private:
    int d_;
    double c0_;
    std::vector<TrigMode> modes_;
};

/// L(x,v,omega) = m/2 |v - b|^2 + P(omega + A x),
/// H(x,p,omega) = sup_v (-p.v - L) = -p.b + |p|^2/(2m) - P(omega + A x).
class QuasiPeriodicLagrangian {
public:
    QuasiPeriodicLagrangian(TorusHull hull, double mass, Vec drift, TrigPotential potential);

    const TorusHull& hull() const { return hull_; }
    double mass() const { return m_; }
    const Vec& drift() const { return b_; }
    const TrigPotential& potential() const { return P_; }
    int n() const { return hull_.n(); }
    int d() const { return hull_.d(); }

    double lagrangian(const Vec& x, const Vec& v, const HullPoint& omega) const;
    double hamiltonian(const Vec& x, const Vec& p, const HullPoint& omega) const;

    /// The same quantities written directly in the hull coordinate theta = omega + A x.
    double lagrangian_at(const Vec& v, const Vec& theta) const;
    double hamiltonian_at(const Vec& p, const Vec& theta) const;
    double kinetic(const Vec& v) const;

    /// Maximiser of -p.v - L: v*(p) = b - p/m.
    Vec optimal_velocity(const Vec& p) const;
    /// D_p H = -b + p/m.
    Vec dp_hamiltonian(const Vec& p) const;
    /// D_v L = m (v - b).
    Vec dv_lagrangian(const Vec& v) const;
    /// D_x L = A^T grad P(theta).
    Vec dx_lagrangian_at(const Vec& theta) const;

    /// sup |A^T grad P|: |L(x+y,v,w) - L(x,v,w)| <= |y| * this bound.
    double x_lipschitz_bound() const;

private:
    TorusHull hull_;
    double m_;
    Vec b_;
    TrigPotential P_;
};

/// Shift c0 so that the minimum of P over a `resolution`^d grid is zero.
QuasiPeriodicLagrangian auto_shift(const QuasiPeriodicLagrangian& lag, int resolution = 512);

// ---------------------------------------------------------------------------

enum class BasisKind { Cos, Sin };

struct BasisElement {
    IVec k;
    BasisKind kind;
};

/// psi(omega), its hull gradient and D_x phi(0,omega) = A^T grad psi(omega)
/// for the stationary function phi(x,omega) = psi(omega + A x).
struct BasisValue {
    double psi = 0;
    Vec grad;
    Vec dx;
};

/// cos/sin(2 pi k.omega) for integer k with 0 < |k|_inf <= K, one k from each pair
/// {k, -k} (the one whose first nonzero entry is positive).  Wave vectors are
/// enumerated lexicographically over [-K,K]^d (first axis slowest), the cosine
/// element of each k precedes its sine element.
class StationaryBasis {
public:
    StationaryBasis(TorusHull hull, int K);

    int order() const { return K_; }
    std::size_t size() const { return elements_.size(); }
    const BasisElement& element(std::size_t i) const;
    const TorusHull& hull() const { return hull_; }

    BasisValue eval(std::size_t i, const HullPoint& omega) const;
    /// Value only, evaluated at an arbitrary (unreduced) hull coordinate.
    double value_at(std::size_t i, const Vec& theta) const;
    /// phi_i(x, omega) = psi_i(omega + A x).
    double phi(std::size_t i, const Vec& x, const HullPoint& omega) const;

    /// sup_omega |D_x phi_i(0,omega)| = 2 pi |A^T k|.
    double sup_dx(std::size_t i) const;

private:
    TorusHull hull_;
    int K_;
    std::vector<BasisElement> elements_;
};

}  // namespace hull
}  // namespace mather
