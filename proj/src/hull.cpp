#include "mather/hull.hpp"

#include "mather/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

namespace mather::hull {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool all_finite(const Vec& v) { return v.allFinite(); }

// Iterate over all integer vectors in [-K,K]^d, first axis slowest.
template <typename F>
void for_each_lattice_vector(int d, int K, F&& f)
{
    IVec k = IVec::Constant(d, -K);
    while (true) {
        f(k);
        int ax = d - 1;
        while (ax >= 0 && k[ax] == K) {
            k[ax] = -K;
            --ax;
        }
        if (ax < 0) return;
        ++k[ax];
    }
}
}  // namespace

double wrap01(double t)
{
    double r = t - std::floor(t);
    if (r >= 1.0 - 1e-15 || r < 0.0) r = 0.0;
    return r;
}

HullPoint::HullPoint(const Vec& theta) : theta_(theta.size())
{
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (!std::isfinite(theta[i])) throw InputError("hull point has a non-finite coordinate");
        theta_[i] = wrap01(theta[i]);
    }
}

double torus_distance(const HullPoint& a, const HullPoint& b)
{
    double s = 0;
    for (int i = 0; i < a.dim(); ++i) {
        double diff = std::fabs(a[i] - b[i]);
        diff = std::min(diff, 1.0 - diff);
        s += diff * diff;
    }
    return std::sqrt(s);
}

TorusHull::TorusHull(Mat A) : A_(std::move(A))
{
    if (A_.rows() < 1) throw InputError("hull dimension d must be at least 1", "/hull/d");
    if (A_.cols() < 1 || A_.cols() > A_.rows())
        throw InputError("driving dimension n must satisfy 1 <= n <= d", "/hull/n");
    if (!A_.allFinite()) throw InputError("action matrix A has non-finite entries", "/hull/A");
    for (Eigen::Index j = 0; j < A_.cols(); ++j)
        if (A_.col(j).norm() == 0.0)
            throw InputError("column " + std::to_string(j) + " of A is zero", "/hull/A");
}

HullPoint TorusHull::act(const HullPoint& omega, const Vec& y) const
{
    if (y.size() != n()) throw InputError("shift has wrong dimension");
    if (!all_finite(y)) throw InputError("shift is not finite");
    return HullPoint(omega.coords() + A_ * y);
}

ResonanceReport rationality_heuristic(const TorusHull& hull, int max_coeff, double tol)
{
    const int d = hull.d();
    // Keep the enumeration below ~2e6 vectors.
    int K = max_coeff;
    while (K > 1 && std::pow(2.0 * K + 1.0, d) > 2e6) --K;
    ResonanceReport best;
    double best_norm = std::numeric_limits<double>::infinity();
    for_each_lattice_vector(d, K, [&](const IVec& m) {
        if (m.isZero()) return;
        double r = (hull.A().transpose() * m.cast<double>()).norm();
        if (r <= tol * std::max(1.0, m.cast<double>().norm())) {
            double len = m.cast<double>().norm();
            if (len < best_norm) {
                best_norm = len;
                best.resonant = true;
                best.relation = m;
                best.residual = r;
            }
        }
    });
    return best;
}

// ---------------------------------------------------------------------------

TrigPotential::TrigPotential(int d, double c0, std::vector<TrigMode> modes)
    : d_(d), c0_(c0), modes_(std::move(modes))
{
    if (d < 1) throw InputError("potential dimension must be positive");
    if (!std::isfinite(c0)) throw InputError("potential offset c0 is not finite", "/lagrangian/potential/c0");
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const auto& mode = modes_[i];
        std::string ptr = "/lagrangian/potential/modes/" + std::to_string(i);
        if (mode.k.size() != d) throw InputError("mode wave vector has wrong length", ptr + "/k");
        if (!std::isfinite(mode.a) || !std::isfinite(mode.b))
            throw InputError("mode coefficient is not finite", ptr);
        std::vector<int> key(mode.k.data(), mode.k.data() + d);
        if (!seen.insert(key).second) throw InputError("duplicate wave vector in potential", ptr + "/k");
    }
}

double TrigPotential::value(const Vec& theta) const
{
    double s = c0_;
    for (const auto& mode : modes_) {
        double ph = kTwoPi * mode.k.cast<double>().dot(theta);
        s += mode.a * std::cos(ph) + mode.b * std::sin(ph);
    }
    return s;
}

Vec TrigPotential::gradient(const Vec& theta) const
{
    Vec g = Vec::Zero(d_);
    for (const auto& mode : modes_) {
        Vec k = mode.k.cast<double>();
        double ph = kTwoPi * k.dot(theta);
        g += kTwoPi * (-mode.a * std::sin(ph) + mode.b * std::cos(ph)) * k;
    }
    return g;
}

Mat TrigPotential::hessian(const Vec& theta) const
{
    Mat hess = Mat::Zero(d_, d_);
    for (const auto& mode : modes_) {
        Vec k = mode.k.cast<double>();
        double ph = kTwoPi * k.dot(theta);
        hess -= kTwoPi * kTwoPi * (mode.a * std::cos(ph) + mode.b * std::sin(ph)) * (k * k.transpose());
    }
    return hess;
}

double TrigPotential::gradient_bound() const
{
    double s = 0;
    for (const auto& mode : modes_)
        s += kTwoPi * mode.k.cast<double>().norm() * (std::fabs(mode.a) + std::fabs(mode.b));
    return s;
}

TrigPotential TrigPotential::shifted(double delta) const
{
    return TrigPotential(d_, c0_ + delta, modes_);
}

std::pair<double, double> TrigPotential::grid_range(int resolution) const
{
    if (resolution < 1) throw InputError("potential grid resolution must be positive");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    if (modes_.empty()) return {c0_, c0_};
    std::vector<int> idx(d_, 0);
    Vec theta(d_);
    while (true) {
        for (int i = 0; i < d_; ++i) theta[i] = static_cast<double>(idx[i]) / resolution;
        double p = value(theta);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
        int ax = d_ - 1;
        while (ax >= 0 && idx[ax] == resolution - 1) {
            idx[ax] = 0;
            --ax;
        }
        if (ax < 0) break;
        ++idx[ax];
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------

QuasiPeriodicLagrangian::QuasiPeriodicLagrangian(TorusHull hull, double mass, Vec drift, TrigPotential potential)
    : hull_(std::move(hull)), m_(mass), b_(std::move(drift)), P_(std::move(potential))
{
    if (!(m_ > 0) || !std::isfinite(m_)) throw InputError("mass must be positive and finite", "/lagrangian/m");
    if (b_.size() != hull_.n()) throw InputError("drift must have n components", "/lagrangian/b");
    if (!b_.allFinite()) throw InputError("drift is not finite", "/lagrangian/b");
    if (P_.dim() != hull_.d()) throw InputError("potential dimension differs from hull dimension", "/lagrangian/potential");
}

double QuasiPeriodicLagrangian::kinetic(const Vec& v) const { return 0.5 * m_ * (v - b_).squaredNorm(); }

double QuasiPeriodicLagrangian::lagrangian_at(const Vec& v, const Vec& theta) const
{
    return kinetic(v) + P_.value(theta);
}

double QuasiPeriodicLagrangian::hamiltonian_at(const Vec& p, const Vec& theta) const
{
    return -p.dot(b_) + p.squaredNorm() / (2.0 * m_) - P_.value(theta);
}

double QuasiPeriodicLagrangian::lagrangian(const Vec& x, const Vec& v, const HullPoint& omega) const
{
    return lagrangian_at(v, omega.coords() + hull_.A() * x);
}

double QuasiPeriodicLagrangian::hamiltonian(const Vec& x, const Vec& p, const HullPoint& omega) const
{
    return hamiltonian_at(p, omega.coords() + hull_.A() * x);
}

Vec QuasiPeriodicLagrangian::optimal_velocity(const Vec& p) const { return b_ - p / m_; }
Vec QuasiPeriodicLagrangian::dp_hamiltonian(const Vec& p) const { return p / m_ - b_; }
Vec QuasiPeriodicLagrangian::dv_lagrangian(const Vec& v) const { return m_ * (v - b_); }

Vec QuasiPeriodicLagrangian::dx_lagrangian_at(const Vec& theta) const
{
    return hull_.A().transpose() * P_.gradient(theta);
}

double QuasiPeriodicLagrangian::x_lipschitz_bound() const
{
    // |A^T g| <= ||A||_2 |g|
    Eigen::JacobiSVD<Mat> svd(hull_.A());
    return svd.singularValues()[0] * P_.gradient_bound();
}

QuasiPeriodicLagrangian auto_shift(const QuasiPeriodicLagrangian& lag, int resolution)
{
    auto [lo, hi] = lag.potential().grid_range(resolution);
    (void)hi;
    return QuasiPeriodicLagrangian(lag.hull(), lag.mass(), lag.drift(), lag.potential().shifted(-lo));
}

// ---------------------------------------------------------------------------

StationaryBasis::StationaryBasis(TorusHull hull, int K) : hull_(std::move(hull)), K_(K)
{
    if (K < 1) throw InputError("basis order K must be at least 1", "/lp/basis_K");
    for_each_lattice_vector(hull_.d(), K, [&](const IVec& k) {
        if (k.isZero()) return;
        // cos/sin of -k duplicate those of k up to sign
        int lead = 0;
        while (k[lead] == 0) ++lead;
        if (k[lead] < 0) return;
        elements_.push_back({k, BasisKind::Cos});
        elements_.push_back({k, BasisKind::Sin});
    });
}

const BasisElement& StationaryBasis::element(std::size_t i) const
{
    if (i >= elements_.size()) throw std::out_of_range("basis index out of range");
    return elements_[i];
}

BasisValue StationaryBasis::eval(std::size_t i, const HullPoint& omega) const
{
    const auto& e = element(i);
    Vec k = e.k.cast<double>();
    double ph = kTwoPi * k.dot(omega.coords());
    BasisValue out;
    if (e.kind == BasisKind::Cos) {
        out.psi = std::cos(ph);
        out.grad = -kTwoPi * std::sin(ph) * k;
    } else {
        out.psi = std::sin(ph);
        out.grad = kTwoPi * std::cos(ph) * k;
    }
    out.dx = hull_.A().transpose() * out.grad;
    return out;
}

double StationaryBasis::value_at(std::size_t i, const Vec& theta) const
{
    const auto& e = element(i);
    double ph = kTwoPi * e.k.cast<double>().dot(theta);
    return e.kind == BasisKind::Cos ? std::cos(ph) : std::sin(ph);
}

double StationaryBasis::phi(std::size_t i, const Vec& x, const HullPoint& omega) const
{
    return value_at(i, omega.coords() + hull_.A() * x);
}

double StationaryBasis::sup_dx(std::size_t i) const
{
    return kTwoPi * (hull_.A().transpose() * element(i).k.cast<double>()).norm();
}

}  // namespace mather::hull
