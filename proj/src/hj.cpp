#include "mather/hj.hpp"

#include "mather/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mather::hj {

namespace {
int wrap_index(long j, int N)
{
    long r = j % N;
    return static_cast<int>(r < 0 ? r + N : r);
}
}  // namespace

// ---------------------------------------------------------------------------

OmegaGrid::OmegaGrid(int d, int N) : d_(d), N_(N), stride_(d)
{
    if (d < 1) throw InputError("grid dimension must be positive");
    if (N < 4) throw InputError("grid needs at least 4 nodes per dimension", "/solver/N");
    size_ = 1;
    for (int a = d - 1; a >= 0; --a) {
        stride_[a] = size_;
        size_ *= static_cast<std::size_t>(N);
    }
}

std::vector<int> OmegaGrid::multi_index(std::size_t i) const
{
    std::vector<int> idx(d_);
    for (int a = 0; a < d_; ++a) {
        idx[a] = static_cast<int>(i / stride_[a]);
        i %= stride_[a];
    }
    return idx;
}

std::size_t OmegaGrid::linear_index(const std::vector<int>& idx) const
{
    std::size_t i = 0;
    for (int a = 0; a < d_; ++a) i += stride_[a] * wrap_index(idx[a], N_);
    return i;
}

Vec OmegaGrid::node(std::size_t i) const
{
    auto idx = multi_index(i);
    Vec t(d_);
    for (int a = 0; a < d_; ++a) t[a] = static_cast<double>(idx[a]) / N_;
    return t;
}

std::size_t OmegaGrid::nearest(const Vec& theta) const
{
    std::size_t i = 0;
    for (int a = 0; a < d_; ++a) {
        double s = hull::wrap01(theta[a]) * N_;
        long j = static_cast<long>(std::floor(s));
        if (s - j > 0.5) ++j;
        i += stride_[a] * wrap_index(j, N_);
    }
    return i;
}

double OmegaGrid::interpolate(const std::vector<double>& U, const Vec& theta) const
{
    // Up to 8 dimensions on the stack; larger d is far beyond desk scale anyway.
    int base[16];
    double frac[16];
    for (int a = 0; a < d_; ++a) {
        double s = (theta[a] - std::floor(theta[a])) * N_;
        long j = static_cast<long>(std::floor(s));
        frac[a] = s - j;
        base[a] = wrap_index(j, N_);
    }
    double acc = 0;
    const int corners = 1 << d_;
    for (int mask = 0; mask < corners; ++mask) {
        double w = 1;
        std::size_t idx = 0;
        for (int a = 0; a < d_; ++a) {
            bool up = (mask >> a) & 1;
            w *= up ? frac[a] : 1.0 - frac[a];
            int j = up ? (base[a] + 1 == N_ ? 0 : base[a] + 1) : base[a];
            idx += stride_[a] * j;
        }
        if (w != 0.0) acc += w * U[idx];
    }
    return acc;
}

// ---------------------------------------------------------------------------

ControlGrid::ControlGrid(int n, double v_max, int M) : n_(n), v_max_(v_max), M_(M)
{
    if (n < 1) throw InputError("control dimension must be positive");
    if (!(v_max > 0) || !std::isfinite(v_max)) throw InputError("v_max must be positive", "/solver/v_max");
    if (M < 3 || M % 2 == 0) throw InputError("M must be odd and at least 3", "/solver/M");
    std::size_t total = 1;
    for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(M);
    nodes_.reserve(total);
    const double dv = spacing();
    for (std::size_t i = 0; i < total; ++i) {
        Vec v(n);
        std::size_t r = i;
        for (int a = n - 1; a >= 0; --a) {
            int j = static_cast<int>(r % M);
            r /= M;
            // Symmetric by construction: the center node is exactly zero.
            v[a] = (j - (M - 1) / 2) * dv;
        }
        nodes_.push_back(v);
    }
    center_ = (total - 1) / 2;
}

bool ControlGrid::on_boundary(std::size_t i) const
{
    std::size_t r = i;
    for (int a = 0; a < n_; ++a) {
        int j = static_cast<int>(r % M_);
        r /= M_;
        if (j == 0 || j == M_ - 1) return true;
    }
    return false;
}

std::size_t ControlGrid::nearest(const Vec& v, bool* clamped) const
{
    const double dv = spacing();
    const int half = (M_ - 1) / 2;
    std::size_t i = 0;
    bool cl = false;
    for (int a = 0; a < n_; ++a) {
        long j = std::lround(v[a] / dv);
        if (j < -half) { j = -half; cl = true; }
        if (j > half) { j = half; cl = true; }
        i = i * M_ + static_cast<std::size_t>(j + half);
    }
    if (clamped) *clamped = cl;
    return i;
}

double default_v_max(const hull::QuasiPeriodicLagrangian& lag, int resolution)
{
    auto [lo, hi] = lag.potential().grid_range(resolution);
    double b = lag.drift().size() ? lag.drift().cwiseAbs().maxCoeff() : 0.0;
    return b + 2.0 * std::sqrt(2.0 * (hi - lo) / lag.mass()) + 1.0;
}

double default_h(double v_max, int N, const hull::TorusHull& hull)
{
    return 1.0 / (2.0 * v_max * N * hull.max_abs());
}

double ValueField::u(const Vec& x, const hull::HullPoint& omega) const
{
    return grid.interpolate(U, omega.coords() + hull.A() * x);
}

// ---------------------------------------------------------------------------

namespace {

struct Corner {
    std::vector<int> offset;  // per axis
    double w;
};

struct ControlStencil {
    double cost;                  // w_h * kinetic(v)
    std::vector<Corner> others;   // corners away from the departure node
    double self_w = 0;            // weight landing back on the departure node
};

class Bellman {
public:
    Bellman(const hull::QuasiPeriodicLagrangian& lag, const OmegaGrid& grid, const ControlGrid& ctrl,
            double alpha, double h)
        : grid_(grid), ctrl_(ctrl), gamma_(std::exp(-alpha * h))
    {
        const double wh = -std::expm1(-alpha * h) / alpha;
        const int d = grid.d();
        const int N = grid.N();
        wP_.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) wP_[i] = wh * lag.potential().value(grid.node(i));
        stencils_.reserve(ctrl.size());
        for (std::size_t c = 0; c < ctrl.size(); ++c) {
            ControlStencil st;
            st.cost = wh * lag.kinetic(ctrl.node(c));
            Vec shift = h * (lag.hull().A() * ctrl.node(c)) * static_cast<double>(N);
            std::vector<int> off(d);
            std::vector<double> frac(d);
            for (int a = 0; a < d; ++a) {
                double fl = std::floor(shift[a]);
                off[a] = static_cast<int>(fl);
                frac[a] = shift[a] - fl;
            }
            for (int mask = 0; mask < (1 << d); ++mask) {
                Corner cn{std::vector<int>(d), 1.0};
                bool self = true;
                for (int a = 0; a < d; ++a) {
                    bool up = (mask >> a) & 1;
                    cn.w *= up ? frac[a] : 1.0 - frac[a];
                    cn.offset[a] = off[a] + (up ? 1 : 0);
                    if (wrap_index(cn.offset[a], N) != 0) self = false;
                }
                if (cn.w == 0.0) continue;
                if (self)
                    st.self_w += cn.w;
                else
                    st.others.push_back(std::move(cn));
            }
            stencils_.push_back(std::move(st));
        }
    }

    double gamma() const { return gamma_; }

    /// Rest value (w_h (K(0) + P))/(1 - g): a supersolution of the scheme.
    std::vector<double> rest_value() const
    {
        const auto& st = stencils_[ctrl_.center()];
        std::vector<double> U(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) U[i] = (st.cost + wP_[i]) / (1.0 - gamma_);
        return U;
    }

    /// Returns the minimising control index and writes the value.  `implicit`
    /// solves the self-referencing corner exactly (same fixed point).
    std::size_t update(const std::vector<double>& U, std::size_t i, const std::vector<int>& idx,
                       bool implicit, double& value) const
    {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        std::vector<int>& nb = scratch_;
        nb.resize(idx.size());
        for (std::size_t c = 0; c < stencils_.size(); ++c) {
            const auto& st = stencils_[c];
            double others = 0;
            for (const auto& cn : st.others) {
                for (std::size_t a = 0; a < idx.size(); ++a) nb[a] = idx[a] + cn.offset[a];
                others += cn.w * U[grid_.linear_index(nb)];
            }
            double num = st.cost + wP_[i] + gamma_ * others;
            double cand = implicit ? num / (1.0 - gamma_ * st.self_w) : num + gamma_ * st.self_w * U[i];
            if (cand < best) {
                best = cand;
                arg = c;
            }
        }
        value = best;
        return arg;
    }

    /// sup |T(U) - U| for the plain (Jacobi) operator, with its argmin controls.
    double residual(const std::vector<double>& U, std::vector<std::size_t>* argmin) const
    {
        double r = 0;
        if (argmin) argmin->resize(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            double val;
            std::size_t c = update(U, i, grid_.multi_index(i), false, val);
            r = std::max(r, std::fabs(val - U[i]));
            if (argmin) (*argmin)[i] = c;
        }
        return r;
    }

private:
    const OmegaGrid& grid_;
    const ControlGrid& ctrl_;
    double gamma_;
    std::vector<double> wP_;
    std::vector<ControlStencil> stencils_;
    mutable std::vector<int> scratch_;
};

}  // namespace

ValueField solve_value_function(const hull::QuasiPeriodicLagrangian& lag, const OmegaGrid& grid,
                                const ControlGrid& ctrl, double alpha, double h, const SolveOptions& opts)
{
    if (!(alpha > 0) || !std::isfinite(alpha)) throw InputError("alpha must be positive", "/solver/alpha");
    if (!(h > 0) || !std::isfinite(h)) throw InputError("time step h must be positive", "/solver/h");
    if (!(opts.tol > 0)) throw InputError("tolerance must be positive", "/solver/tol");
    if (opts.max_iter < 1) throw InputError("max_iter must be positive", "/solver/max_iter");
    if (grid.d() != lag.d()) throw InputError("grid dimension differs from hull dimension");
    if (ctrl.n() != lag.n()) throw InputError("control dimension differs from driving dimension");

    Bellman op(lag, grid, ctrl, alpha, h);
    if (!(op.gamma() < 1.0)) throw InputError("alpha * h too small: discount factor rounds to 1", "/solver/h");

    std::vector<double> U = op.rest_value();
    std::vector<double> next(U.size());
    const int d = grid.d();
    const int N = grid.N();
    int it = 0;
    double res = std::numeric_limits<double>::infinity();
    bool converged = false;
    while (it < opts.max_iter) {
        ++it;
        double change = 0;
        if (opts.sweep == Sweep::Jacobi) {
            for (std::size_t i = 0; i < grid.size(); ++i) {
                op.update(U, i, grid.multi_index(i), false, next[i]);
                change = std::max(change, std::fabs(next[i] - U[i]));
            }
            U.swap(next);
        } else {
            // Fast sweeping: cycle through the 2^d axis orientations.
            const int orient = (it - 1) % (1 << d);
            std::vector<int> idx(d);
            for (std::size_t t = 0; t < grid.size(); ++t) {
                std::size_t r = t;
                for (int a = d - 1; a >= 0; --a) {
                    int j = static_cast<int>(r % N);
                    r /= N;
                    idx[a] = ((orient >> a) & 1) ? N - 1 - j : j;
                }
                std::size_t i = grid.linear_index(idx);
                double val;
                op.update(U, i, idx, true, val);
                change = std::max(change, std::fabs(val - U[i]));
                U[i] = val;
            }
        }
        if (change <= opts.tol) {
            res = op.residual(U, nullptr);
            if (res <= opts.tol) {
                converged = true;
                break;
            }
        }
    }
    std::vector<std::size_t> argmin;
    res = op.residual(U, &argmin);
    if (!converged && res > opts.tol)
        throw NumericError("value iteration did not converge after " + std::to_string(it) +
                           " iterations (residual " + std::to_string(res) + ")");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (ctrl.on_boundary(argmin[i]))
            throw NumericError("minimising velocity hits the control bound v_max = " +
                               std::to_string(ctrl.v_max()) + " at node " + std::to_string(i) +
                               "; increase solver.v_max");
    }
    ValueField f{grid, lag.hull(), alpha, h, std::move(U), it, res};
    return f;
}

std::vector<double> bellman_apply(const hull::QuasiPeriodicLagrangian& lag, const OmegaGrid& grid,
                                  const ControlGrid& ctrl, double alpha, double h,
                                  const std::vector<double>& U)
{
    if (U.size() != grid.size()) throw InputError("field size does not match grid");
    Bellman op(lag, grid, ctrl, alpha, h);
    std::vector<double> out(U.size());
    for (std::size_t i = 0; i < grid.size(); ++i) op.update(U, i, grid.multi_index(i), false, out[i]);
    return out;
}

ValueField make_field(const hull::TorusHull& hull, const OmegaGrid& grid, double alpha, std::vector<double> U)
{
    if (U.size() != grid.size()) throw InputError("field size does not match grid");
    if (grid.d() != hull.d()) throw InputError("grid dimension differs from hull dimension");
    return ValueField{grid, hull, alpha, 0.0, std::move(U), 0, 0.0};
}

// ---------------------------------------------------------------------------

Vec x_gradient(const ValueField& field, const hull::HullPoint& omega)
{
    const int d = field.grid.d();
    const double s = field.grid.spacing();
    Vec g(d);
    Vec t = omega.coords();
    for (int a = 0; a < d; ++a) {
        Vec tp = t, tm = t;
        tp[a] += s;
        tm[a] -= s;
        g[a] = (field.grid.interpolate(field.U, tp) - field.grid.interpolate(field.U, tm)) / (2 * s);
    }
    return field.hull.A().transpose() * g;
}

std::vector<double> residual_nodes(const ValueField& field, const hull::QuasiPeriodicLagrangian& lag)
{
    const auto& grid = field.grid;
    const int d = grid.d();
    const double N = grid.N();
    std::vector<double> out(grid.size());
    Vec gc(d), gf(d), gb(d);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto idx = grid.multi_index(i);
        const double u0 = field.U[i];
        for (int a = 0; a < d; ++a) {
            auto ip = idx, im = idx;
            ++ip[a];
            --im[a];
            double up = field.U[grid.linear_index(ip)];
            double um = field.U[grid.linear_index(im)];
            gc[a] = 0.5 * (up - um) * N;
            gf[a] = (up - u0) * N;
            gb[a] = (u0 - um) * N;
        }
        Vec theta = grid.node(i);
        double best = std::numeric_limits<double>::infinity();
        for (const Vec* g : {&gc, &gf, &gb}) {
            Vec p = lag.hull().A().transpose() * (*g);
            best = std::min(best, std::fabs(lag.hamiltonian_at(p, theta) + field.alpha * u0));
        }
        out[i] = best;
    }
    return out;
}

HJResidual residual_hj(const ValueField& field, const hull::QuasiPeriodicLagrangian& lag)
{
    auto r = residual_nodes(field, lag);
    HJResidual out;
    out.sup = *std::max_element(r.begin(), r.end());
    std::sort(r.begin(), r.end());
    std::size_t cut = r.size() / 20;
    double s = 0;
    for (std::size_t i = cut; i < r.size() - cut; ++i) s += r[i];
    out.trimmed_mean = s / static_cast<double>(r.size() - 2 * cut);
    return out;
}

MollifyResult action_mollify(const ValueField& field, double eps, int nodes)
{
    if (!(eps > 0) || !std::isfinite(eps)) throw InputError("mollifier radius must be positive");
    if (nodes < 1) throw InputError("mollifier needs at least one quadrature node per axis");
    MollifyResult res{field, false, ""};
    if (eps * field.grid.N() * field.hull.max_abs() < 0.5) {
        res.collapsed = true;
        res.warning = "mollifier radius below half a grid cell; field returned unchanged";
        return res;
    }
    const int n = field.hull.n();
    std::vector<Vec> ys;
    std::vector<double> ws;
    std::size_t total = 1;
    for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(nodes);
    for (std::size_t q = 0; q < total; ++q) {
        Vec y(n);
        std::size_t r = q;
        for (int a = n - 1; a >= 0; --a) {
            int j = static_cast<int>(r % nodes);
            r /= nodes;
            y[a] = -eps + (j + 0.5) * (2.0 * eps / nodes);
        }
        double s = y.squaredNorm() / (eps * eps);
        if (s >= 1.0) continue;
        ys.push_back(y);
        ws.push_back(std::exp(-1.0 / (1.0 - s)));
    }
    double total_w = std::accumulate(ws.begin(), ws.end(), 0.0);
    for (auto& w : ws) w /= total_w;

    const auto& A = field.hull.A();
    for (std::size_t i = 0; i < field.grid.size(); ++i) {
        Vec t = field.grid.node(i);
        double s = 0;
        for (std::size_t q = 0; q < ys.size(); ++q) s += ws[q] * field.grid.interpolate(field.U, t + A * ys[q]);
        res.field.U[i] = s;
    }
    return res;
}

RegularityReport regularity_report(const ValueField& field)
{
    RegularityReport rep;
    const auto& grid = field.grid;
    const auto& A = field.hull.A();
    const double N = grid.N();
    const double hx = 1.0 / N;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u0 = field.U[i];
        lo = std::min(lo, u0);
        hi = std::max(hi, u0);
        Vec t = grid.node(i);
        for (int j = 0; j < A.cols(); ++j) {
            Vec step = A.col(j) * hx;
            double up = grid.interpolate(field.U, t + step);
            double um = grid.interpolate(field.U, t - step);
            rep.lip_x = std::max(rep.lip_x, std::fabs(up - u0) / hx);
            rep.semiconcavity = std::max(rep.semiconcavity, (up - 2 * u0 + um) / (hx * hx));
        }
        auto idx = grid.multi_index(i);
        for (int a = 0; a < grid.d(); ++a) {
            auto ip = idx;
            ++ip[a];
            rep.lip_omega = std::max(rep.lip_omega, std::fabs(field.U[grid.linear_index(ip)] - u0) * N);
        }
    }
    rep.osc_alpha_u = field.alpha * (hi - lo);
    return rep;
}

}  // namespace mather::hj
