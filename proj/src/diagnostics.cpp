#include "mather/diagnostics.hpp"

#include "mather/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mather::diag {

std::vector<double> holonomy_residual(const DiscreteMeasure& mu, const hull::StationaryBasis& basis, double alpha,
                                      const std::vector<double>& nu)
{
    const auto& wg = mu.wgrid();
    const auto& vg = mu.vgrid();
    if (alpha != 0 && nu.size() != wg.size()) throw InputError("trace measure does not match the hull grid");
    std::vector<double> out(basis.size(), 0.0);
    std::vector<hull::BasisValue> at(basis.size());
    std::size_t current = wg.size();
    for (const auto& e : mu.entries()) {
        if (e.iw != current) {
            hull::HullPoint w(wg.node(e.iw));
            for (std::size_t k = 0; k < basis.size(); ++k) at[k] = basis.eval(k, w);
            current = e.iw;
        }
        const Vec& v = vg.node(e.iv);
        for (std::size_t k = 0; k < basis.size(); ++k) out[k] += e.w * (v.dot(at[k].dx) - alpha * at[k].psi);
    }
    if (alpha != 0) {
        for (std::size_t j = 0; j < wg.size(); ++j) {
            if (nu[j] == 0) continue;
            hull::HullPoint w(wg.node(j));
            for (std::size_t k = 0; k < basis.size(); ++k) out[k] += alpha * nu[j] * basis.eval(k, w).psi;
        }
    }
    for (std::size_t k = 0; k < basis.size(); ++k) out[k] = std::fabs(out[k]) / (basis.sup_dx(k) + alpha);
    return out;
}

namespace {

// chi(s) = exp(1 - 1/(1 - s^2)) for s < 1; returns value and d chi / ds.
std::pair<double, double> bump(double s)
{
    if (s >= 1) return {0.0, 0.0};
    const double q = 1 - s * s;
    const double c = std::exp(1 - 1 / q);
    return {c, -2 * s / (q * q) * c};
}

double bump_slope_max()
{
    double best = 0;
    for (int i = 1; i < 100000; ++i) best = std::max(best, std::fabs(bump(i / 100000.0).second));
    return best;
}

}  // namespace

InvarianceResult invariance_residual(const DiscreteMeasure& mu, const hull::QuasiPeriodicLagrangian& lag, double alpha,
                                     const InvarianceTests& tests)
{
    const auto& vg = mu.vgrid();
    const auto& wg = mu.wgrid();
    const int n = lag.n();
    const double rho = tests.radius > 0 ? tests.radius : vg.v_max() / 5;
    int per_axis = tests.bumps_per_axis;
    if (per_axis <= 0) per_axis = static_cast<int>(std::floor(2 * vg.v_max() / (rho / 2))) + 1;
    std::vector<Vec> centers;
    {
        const double step = per_axis > 1 ? 2 * vg.v_max() / (per_axis - 1) : 0.0;
        std::vector<int> idx(n, 0);
        while (true) {
            Vec c(n);
            for (int a = 0; a < n; ++a) c[a] = -vg.v_max() + step * idx[a];
            if (per_axis == 1) c.setZero();
            centers.push_back(c);
            int a = n - 1;
            while (a >= 0 && idx[a] == per_axis - 1) idx[a--] = 0;
            if (a < 0) break;
            ++idx[a];
        }
    }
    hull::StationaryBasis basis(lag.hull(), tests.K);
    const std::size_t P = basis.size() + 1, R = centers.size();
    const double slope = bump_slope_max() / rho;
    const double grad_bound = lag.x_lipschitz_bound() / lag.mass();

    InvarianceResult res;
    std::vector<double> sum(P * R, 0.0), asum(P * R, 0.0);
    double outside = 0;
    std::vector<double> psi(P);
    std::vector<Vec> dx(P, Vec::Zero(n));
    std::size_t current = wg.size();
    for (const auto& e : mu.entries()) {
        if (e.iw != current) {
            hull::HullPoint w(wg.node(e.iw));
            psi[0] = 1.0;
            dx[0].setZero();
            for (std::size_t k = 0; k < basis.size(); ++k) {
                auto bv = basis.eval(k, w);
                psi[k + 1] = bv.psi;
                dx[k + 1] = bv.dx;
            }
            current = e.iw;
        }
        const Vec& v = vg.node(e.iv);
        const Vec theta = wg.node(e.iw);
        const Vec drift_term = alpha * (v - lag.drift());
        const Vec Y = lag.dx_lagrangian_at(theta) / lag.mass() + drift_term;
        bool covered = false;
        for (std::size_t r = 0; r < R; ++r) {
            Vec off = v - centers[r];
            const double dist = off.norm();
            if (dist >= rho) continue;
            covered = true;
            auto [chi, dchi] = bump(dist / rho);
            Vec gchi = dist > 0 ? Vec(off * (dchi / (rho * dist))) : Vec(Vec::Zero(n));
            const double gy = gchi.dot(Y), ga = gchi.dot(drift_term);
            for (std::size_t k = 0; k < P; ++k) {
                sum[k * R + r] += e.w * (chi * v.dot(dx[k]) + psi[k] * gy);
                asum[k * R + r] += e.w * psi[k] * ga;
            }
        }
        if (!covered) outside += e.w;
    }
    res.residuals.resize(P * R);
    res.alpha_terms.resize(P * R);
    for (std::size_t k = 0; k < P; ++k) {
        const double sdx = k == 0 ? 0.0 : basis.sup_dx(k - 1);
        for (std::size_t r = 0; r < R; ++r) {
            const double vmax = centers[r].norm() + rho;
            const double dv = (centers[r] - lag.drift()).norm() + rho;
            const double norm = vmax * sdx + slope * (grad_bound + alpha * dv);
            res.residuals[k * R + r] = norm > 0 ? std::fabs(sum[k * R + r]) / norm : 0.0;
            res.alpha_terms[k * R + r] = norm > 0 ? std::fabs(asum[k * R + r]) / norm : 0.0;
        }
    }
    res.max = *std::max_element(res.residuals.begin(), res.residuals.end());
    res.max_alpha_term = *std::max_element(res.alpha_terms.begin(), res.alpha_terms.end());
    if (outside > 0)
        res.warnings.push_back("test velocities do not cover the measure: mass " + std::to_string(outside) +
                               " lies outside every bump");
    return res;
}

double default_mass_floor(const hj::OmegaGrid& grid) { return 1e-4 / static_cast<double>(grid.size()); }

GraphTable graph_extract(const DiscreteMeasure& mu, const hull::TorusHull& hull, double mass_floor)
{
    const auto& vg = mu.vgrid();
    const auto& wg = mu.wgrid();
    GraphTable t;
    t.mass_floor = mass_floor;
    const auto& E = mu.entries();
    std::vector<long> row_of(wg.size(), -1);
    for (std::size_t a = 0; a < E.size();) {
        std::size_t b = a;
        double mass = 0;
        Vec vsum = Vec::Zero(vg.n());
        while (b < E.size() && E[b].iw == E[a].iw) {
            mass += E[b].w;
            vsum += E[b].w * vg.node(E[b].iv);
            ++b;
        }
        if (mass >= mass_floor && mass > 0) {
            double spread = 0;
            for (std::size_t i = a; i < b; ++i) {
                if (E[i].w < mass_floor) continue;
                for (std::size_t j = i + 1; j < b; ++j)
                    if (E[j].w >= mass_floor) spread = std::max(spread, (vg.node(E[i].iv) - vg.node(E[j].iv)).norm());
            }
            row_of[E[a].iw] = static_cast<long>(t.rows.size());
            t.rows.push_back({E[a].iw, mass, vsum / mass, spread});
            t.max_spread = std::max(t.max_spread, spread);
        }
        a = b;
    }
    if (t.rows.size() < 2) return t;
    double C = 0;
    const double N = wg.N();
    for (const auto& row : t.rows) {
        const Vec theta = wg.node(row.iw);
        for (int a = 0; a < hull.n(); ++a) {
            for (double step : {1.0, -1.0, 2.0, -2.0, 4.0, -4.0}) {
                const double y = step / N;
                const std::size_t j = wg.nearest(hull::HullPoint(theta + y * hull.A().col(a)).coords());
                if (j == row.iw || row_of[j] < 0) continue;
                const auto& other = t.rows[static_cast<std::size_t>(row_of[j])];
                C = std::max(C, (other.vbar - row.vbar).norm() / std::fabs(y));
                ++t.lipschitz_pairs;
            }
        }
    }
    if (t.lipschitz_pairs > 0) t.lipschitz = C;
    return t;
}

double gradient_consistency(const GraphTable& table, const hj::ValueField& field,
                            const hull::QuasiPeriodicLagrangian& lag)
{
    double worst = 0;
    for (const auto& row : table.rows) {
        hull::HullPoint w(field.grid.node(row.iw));
        worst = std::max(worst, (row.vbar - lag.optimal_velocity(hj::x_gradient(field, w))).norm());
    }
    return worst;
}

int default_curvature_stencil(const hj::OmegaGrid& grid)
{
    return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(grid.N())))));
}

CurvatureReport curvature_check_1d(const hj::ValueField& field, const DiscreteMeasure& mu,
                                   const hull::QuasiPeriodicLagrangian& lag, double mass_floor, int stencil)
{
    if (lag.d() != 1 || lag.n() != 1 || lag.hull().A()(0, 0) != 1.0)
        throw InputError("curvature check is only defined for d = n = 1 and A = (1)", "/hull");
    const auto& g = field.grid;
    const double N = g.N();
    const double alpha = field.alpha;
    const int k = stencil > 0 ? stencil : default_curvature_stencil(g);
    if (2 * k >= g.N()) throw InputError("curvature stencil wider than half the grid");
    const double scale = N * N / (static_cast<double>(k) * k);
    auto trace = mu.trace();
    CurvatureReport rep;
    rep.stencil = k;
    rep.semiconcavity = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const int ii = static_cast<int>(i);
        const double uxx = (field.U[g.linear_index({ii + k})] - 2 * field.U[i] + field.U[g.linear_index({ii - k})]) * scale;
        rep.semiconcavity = std::max(rep.semiconcavity, uxx);
        if (trace[i] < mass_floor || trace[i] <= 0) continue;
        const double Ppp = lag.potential().hessian(g.node(i))(0, 0);
        rep.lhs += uxx * uxx * trace[i];
        rep.rhs += (alpha * alpha + 2 * Ppp) * trace[i];
        rep.sup_uxx = std::max(rep.sup_uxx, std::fabs(uxx));
    }
    rep.margin = rep.rhs - rep.lhs;
    return rep;
}

double oscillation(const hj::ValueField& field)
{
    auto [lo, hi] = std::minmax_element(field.U.begin(), field.U.end());
    return field.alpha * (*hi - *lo);
}

double richardson(double f_alpha, double f_2alpha) { return 2 * f_alpha - f_2alpha; }

}  // namespace mather::diag
