#include "mather/mather_lp.hpp"

#include "mather/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace mather::lp {

TraceSpec TraceSpec::parse(const std::string& s, int d)
{
    TraceSpec t;
    if (s == "occupation") return t;
    if (s == "uniform") {
        t.kind = Kind::Uniform;
        return t;
    }
    if (s.rfind("delta:", 0) == 0) {
        t.kind = Kind::Delta;
        std::stringstream ss(s.substr(6));
        std::vector<double> vals;
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw InputError("cannot parse delta trace coordinate '" + tok + "'", "/lp/nu");
            }
        }
        if (static_cast<int>(vals.size()) != d)
            throw InputError("delta trace needs " + std::to_string(d) + " coordinates", "/lp/nu");
        t.point = Eigen::Map<Vec>(vals.data(), d);
        return t;
    }
    throw InputError("trace must be 'occupation', 'uniform' or 'delta:<w>'", "/lp/nu");
}

std::string TraceSpec::str() const
{
    switch (kind) {
    case Kind::Occupation: return "occupation";
    case Kind::Uniform: return "uniform";
    case Kind::Delta: break;
    }
    std::ostringstream os;
    os.precision(17);
    os << "delta:";
    for (Eigen::Index i = 0; i < point.size(); ++i) os << (i ? "," : "") << point[i];
    return os.str();
}

std::vector<double> uniform_trace(const hj::OmegaGrid& grid)
{
    return std::vector<double>(grid.size(), 1.0 / grid.size());
}

std::vector<double> delta_trace(const hj::OmegaGrid& grid, const Vec& omega)
{
    std::vector<double> nu(grid.size(), 0.0);
    nu[grid.nearest(hull::HullPoint(omega).coords())] = 1.0;
    return nu;
}

MatherLP::MatherLP(const hull::QuasiPeriodicLagrangian& lag, hj::ControlGrid vgrid, hj::OmegaGrid wgrid,
                   const hull::StationaryBasis& basis, double alpha, std::vector<double> nu, LPOptions opts)
    : vgrid_(std::move(vgrid)), wgrid_(std::move(wgrid)), alpha_(alpha), nu_(std::move(nu)), opts_(opts),
      n_(lag.n()), K_(basis.order()), V_(vgrid_.size()), W_(wgrid_.size()), B_(basis.size())
{
    if (B_ == 0) throw InputError("test basis is empty", "/lp/basis_K");
    if (vgrid_.n() != lag.n() || wgrid_.d() != lag.d() || basis.hull().d() != lag.d() || basis.hull().n() != lag.n())
        throw InputError("grid or basis dimensions do not match the Lagrangian");
    if (!(alpha >= 0) || !std::isfinite(alpha)) throw InputError("discount must be finite and non-negative", "/solver/alpha");
    if (!(opts_.slack >= 0) || !std::isfinite(opts_.slack)) throw InputError("slack band must be non-negative", "/lp/slack");
    if (nu_.size() != W_) throw InputError("trace measure is not supported on the hull grid", "/lp/nu");
    double mass = 0;
    for (double w : nu_) {
        if (!(w >= 0)) throw InputError("trace measure has a negative weight", "/lp/nu");
        mass += w;
    }
    if (std::fabs(mass - 1.0) > 1e-9) throw InputError("trace measure is not normalized", "/lp/nu");
    if (V_ * W_ > opts_.max_variables)
        throw InputError("linear program has " + std::to_string(V_ * W_) + " variables, above the cap of " +
                             std::to_string(opts_.max_variables),
                         "/lp/max_variables");

    kin_.resize(V_);
    vflat_.resize(V_ * n_);
    for (std::size_t i = 0; i < V_; ++i) {
        kin_[i] = lag.kinetic(vgrid_.node(i));
        for (int a = 0; a < n_; ++a) vflat_[i * n_ + a] = vgrid_.node(i)[a];
    }
    pot_.resize(W_);
    phi_.resize(W_ * B_);
    dphi_.resize(W_ * B_ * n_);
    nu_phi_.assign(B_, 0.0);
    for (std::size_t j = 0; j < W_; ++j) {
        hull::HullPoint w(wgrid_.node(j));
        pot_[j] = lag.potential().value(w.coords());
        for (std::size_t k = 0; k < B_; ++k) {
            auto bv = basis.eval(k, w);
            phi_[j * B_ + k] = bv.psi;
            for (int a = 0; a < n_; ++a) dphi_[(j * B_ + k) * n_ + a] = bv.dx[a];
            nu_phi_[k] += bv.psi * nu_[j];
        }
    }

    const int d = wgrid_.d(), N = wgrid_.N();
    const std::size_t Q = 2 * static_cast<std::size_t>(K_) + 1;
    slot_.resize(B_);
    is_sin_.resize(B_);
    atk_.resize(B_ * n_);
    for (std::size_t k = 0; k < B_; ++k) {
        const auto& e = basis.element(k);
        std::size_t idx = 0;
        for (int a = 0; a < d; ++a) idx = idx * Q + static_cast<std::size_t>(e.k[a] + K_);
        slot_[k] = idx;
        is_sin_[k] = e.kind == hull::BasisKind::Sin;
        Vec g = 2 * std::numbers::pi * (lag.hull().A().transpose() * e.k.cast<double>());
        for (int a = 0; a < n_; ++a) atk_[k * n_ + a] = g[a];
    }
    E_.resize(static_cast<std::size_t>(N) * Q);
    for (int j = 0; j < N; ++j)
        for (int m = -K_; m <= K_; ++m) {
            // reduce m j mod N first so the angle stays exact in [0, 2 pi)
            const long r = ((static_cast<long>(m) * j) % N + N) % N;
            E_[j * Q + static_cast<std::size_t>(m + K_)] = std::polar(1.0, 2 * std::numbers::pi * r / N);
        }

    scale_.resize(B_);
    for (std::size_t k = 0; k < B_; ++k) {
        double s = basis.sup_dx(k) + alpha_;
        scale_[k] = s > 0 ? s : 1.0;
    }
    const std::size_t R = rows();
    lo_.resize(R);
    hi_.resize(R);
    lo_[0] = hi_[0] = 1.0;
    for (std::size_t k = 0; k < B_; ++k) {
        double r = -alpha_ * nu_phi_[k] / scale_[k];
        lo_[1 + k] = r - opts_.slack;
        hi_[1 + k] = r + opts_.slack;
        if (opts_.holonomic) {
            lo_[1 + B_ + k] = nu_phi_[k] - opts_.slack;
            hi_[1 + B_ + k] = nu_phi_[k] + opts_.slack;
        }
    }
}

void MatherLP::column(std::size_t j, Vec& out) const
{
    out.setZero(rows());
    const std::size_t iv = j % V_, iw = j / V_;
    const Vec& v = vgrid_.node(iv);
    out[0] = 1.0;
    for (std::size_t k = 0; k < B_; ++k) {
        const double* D = &dphi_[(iw * B_ + k) * n_];
        double vd = 0;
        for (int a = 0; a < n_; ++a) vd += v[a] * D[a];
        const double ph = phi_[iw * B_ + k];
        out[1 + k] = (vd - alpha_ * ph) / scale_[k];
        if (opts_.holonomic) out[1 + B_ + k] = ph;
    }
}

void MatherLP::trig_sum(std::vector<std::complex<double>>& coef, std::vector<double>& out) const
{
    // Contract one lattice axis at a time: [outer][m][inner] -> [outer][j][inner].
    const int d = wgrid_.d(), N = wgrid_.N();
    const std::size_t Q = 2 * static_cast<std::size_t>(K_) + 1;
    std::vector<std::complex<double>> next;
    std::size_t outer = 1, inner = coef.size() / Q;
    for (int a = 0; a < d; ++a) {
        next.assign(outer * N * inner, {0.0, 0.0});
        for (std::size_t o = 0; o < outer; ++o)
            for (int j = 0; j < N; ++j) {
                const std::complex<double>* e = &E_[j * Q];
                std::complex<double>* dst = &next[(o * N + j) * inner];
                for (std::size_t m = 0; m < Q; ++m) {
                    const std::complex<double>* src = &coef[(o * Q + m) * inner];
                    // spelled out: operator* goes through the NaN-aware library routine
                    const double wr = e[m].real(), wi = e[m].imag();
                    for (std::size_t in = 0; in < inner; ++in) {
                        const double sr = src[in].real(), si = src[in].imag();
                        dst[in] += std::complex<double>(wr * sr - wi * si, wr * si + wi * sr);
                    }
                }
            }
        coef.swap(next);
        outer *= N;
        inner /= Q;
    }
    out.resize(coef.size());
    for (std::size_t j = 0; j < coef.size(); ++j) out[j] = coef[j].real();
}

void MatherLP::products(const Vec& y, std::vector<double>& out) const
{
    out.resize(cols());
    std::size_t cube = 1;
    for (int a = 0; a < wgrid_.d(); ++a) cube *= 2 * static_cast<std::size_t>(K_) + 1;
    // a cos + b sin = Re[(a - i b) e^{i phase}]
    std::vector<std::vector<std::complex<double>>> coef(1 + n_, std::vector<std::complex<double>>(cube));
    for (std::size_t k = 0; k < B_; ++k) {
        const double yk = y[1 + k] / scale_[k];
        const double sk = -alpha_ * yk + (opts_.holonomic ? y[1 + B_ + k] : 0.0);
        const std::size_t s = slot_[k];
        // D_x cos = -2 pi A^T k sin, D_x sin = 2 pi A^T k cos
        if (is_sin_[k]) {
            coef[0][s] += std::complex<double>(0.0, -sk);
            for (int a = 0; a < n_; ++a) coef[1 + a][s] += yk * atk_[k * n_ + a];
        } else {
            coef[0][s] += sk;
            for (int a = 0; a < n_; ++a) coef[1 + a][s] += std::complex<double>(0.0, yk * atk_[k * n_ + a]);
        }
    }
    std::vector<std::vector<double>> F(1 + n_);
    for (int c = 0; c <= n_; ++c) trig_sum(coef[c], F[c]);
    for (std::size_t j = 0; j < W_; ++j) {
        const double S = y[0] + F[0][j];
        double* o = &out[j * V_];
        if (n_ == 1) {
            const double G = F[1][j];
            for (std::size_t i = 0; i < V_; ++i) o[i] = S + vflat_[i] * G;
            continue;
        }
        for (std::size_t i = 0; i < V_; ++i) {
            const double* v = &vflat_[i * n_];
            double s = S;
            for (int a = 0; a < n_; ++a) s += v[a] * F[1 + a][j];
            o[i] = s;
        }
    }
}

std::vector<std::size_t> MatherLP::priority() const
{
    auto radical_inverse = [](std::size_t i) {
        double r = 0, f = 0.5;
        for (; i; i >>= 1, f *= 0.5)
            if (i & 1) r += f;
        return r;
    };
    std::vector<std::size_t> worder(W_), vorder(V_);
    for (std::size_t j = 0; j < W_; ++j) worder[j] = j;
    for (std::size_t i = 0; i < V_; ++i) vorder[i] = i;
    std::stable_sort(worder.begin(), worder.end(),
                     [&](std::size_t a, std::size_t b) { return radical_inverse(a) < radical_inverse(b); });
    const Vec& c = vgrid_.node(vgrid_.center());
    std::stable_sort(vorder.begin(), vorder.end(), [&](std::size_t a, std::size_t b) {
        return (vgrid_.node(a) - c).squaredNorm() < (vgrid_.node(b) - c).squaredNorm();
    });
    std::vector<std::size_t> out;
    out.reserve(V_ * W_);
    for (std::size_t iv : vorder)
        for (std::size_t iw : worder) out.push_back(iw * V_ + iv);
    return out;
}

Vec MatherLP::activity(const DiscreteMeasure& mu) const
{
    if (mu.vgrid().size() != V_ || mu.wgrid().size() != W_) throw InputError("measure grids do not match the LP");
    Vec act = Vec::Zero(B_);
    for (const auto& e : mu.entries()) {
        const Vec& v = vgrid_.node(e.iv);
        for (std::size_t k = 0; k < B_; ++k) {
            const double* D = &dphi_[(e.iw * B_ + k) * n_];
            double vd = 0;
            for (int a = 0; a < n_; ++a) vd += v[a] * D[a];
            act[k] += e.w * (vd - alpha_ * phi_[e.iw * B_ + k]);
        }
    }
    return act;
}

Vec MatherLP::rhs() const
{
    Vec r(B_);
    for (std::size_t k = 0; k < B_; ++k) r[k] = -alpha_ * nu_phi_[k];
    return r;
}

void MatherLP::write_triplets(std::ostream& os) const
{
    nlohmann::json header = {{"rows", rows()},
                             {"cols", cols()},
                             {"alpha", alpha_},
                             {"basis_K", K_},
                             {"slack", opts_.slack},
                             {"holonomic", opts_.holonomic},
                             {"row_lower", lo_},
                             {"row_upper", hi_},
                             {"row_scale", scale_}};
    os << header.dump() << '\n';
    os.precision(17);
    Vec col;
    for (std::size_t j = 0; j < cols(); ++j) {
        column(j, col);
        for (Eigen::Index i = 0; i < col.size(); ++i)
            if (col[i] != 0.0) os << i << ' ' << j << ' ' << col[i] << '\n';
    }
}

MatherSolution solve(const MatherLP& lp, const SimplexOptions& opts)
{
    MatherSolution out{simplex_solve(lp, opts), std::numeric_limits<double>::quiet_NaN(),
                       DiscreteMeasure(lp.vgrid(), lp.wgrid()), 0.0, {}, {}};
    const auto& raw = out.raw;
    if (raw.status == Status::Infeasible) return out;
    out.value = raw.objective;
    const std::size_t V = lp.vgrid().size();
    for (std::size_t j = 0; j < raw.x.size(); ++j)
        if (raw.x[j] > 0) out.measure.add(j % V, j / V, raw.x[j]);
    out.measure.finalize();
    const std::size_t B = lp.basis_size();
    out.y0 = raw.y[0];
    out.coeffs.resize(B);
    for (std::size_t k = 0; k < B; ++k) out.coeffs[k] = -raw.y[1 + k] / lp.scale(k);
    if (lp.options().holonomic)
        for (std::size_t k = 0; k < B; ++k) out.trace_duals.push_back(raw.y[1 + B + k]);
    return out;
}

DualityReport duality_report(const MatherLP& lp, const MatherSolution& sol, const hull::QuasiPeriodicLagrangian& lag,
                             const hull::StationaryBasis& basis, const hj::ValueField& field, double mollify_eps)
{
    const auto& wg = lp.wgrid();
    if (field.grid.d() != wg.d() || field.grid.N() != wg.N())
        throw InputError("value field and linear program use different hull grids");
    if (std::fabs(field.alpha - lp.alpha()) > 1e-15) throw InputError("value field and linear program use different discounts");
    if (basis.size() != lp.basis_size()) throw InputError("basis does not match the linear program");

    DualityReport rep;
    rep.status = to_string(sol.raw.status);
    rep.basis_K = lp.basis_order();
    rep.slack = lp.options().slack;
    rep.lp_value = sol.value;
    rep.dual_value = sol.raw.dual_value;
    const double alpha = lp.alpha();
    const auto& nu = lp.nu();
    double pde = 0;
    for (std::size_t j = 0; j < wg.size(); ++j) pde += field.U[j] * nu[j];
    rep.pde_value = alpha * pde;
    rep.gap = rep.lp_value - rep.pde_value;

    // Continuous-velocity certificate for phi = sum c_k phi_k.
    double nu_phi = 0, worst = -std::numeric_limits<double>::infinity();
    std::vector<double> phi_j(wg.size());
    std::vector<Vec> dphi_j(wg.size(), Vec::Zero(lag.n()));
    for (std::size_t j = 0; j < wg.size(); ++j) {
        hull::HullPoint w(wg.node(j));
        double ph = 0;
        for (std::size_t k = 0; k < basis.size(); ++k) {
            auto bv = basis.eval(k, w);
            ph += sol.coeffs.empty() ? 0.0 : sol.coeffs[k] * bv.psi;
            if (!sol.coeffs.empty()) dphi_j[j] += sol.coeffs[k] * bv.dx;
        }
        phi_j[j] = ph;
        nu_phi += ph * nu[j];
    }
    for (std::size_t j = 0; j < wg.size(); ++j)
        worst = std::max(worst, lag.hamiltonian_at(dphi_j[j], wg.node(j)) + alpha * phi_j[j]);
    rep.certificate = alpha * nu_phi - worst;

    auto moll = hj::action_mollify(field, mollify_eps);
    rep.mollifier_collapsed = moll.collapsed;
    double nu_u = 0;
    for (std::size_t j = 0; j < wg.size(); ++j) nu_u += moll.field.U[j] * nu[j];
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < wg.size(); ++j) {
        hull::HullPoint w(wg.node(j));
        Vec p = hj::x_gradient(moll.field, w);
        sup = std::max(sup, -alpha * nu_u + lag.hamiltonian_at(p, w.coords()) + alpha * moll.field.U[j]);
    }
    rep.mollified_margin = sup + rep.lp_value;
    return rep;
}

}  // namespace mather::lp
