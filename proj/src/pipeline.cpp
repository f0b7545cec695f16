#include "mather/pipeline.hpp"

#include "mather/errors.hpp"
#include "mather/io.hpp"

#include <algorithm>
#include <cmath>

namespace mather::pipeline {

using nlohmann::json;

Setup make_setup(const cfg::RunConfig& c)
{
    auto lag = cfg::make_lagrangian(c);
    const double v_max = c.solver.v_max ? *c.solver.v_max : hj::default_v_max(lag, c.shift_resolution);
    hj::OmegaGrid wg(c.d, c.solver.N);
    hj::ControlGrid vg(c.n, v_max, c.solver.M);
    const double h = c.solver.h ? *c.solver.h : hj::default_h(v_max, c.solver.N, lag.hull());
    return Setup{std::move(lag), std::move(wg), std::move(vg), h};
}

hj::ValueField solve_field(const cfg::RunConfig& c, const Setup& s, double alpha)
{
    hj::SolveOptions o;
    o.tol = c.solver.tol;
    o.max_iter = c.solver.max_iter;
    o.sweep = c.solver.sweep == "jacobi" ? hj::Sweep::Jacobi : hj::Sweep::GaussSeidel;
    return hj::solve_value_function(s.lag, s.wgrid, s.vgrid, alpha, s.h, o);
}

flow::OccupationRun run_flow(const cfg::RunConfig& c, const Setup& s, const hj::ValueField& field)
{
    return flow::occupation_run(field, s.lag, cfg::seed_points(c), c.flow.dt, c.flow.T, s.vgrid);
}

std::vector<double> trace_measure(const cfg::RunConfig& c, const Setup& s, const flow::OccupationRun* run)
{
    auto spec = lp::TraceSpec::parse(c.lp.nu, c.d);
    switch (spec.kind) {
    case lp::TraceSpec::Kind::Uniform: return lp::uniform_trace(s.wgrid);
    case lp::TraceSpec::Kind::Delta: return lp::delta_trace(s.wgrid, spec.point);
    case lp::TraceSpec::Kind::Occupation: break;
    }
    if (!run) throw InputError("occupation trace requested without an occupation run", "/lp/nu");
    auto nu = run->measure.trace();
    // the trace of a normalized measure; renormalize away rounding in the merge
    double total = 0;
    for (double w : nu) total += w;
    for (double& w : nu) w /= total;
    return nu;
}

LPStage run_lp(const cfg::RunConfig& c, const Setup& s, const hj::ValueField& field, const std::vector<double>& nu)
{
    hull::StationaryBasis basis(s.lag.hull(), c.lp.basis_K);
    lp::LPOptions o;
    o.slack = c.lp.slack;
    o.holonomic = c.lp.holonomic;
    o.max_variables = static_cast<std::size_t>(c.lp.max_variables);
    lp::MatherLP problem(s.lag, s.vgrid, s.wgrid, basis, field.alpha, nu, o);
    auto sol = lp::solve(problem);
    lp::DualityReport rep;
    if (sol.raw.status == lp::Status::Optimal) {
        rep = lp::duality_report(problem, sol, s.lag, basis, field, 2.0 / c.solver.N);
    } else {
        rep.status = lp::to_string(sol.raw.status);
        rep.basis_K = c.lp.basis_K;
        rep.slack = c.lp.slack;
        rep.lp_value = sol.value;
    }
    return LPStage{std::move(problem), std::move(sol), rep};
}

HbarEstimate estimate_hbar(const std::vector<SweepRow>& rows)
{
    HbarEstimate est;
    const SweepRow* best = nullptr;
    const SweepRow* twice = nullptr;
    for (const auto& r : rows) {
        if (!r.ok) continue;
        for (const auto& q : rows) {
            if (!q.ok || std::fabs(q.alpha - 2 * r.alpha) > 1e-12 * q.alpha) continue;
            if (!best || r.alpha < best->alpha) {
                best = &r;
                twice = &q;
            }
        }
    }
    if (!best) {
        est.note = "no successful pair (alpha, 2 alpha) in the sweep";
        return est;
    }
    est.available = true;
    est.alpha = best->alpha;
    est.value = diag::richardson(best->pde_value, twice->pde_value);
    return est;
}

SweepResult alpha_sweep(const cfg::RunConfig& c, const Setup& s)
{
    SweepResult res;
    for (double alpha : c.sweep.alphas) {
        SweepRow row;
        row.alpha = alpha;
        try {
            auto field = solve_field(c, s, alpha);
            auto run = run_flow(c, s, field);
            auto nu = trace_measure(c, s, &run);
            auto st = run_lp(c, s, field, nu);
            if (st.solution.raw.status != lp::Status::Optimal)
                throw NumericError("linear program " + st.report.status);
            row.lp_value = st.report.lp_value;
            row.pde_value = st.report.pde_value;
            row.osc = diag::oscillation(field);
            // Occupation measures sit on whole trajectories, so neighbouring hull bins
            // are occupied and the action-direction difference quotients exist.
            auto g = diag::graph_extract(run.measure, s.lag.hull(), diag::default_mass_floor(s.wgrid));
            row.graph_c = g.lipschitz;
            row.max_spread = diag::graph_extract(st.solution.measure, s.lag.hull(), 1e-3).max_spread;
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        res.rows.push_back(row);
    }
    res.hbar = estimate_hbar(res.rows);
    return res;
}

std::string sweep_csv(const SweepResult& r)
{
    std::string out = "alpha,lp_value,pde_value,osc,graphC\n";
    for (const auto& row : r.rows) {
        if (!row.ok) {
            out += io::num(row.alpha) + ",nan,nan,nan,nan\n";
            continue;
        }
        out += io::num(row.alpha) + "," + io::num(row.lp_value) + "," + io::num(row.pde_value) + "," +
               io::num(row.osc) + "," + (row.graph_c ? io::num(*row.graph_c) : std::string("nan")) + "\n";
    }
    return out;
}

json sweep_json(const SweepResult& r)
{
    json rows = json::array();
    for (const auto& row : r.rows) {
        json j = {{"alpha", row.alpha}, {"ok", row.ok}};
        if (row.ok) {
            j["lp_value"] = row.lp_value;
            j["pde_value"] = row.pde_value;
            j["gap"] = row.lp_value - row.pde_value;
            j["osc"] = row.osc;
            j["graph_c"] = row.graph_c ? json(*row.graph_c) : json(nullptr);
            j["max_spread"] = row.max_spread;
        } else {
            j["error"] = row.error;
        }
        rows.push_back(j);
    }
    json hb = {{"available", r.hbar.available}, {"extrapolation_order", r.hbar.order}};
    if (r.hbar.available) {
        hb["value"] = r.hbar.value;
        hb["alpha"] = r.hbar.alpha;
        hb["alpha_pair"] = {r.hbar.alpha, 2 * r.hbar.alpha};
    } else {
        hb["note"] = r.hbar.note;
    }
    return {{"hbar", hb}, {"sweep", rows}};
}

DiagnosticsReport diagnose(const cfg::RunConfig& c, const Setup& s, const hj::ValueField& field, const LPStage& st)
{
    DiagnosticsReport rep;
    rep.alpha = field.alpha;
    rep.duality = st.report;
    rep.osc = diag::oscillation(field);
    if (st.solution.raw.status != lp::Status::Optimal) {
        rep.warnings.push_back("linear program " + st.report.status + ": measure diagnostics skipped");
        return rep;
    }
    const auto& mu = st.solution.measure;
    hull::StationaryBasis basis(s.lag.hull(), c.lp.basis_K);
    rep.holonomy = diag::holonomy_residual(mu, basis, field.alpha, st.problem.nu());
    rep.invariance = diag::invariance_residual(mu, s.lag, field.alpha);
    for (const auto& w : rep.invariance.warnings) rep.warnings.push_back(w);
    rep.graph = diag::graph_extract(mu, s.lag.hull(), diag::default_mass_floor(s.wgrid));
    rep.gradient_consistency = diag::gradient_consistency(rep.graph, field, s.lag);
    if (c.d == 1 && c.n == 1 && c.A(0, 0) == 1.0)
        rep.curvature = diag::curvature_check_1d(field, mu, s.lag, diag::default_mass_floor(s.wgrid));
    return rep;
}

json to_json(const lp::DualityReport& r)
{
    return {{"status", r.status},
            {"lp_value", r.lp_value},
            {"pde_value", r.pde_value},
            {"gap", r.gap},
            {"dual_value", r.dual_value},
            {"certificate", r.certificate},
            {"mollified_margin", r.mollified_margin},
            {"mollifier_collapsed", r.mollifier_collapsed},
            {"basis_K", r.basis_K},
            {"slack", r.slack}};
}

json to_json(const DiagnosticsReport& r)
{
    json graph = {{"rows", r.graph.rows.size()},
                  {"mass_floor", r.graph.mass_floor},
                  {"max_spread", r.graph.max_spread},
                  {"lipschitz", r.graph.lipschitz ? json(*r.graph.lipschitz) : json(nullptr)},
                  {"lipschitz_pairs", r.graph.lipschitz_pairs}};
    json inv = {{"max", r.invariance.max},
                {"max_alpha_term", r.invariance.max_alpha_term},
                {"residuals", r.invariance.residuals}};
    json out = {{"alpha", r.alpha},
                {"holonomy_residual", r.holonomy},
                {"invariance", inv},
                {"graph", graph},
                {"gradient_consistency", r.gradient_consistency},
                {"osc_alpha_u", r.osc},
                {"duality", to_json(r.duality)},
                {"warnings", r.warnings}};
    if (r.curvature) {
        const auto& cv = *r.curvature;
        out["curvature"] = {{"lhs", cv.lhs},
                            {"rhs", cv.rhs},
                            {"margin", cv.margin},
                            {"sup_uxx", cv.sup_uxx},
                            {"semiconcavity", cv.semiconcavity},
                            {"stencil", cv.stencil}};
    } else {
        out["curvature"] = nullptr;
    }
    return out;
}

}  // namespace mather::pipeline
