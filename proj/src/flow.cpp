#include "mather/flow.hpp"

#include "mather/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace mather::flow {

namespace {
long step_count(double dt, double T)
{
    if (!(dt > 0) || !std::isfinite(dt)) throw InputError("time step must be positive", "/flow/dt");
    if (!(T >= dt) || !std::isfinite(T)) throw InputError("horizon T must be at least dt", "/flow/T");
    return std::lround(T / dt);
}

Vec theta_of(const hull::TorusHull& hull, const hull::HullPoint& omega0, const Vec& x)
{
    return hull.act(omega0, x).coords();
}
}  // namespace

std::pair<Vec, Vec> el_field(const hull::QuasiPeriodicLagrangian& lag, double alpha, const Vec& x, const Vec& v,
                             const hull::HullPoint& omega)
{
    Vec theta = omega.coords() + lag.hull().A() * x;
    Vec Y = lag.dx_lagrangian_at(theta) / lag.mass() + alpha * (v - lag.drift());
    return {v, Y};
}

double energy(const hull::QuasiPeriodicLagrangian& lag, const Vec& x, const Vec& v, const hull::HullPoint& omega)
{
    Vec theta = omega.coords() + lag.hull().A() * x;
    return 0.5 * lag.mass() * (v.squaredNorm() - lag.drift().squaredNorm()) - lag.potential().value(theta);
}

Trajectory integrate_el(const hull::QuasiPeriodicLagrangian& lag, double alpha, const PhaseState& state, double dt,
                        double T, double v_max)
{
    const long K = step_count(dt, T);
    if (state.x.size() != lag.n() || state.v.size() != lag.n()) throw InputError("phase state has wrong dimension");
    if (!state.x.allFinite() || !state.v.allFinite()) throw InputError("phase state is not finite");
    Trajectory tr;
    tr.dt = dt;
    tr.alpha = alpha;
    tr.omega0 = state.omega0;
    tr.samples.reserve(K + 1);
    Vec x = state.x, v = state.v;
    const double guard = 10.0 * v_max;
    auto F = [&](const Vec& xx, const Vec& vv) { return el_field(lag, alpha, xx, vv, state.omega0); };
    tr.samples.push_back({0.0, x, v, theta_of(lag.hull(), state.omega0, x)});
    for (long k = 1; k <= K; ++k) {
        auto [k1x, k1v] = F(x, v);
        auto [k2x, k2v] = F(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
        auto [k3x, k3v] = F(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
        auto [k4x, k4v] = F(x + dt * k3x, v + dt * k3v);
        x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
        if (!v.allFinite() || v.norm() > guard)
            throw NumericError("trajectory blow-up at t = " + std::to_string(k * dt) + ": |v| = " +
                               std::to_string(v.norm()) + " exceeds 10 v_max");
        tr.samples.push_back({k * dt, x, v, theta_of(lag.hull(), state.omega0, x)});
    }
    return tr;
}

Vec feedback_velocity(const hj::ValueField& field, const hull::QuasiPeriodicLagrangian& lag,
                      const hull::HullPoint& theta)
{
    return lag.optimal_velocity(hj::x_gradient(field, theta));
}

namespace {
bool near_kink(const hj::ValueField& field, const Vec& theta, double tol)
{
    const double s = field.grid.spacing();
    const double u0 = field.grid.interpolate(field.U, theta);
    for (int a = 0; a < field.grid.d(); ++a) {
        Vec tp = theta, tm = theta;
        tp[a] += s;
        tm[a] -= s;
        double fwd = (field.grid.interpolate(field.U, tp) - u0) / s;
        double bwd = (u0 - field.grid.interpolate(field.U, tm)) / s;
        if (std::fabs(fwd - bwd) > tol * (1.0 + 0.5 * std::fabs(fwd + bwd))) return true;
    }
    return false;
}
}  // namespace

FeedbackResult feedback_trajectory(const hj::ValueField& field, const hull::QuasiPeriodicLagrangian& lag,
                                   const hull::HullPoint& omega0, double dt, double T, double kink_tol)
{
    const long K = step_count(dt, T);
    if (omega0.dim() != lag.d()) throw InputError("initial hull point has wrong dimension", "/flow/omega0");
    const double alpha = field.alpha;
    const auto& hull = lag.hull();
    FeedbackResult res;
    res.traj.dt = dt;
    res.traj.alpha = alpha;
    res.traj.omega0 = omega0;
    res.traj.samples.reserve(K + 1);

    auto velocity = [&](const Vec& x) { return feedback_velocity(field, lag, hull.act(omega0, x)); };
    auto cost_rate = [&](double t, const Vec& x, const Vec& v) {
        return std::exp(-alpha * t) * lag.lagrangian_at(v, omega0.coords() + hull.A() * x);
    };

    Vec x = Vec::Zero(lag.n());
    double J = 0;
    Vec v = velocity(x);
    for (long k = 0; k <= K; ++k) {
        const double t = k * dt;
        Vec theta = theta_of(hull, omega0, x);
        if (near_kink(field, theta, kink_tol)) ++res.kink_samples;
        res.traj.samples.push_back({t, x, v, theta});
        if (k == K) break;
        Vec k1 = v;
        double c1 = cost_rate(t, x, k1);
        Vec x2 = x + 0.5 * dt * k1;
        Vec k2 = velocity(x2);
        double c2 = cost_rate(t + 0.5 * dt, x2, k2);
        Vec x3 = x + 0.5 * dt * k2;
        Vec k3 = velocity(x3);
        double c3 = cost_rate(t + 0.5 * dt, x3, k3);
        Vec x4 = x + dt * k3;
        Vec k4 = velocity(x4);
        double c4 = cost_rate(t + dt, x4, k4);
        x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        J += dt / 6.0 * (c1 + 2 * c2 + 2 * c3 + c4);
        v = velocity(x);
    }
    res.running_cost = J;
    res.initial_value = field.at(omega0);
    res.terminal_value = field.grid.interpolate(field.U, res.traj.samples.back().theta);
    const double Tn = K * dt;
    res.dpp_residual = std::fabs(J + std::exp(-alpha * Tn) * res.terminal_value - res.initial_value);
    if (res.kink_samples > 0)
        res.traj.warnings.push_back(std::to_string(res.kink_samples) +
                                    " samples evaluated the value gradient next to a kink");
    return res;
}

DiscreteMeasure occupation_measure(const Trajectory& traj, const hj::ControlGrid& vgrid, const hj::OmegaGrid& wgrid,
                                   double t_end, std::vector<std::string>* warnings)
{
    if (traj.samples.size() < 2) throw InputError("trajectory needs at least two samples");
    std::size_t count = traj.samples.size() - 1;
    if (t_end > 0) count = std::min(count, static_cast<std::size_t>(std::lround(t_end / traj.dt)));
    if (count == 0) throw InputError("occupation window shorter than one step");
    std::map<std::pair<std::size_t, std::size_t>, long> bins;
    std::size_t clamped = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const auto& s = traj.samples[k];
        bool cl = false;
        std::size_t iv = vgrid.nearest(s.v, &cl);
        if (cl) ++clamped;
        ++bins[{wgrid.nearest(s.theta), iv}];
    }
    DiscreteMeasure mu(vgrid, wgrid);
    for (const auto& [key, c] : bins) mu.add(key.second, key.first, static_cast<double>(c) / count);
    mu.finalize();
    if (clamped && warnings)
        warnings->push_back(std::to_string(clamped) + " samples had velocities outside the control box and were clamped");
    return mu;
}

std::vector<DiscreteMeasure> checkpoint_measures(const Trajectory& traj, const hj::ControlGrid& vgrid,
                                                 const hj::OmegaGrid& wgrid)
{
    const double T = traj.samples.back().t;
    std::vector<DiscreteMeasure> out;
    for (double frac : {0.125, 0.25, 0.5, 1.0}) out.push_back(occupation_measure(traj, vgrid, wgrid, frac * T));
    return out;
}

OccupationRun occupation_run(const hj::ValueField& field, const hull::QuasiPeriodicLagrangian& lag,
                             const std::vector<hull::HullPoint>& seeds, double dt, double T,
                             const hj::ControlGrid& vgrid)
{
    if (seeds.empty()) throw InputError("at least one seed is required", "/flow/seeds");
    OccupationRun run{DiscreteMeasure(vgrid, field.grid), {}, {}, {}, 0.0, {}};
    std::vector<std::vector<DiscreteMeasure>> checkpoints;
    for (const auto& seed : seeds) {
        run.runs.push_back(feedback_trajectory(field, lag, seed, dt, T));
        const auto& tr = run.runs.back().traj;
        run.per_seed.push_back(occupation_measure(tr, vgrid, field.grid, 0, &run.warnings));
        checkpoints.push_back(checkpoint_measures(tr, vgrid, field.grid));
        for (const auto& w : tr.warnings) run.warnings.push_back(w);
    }
    std::vector<double> coeffs(seeds.size(), 1.0 / seeds.size());
    run.measure = DiscreteMeasure::mixture(run.per_seed, coeffs);
    std::vector<DiscreteMeasure> mixed;
    for (std::size_t c = 0; c < 4; ++c) {
        std::vector<DiscreteMeasure> parts;
        for (const auto& cp : checkpoints) parts.push_back(cp[c]);
        mixed.push_back(DiscreteMeasure::mixture(parts, coeffs));
    }
    for (std::size_t c = 1; c < mixed.size(); ++c)
        run.checkpoint_l1.push_back(DiscreteMeasure::l1_distance(mixed[c - 1], mixed[c]));
    for (const auto& m : run.per_seed)
        run.seed_spread = std::max(run.seed_spread, DiscreteMeasure::l1_distance(m, run.measure));
    return run;
}

}  // namespace mather::flow
