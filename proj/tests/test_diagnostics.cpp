#include "mather/diagnostics.hpp"
#include "mather/errors.hpp"
#include "mather/flow.hpp"
#include "mather/mather_lp.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace mather;
using mather::test::pendulum;

TEST_CASE("holonomy residual: rest measures vanish, LP optima stay inside the band")
{
    auto lag = test::ls_lagrangian(std::sqrt(2.0), true);
    hj::OmegaGrid wg(2, 8);
    hj::ControlGrid vg(1, 4.0, 9);
    hull::StationaryBasis basis(lag.hull(), 2);
    DiscreteMeasure delta(vg, wg);
    delta.add(vg.center(), 21, 1.0);
    delta.finalize();
    for (double r : diag::holonomy_residual(delta, basis, 0.0, {})) CHECK(r == 0.0);

    auto nu = lp::uniform_trace(wg);
    lp::MatherLP prob(lag, vg, wg, basis, 0.5, nu);
    auto sol = lp::solve(prob);
    REQUIRE(sol.raw.status == lp::Status::Optimal);
    for (double r : diag::holonomy_residual(sol.measure, basis, 0.5, nu)) CHECK(r <= prob.options().slack * (1 + 1e-6));
    // The rest measure is not discounted-holonomic for a uniform trace.
    double worst = 0;
    for (double r : diag::holonomy_residual(delta, basis, 0.5, nu)) worst = std::max(worst, r);
    CHECK(worst > 1e-3);
}

TEST_CASE("invariance residual vanishes on equilibria")
{
    auto lag = pendulum(1.0, 0.0);
    hj::OmegaGrid wg(1, 16);
    hj::ControlGrid vg(1, 3.0, 13);
    for (std::size_t iw : {std::size_t{0}, std::size_t{8}}) {  // minimum and maximum of P
        DiscreteMeasure mu(vg, wg);
        mu.add(vg.center(), iw, 1.0);
        mu.finalize();
        for (double alpha : {0.0, 0.5}) {
            auto res = diag::invariance_residual(mu, lag, alpha, {2, 0, 0});
            CHECK(res.max < 1e-14);
            CHECK(res.warnings.empty());
        }
    }
    // A resting mass away from equilibrium is not invariant.
    DiscreteMeasure off(vg, wg);
    off.add(vg.center(), 3, 1.0);
    off.finalize();
    CHECK(diag::invariance_residual(off, lag, 0.0).max > 1e-2);
}

TEST_CASE("invariance residual warns when bumps miss the measure")
{
    auto lag = pendulum();
    hj::OmegaGrid wg(1, 8);
    hj::ControlGrid vg(1, 3.0, 7);
    DiscreteMeasure mu(vg, wg);
    mu.add(1, 0, 1.0);  // v = -2, between the bumps at -3 and 0
    mu.finalize();
    auto res = diag::invariance_residual(mu, lag, 0.0, {1, 0.4, 3});
    CHECK(res.warnings.size() == 1);
    mu = DiscreteMeasure(vg, wg);
    mu.add(0, 0, 1.0);  // v = -3 sits on a centre
    mu.finalize();
    CHECK(diag::invariance_residual(mu, lag, 0.0, {1, 0.4, 3}).warnings.empty());
}

TEST_CASE("drift pendulum LP measure becomes invariant under refinement")
{
    // A basic optimum has at most 2K + 1 atoms, so K must grow with the grids.
    auto lag = pendulum(1.0, 2.0);
    double prev = 1;
    for (int N : {64, 128}) {
        hj::OmegaGrid wg(1, N);
        hj::ControlGrid vg(1, 4.0, N * 5 / 8 + 1);
        hull::StationaryBasis basis(lag.hull(), N / 4);
        lp::MatherLP prob(lag, vg, wg, basis, 0.0, lp::uniform_trace(wg));
        auto sol = lp::solve(prob);
        REQUIRE(sol.raw.status == lp::Status::Optimal);
        auto res = diag::invariance_residual(sol.measure, lag, 0.0);
        CHECK(res.warnings.empty());
        CHECK(res.max_alpha_term == 0.0);
        CHECK(res.max < 1e-2);
        CHECK(res.max < 0.65 * prev);
        prev = res.max;
    }
}

TEST_CASE("graph table: single point, spread, Lipschitz estimate")
{
    hj::OmegaGrid wg(1, 16);
    hj::ControlGrid vg(1, 2.0, 9);
    hull::TorusHull hull(Mat::Ones(1, 1));
    DiscreteMeasure delta(vg, wg);
    delta.add(4, 5, 1.0);
    delta.finalize();
    auto t = diag::graph_extract(delta, hull, diag::default_mass_floor(wg));
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].spread == 0.0);
    CHECK(t.rows[0].vbar[0] == 0.0);
    CHECK_FALSE(t.lipschitz.has_value());

    // V(omega) = omega on nodes 0..7, two velocity bins at node 3.
    DiscreteMeasure mu(vg, wg);
    for (std::size_t j = 0; j < 8; ++j) mu.add(4 + j / 4, j, 0.1);
    mu.add(6, 3, 0.1);
    mu.add(2, 15, 1e-9);  // below the floor
    mu.finalize();
    mu.normalize();
    auto g = diag::graph_extract(mu, hull, 1e-4);
    CHECK(g.rows.size() == 8);
    CHECK(g.max_spread == doctest::Approx(2 * vg.spacing()));
    REQUIRE(g.lipschitz.has_value());
    CHECK(g.lipschitz_pairs > 0);
    double total = 0;
    for (const auto& r : g.rows) total += r.mass;
    CHECK(total >= 1 - 1e-4 * 16);
}

TEST_CASE("gradient consistency and curvature on trivial fields")
{
    auto lag = test::free_particle();
    hj::OmegaGrid wg(1, 32);
    hj::ControlGrid vg(1, 2.0, 9);
    auto field = hj::solve_value_function(lag, wg, vg, 0.5, hj::default_h(2.0, 32, lag.hull()));
    auto nu = lp::uniform_trace(wg);
    hull::StationaryBasis basis(lag.hull(), 2);
    lp::MatherLP prob(lag, vg, wg, basis, 0.5, nu);
    auto sol = lp::solve(prob);
    auto t = diag::graph_extract(sol.measure, lag.hull(), diag::default_mass_floor(wg));
    CHECK(diag::gradient_consistency(t, field, lag) == 0.0);
    auto c = diag::curvature_check_1d(field, sol.measure, lag, diag::default_mass_floor(wg));
    CHECK(c.lhs == 0.0);
    CHECK(c.rhs == doctest::Approx(0.25));
    CHECK(c.margin == doctest::Approx(0.25));

    auto ls = test::ls_lagrangian(std::sqrt(2.0), true);
    hj::OmegaGrid w2(2, 8);
    hj::ControlGrid v2(1, 14.0, 9);
    auto f2 = hj::make_field(ls.hull(), w2, 0.5, std::vector<double>(w2.size(), 0.0));
    CHECK_THROWS_AS(diag::curvature_check_1d(f2, DiscreteMeasure(v2, w2), ls, 0.0), InputError);
}

TEST_CASE("pendulum curvature bound holds on the rest measure")
{
    auto lag = pendulum();
    hj::OmegaGrid wg(1, 256);
    hj::ControlGrid vg(1, 4.0, 65);
    auto field = hj::solve_value_function(lag, wg, vg, 0.5, hj::default_h(4.0, 256, lag.hull()));
    DiscreteMeasure mu(vg, wg);
    mu.add(vg.center(), 0, 1.0);
    mu.finalize();
    auto c = diag::curvature_check_1d(field, mu, lag, diag::default_mass_floor(wg));
    // u ~ c theta^2 near the minimum with 2 c^2 + alpha c = 2 pi^2.  The wide
    // stencil still carries an O(1/stencil) excess.
    const double cc = (-0.5 + std::sqrt(0.25 + 16 * M_PI * M_PI)) / 4;
    CHECK(c.stencil == 16);
    CHECK(c.sup_uxx == doctest::Approx(2 * cc).epsilon(1.5 / c.stencil));
    CHECK(c.margin >= 0);
    auto narrow = diag::curvature_check_1d(field, mu, lag, diag::default_mass_floor(wg), 1);
    CHECK(narrow.sup_uxx > 2.5 * c.sup_uxx);
}

TEST_CASE("oscillation and Richardson extrapolation")
{
    hj::OmegaGrid wg(1, 8);
    auto f = hj::make_field(hull::TorusHull(Mat::Ones(1, 1)), wg, 0.5, std::vector<double>(8, 3.0));
    CHECK(diag::oscillation(f) == 0.0);
    f.U[2] = 5.0;
    CHECK(diag::oscillation(f) == doctest::Approx(1.0));
    // f(alpha) = 2 + 3 alpha is extrapolated exactly.
    CHECK(diag::richardson(2 + 3 * 0.1, 2 + 3 * 0.2) == doctest::Approx(2.0));
}
