#include "mather/errors.hpp"
#include "mather/simplex.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace mather;
using namespace mather::lp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Vec vec(std::initializer_list<double> vals)
{
    Vec v(vals.size());
    int i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("textbook LP with inequality rows")
{
    Mat A(2, 2);
    A << 1, 2, 3, 1;
    DenseModel model(A, vec({-1, -1}), vec({-kInf, -kInf}), vec({4, 6}));
    auto sol = simplex_solve(model);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective == doctest::Approx(-2.8));
    CHECK(sol.x[0] == doctest::Approx(1.6));
    CHECK(sol.x[1] == doctest::Approx(1.2));
    CHECK(sol.dual_value == doctest::Approx(sol.objective));
    CHECK(sol.primal_residual < 1e-12);
    CHECK(sol.min_reduced_cost >= -1e-9);
}

TEST_CASE("equality and lower-bounded rows need Phase I")
{
    Mat A(2, 2);
    A << 1, 1, 1, -1;
    DenseModel model(A, vec({1, 2}), vec({2, 0}), vec({kInf, 0}));
    auto sol = simplex_solve(model);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective == doctest::Approx(3.0));
    CHECK(sol.x[0] == doctest::Approx(1.0));
    CHECK(sol.x[1] == doctest::Approx(1.0));
    CHECK(sol.phase1_pivots > 0);
    CHECK(sol.dual_value == doctest::Approx(sol.objective));
}

TEST_CASE("infeasible program reports the violated row")
{
    Mat A(2, 2);
    A << 1, 1, 1, 0;
    // x >= 0 cannot meet x0 + x1 <= -1.
    DenseModel model(A, vec({1, 1}), vec({0, -kInf}), vec({1, 1}));
    DenseModel bad(A, vec({1, 1}), vec({-kInf, 0}), vec({-1, 1}));
    CHECK(simplex_solve(model).status == Status::Optimal);
    auto sol = simplex_solve(bad);
    CHECK(sol.status == Status::Infeasible);
    CHECK(sol.violating_row == 0);
    CHECK(std::isnan(sol.objective));
}

TEST_CASE("Beale's cycling example terminates under Bland's rule")
{
    Mat A(3, 4);
    A << 0.25, -8, -1, 9,
         0.5, -12, -0.5, 3,
         0, 0, 1, 0;
    DenseModel model(A, vec({-0.75, 20, -0.5, 6}), vec({-kInf, -kInf, -kInf}), vec({0, 0, 1}));
    auto sol = simplex_solve(model);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective == doctest::Approx(-1.25));
    CHECK(sol.pivots < 50);
}

TEST_CASE("duplicate equality rows are detected as redundant")
{
    Mat A(3, 3);
    A << 1, 1, 1,
         1, 1, 1,
         1, -1, 0;
    DenseModel model(A, vec({1, 2, 3}), vec({1, 1, 0}), vec({1, 1, 0}));
    auto sol = simplex_solve(model);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.objective == doctest::Approx(1.5));
    CHECK(sol.redundant_rows.size() == 1);
    CHECK(sol.primal_residual < 1e-12);
}

TEST_CASE("iteration limit is reported rather than hidden")
{
    Mat A(2, 2);
    A << 1, 2, 3, 1;
    DenseModel model(A, vec({-1, -1}), vec({-kInf, -kInf}), vec({4, 6}));
    SimplexOptions opts;
    opts.max_pivots = 1;
    CHECK(simplex_solve(model, opts).status == Status::IterationLimit);
}

TEST_CASE("empty bands and malformed models are rejected")
{
    Mat A = Mat::Ones(1, 1);
    CHECK_THROWS_AS(DenseModel(A, vec({1}), vec({1}), vec({0})), InputError);
    CHECK_THROWS_AS(DenseModel(A, vec({1, 2}), vec({0}), vec({1})), InputError);
}

TEST_CASE("random banded LPs match vertex enumeration and strong duality")
{
    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int solved = 0, infeasible = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int m = 2 + trial % 3, n = 3 + trial % 4;
        Mat A(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = U(rng);
        Vec c(n);
        for (int j = 0; j < n; ++j) c[j] = 0.1 + std::fabs(U(rng));
        Vec lo(m), hi(m);
        for (int i = 0; i < m; ++i) {
            double a = U(rng), b = U(rng);
            lo[i] = std::min(a, b);
            hi[i] = (trial % 5 == 0 && i == 0) ? lo[i] : std::max(a, b);
        }
        DenseModel model(A, c, lo, hi);
        auto sol = simplex_solve(model);
        double oracle = test::vertex_oracle(A, c, lo, hi);
        if (std::isinf(oracle)) {
            CHECK(sol.status == Status::Infeasible);
            ++infeasible;
            continue;
        }
        REQUIRE(sol.status == Status::Optimal);
        CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(sol.dual_value == doctest::Approx(sol.objective).epsilon(1e-9));
        CHECK(sol.primal_residual < 1e-10);
        ++solved;
    }
    CHECK(solved > 20);
    CHECK(infeasible > 0);
}

TEST_CASE("pivot sequence is deterministic")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Mat A(4, 9);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 9; ++j) A(i, j) = U(rng) - 0.3;
    Vec c = Vec::Constant(9, 1.0);
    DenseModel model(A, c, Vec::Constant(4, 0.2), Vec::Constant(4, 0.5));
    auto a = simplex_solve(model), b = simplex_solve(model);
    CHECK(a.pivots == b.pivots);
    CHECK(a.x == b.x);
}
