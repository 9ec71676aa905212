#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "polyfrac/mittag.hpp"
#include "polyfrac/moments.hpp"
#include "polyfrac/statedep.hpp"

#include <cmath>

using namespace polyfrac;

namespace {

PolyVec mono1(int k) { return monomial(build_basis(1, k), MultiIndex{{k}}); }

std::vector<double> ml_samples(double alpha, double lam, double c0,
                               const std::vector<double>& grid) {
    std::vector<double> c(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        c[i] = c0 * ml_scalar(alpha, lam * std::pow(grid[i], alpha)).real();
    return c;
}

}  // namespace

TEST_CASE("the Mittag-Leffler profile passes the residual check, the exponential fails it") {
    const double alpha = 0.5;
    const auto grid = graded_grid(1.0, 256, 3.0);
    for (double lam : {1.0, 3.0, -1.0}) {
        const auto c = ml_samples(alpha, lam, 1.0, grid);
        CHECK(volterra_residual(c, AlphaKernel{alpha}, lam, grid) <= 1e-3);
    }
    std::vector<double> e(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) e[i] = std::exp(3.0 * grid[i]);
    CHECK(volterra_residual(e, AlphaKernel{alpha}, 3.0, grid) > 0.1);
}

TEST_CASE("the residual check distinguishes the decay rate") {
    const auto grid = graded_grid(1.0, 256, 3.0);
    const auto c = ml_samples(0.5, 1.0, 1.0, grid);  // solves rate 1
    CHECK(volterra_residual(c, AlphaKernel{0.5}, 1.0, grid) <= 1e-3);
    CHECK(volterra_residual(c, AlphaKernel{0.5}, 3.0, grid) > 0.1);
}

TEST_CASE("square initial condition: coefficients solve at rates 1*b and 2b + sigma^2") {
    // u = x^2, b = 1, sigma = 1: exactly one rate indexing survives, and it is
    // the one matching the generator column, with rate j b + j(j-1) sigma^2/2.
    const StateDepProblem prob{1.0, 1.0, AlphaKernel{0.5}, mono1(2)};
    const auto grid = graded_grid(1.0, 256, 3.0);
    const CoefficientSolution sol = solve_coefficients(prob, grid);
    CHECK(sol.rate_convention == "component-matched");
    CHECK(sol.residual <= 1e-3);
    CHECK(sol.residual_shifted > 1e-3);
    REQUIRE(sol.c.size() == 3);
    // c_2(t) = E_alpha(3 t^alpha), c_1 identically zero, c_0 constant.
    const auto ref = ml_samples(0.5, 3.0, 1.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(sol.c[2][i] == doctest::Approx(ref[i]).epsilon(1e-12));
        CHECK(sol.c[1][i] == 0.0);
        CHECK(sol.c[0][i] == 0.0);
    }
}

TEST_CASE("linear initial condition with pure drift solves at rate b") {
    const StateDepProblem prob{0.7, 0.0, AlphaKernel{0.5}, mono1(1)};
    const auto grid = graded_grid(1.0, 256, 3.0);
    const CoefficientSolution sol = solve_coefficients(prob, grid);
    CHECK(sol.residual <= 1e-3);
    const auto ref = ml_samples(0.5, 0.7, 1.0, grid);
    for (std::size_t i = 0; i < grid.size(); i += 16)
        CHECK(sol.c[1][i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("a user-supplied kernel equal to the power kernel gives matching coefficients") {
    const double alpha = 0.5;
    const double g = std::tgamma(1.0 - alpha);
    const KappaSpec user = std::function<double(double)>(
        [alpha, g](double t) { return std::pow(t, -alpha) / g; });
    const StateDepProblem prob{0.7, 0.0, user, mono1(1)};
    const auto grid = graded_grid(1.0, 128, 2.0);
    const CoefficientSolution sol = solve_coefficients(prob, grid);
    const auto ref = ml_samples(alpha, 0.7, 1.0, grid);
    for (std::size_t i = 0; i < grid.size(); i += 8)
        CHECK(sol.c[1][i] == doctest::Approx(ref[i]).epsilon(2e-3));
}

TEST_CASE("kernel validation") {
    CHECK_THROWS(volterra_residual(std::vector<double>(64, 1.0), AlphaKernel{1.5}, 1.0,
                                   graded_grid(1.0, 64, 2.0)));
    const KappaSpec growing = std::function<double(double)>([](double t) { return t; });
    const StateDepProblem bad{1.0, 0.0, growing, mono1(1)};
    CHECK_THROWS(solve_coefficients(bad, graded_grid(1.0, 64, 2.0)));
    const KappaSpec bounded = std::function<double(double)>([](double) { return 1.0; });
    const StateDepProblem flat{1.0, 0.0, bounded, mono1(1)};
    CHECK_THROWS(solve_coefficients(flat, graded_grid(1.0, 64, 2.0)));
}

TEST_CASE("grid validation") {
    const StateDepProblem prob{1.0, 1.0, AlphaKernel{0.5}, mono1(2)};
    CHECK_THROWS(solve_coefficients(prob, graded_grid(1.0, 32, 2.0)));  // too coarse
    std::vector<double> nonzero = graded_grid(1.0, 64, 2.0);
    nonzero[0] = 0.1;
    CHECK_THROWS(solve_coefficients(prob, nonzero));
}
