#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "polyfrac/mittag.hpp"
#include "polyfrac/moments.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>

using namespace polyfrac;

namespace {

const ModelSpec kPearson{PearsonParams{2.0, 1.0, 1.0, 0.0, 0.0}};

PolyVec mono1(int k) { return monomial(build_basis(1, k), MultiIndex{{k}}); }

}  // namespace

TEST_CASE("classical first moment of the mean-reverting diffusion is th + (x - th) e^{-b t}") {
    Eigen::VectorXd x(1);
    x << 3.0;
    const double got = moment_classical(kPearson, mono1(1), x, 0.5);
    CHECK(got == doctest::Approx(1.0 + 2.0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("time-changed Brownian second moment at t = 1, alpha = 1/2 is 2/sqrt(pi)") {
    const ModelSpec bm{BrownianMotionParams{}};
    Eigen::VectorXd z = Eigen::VectorXd::Zero(1);
    const double got = moment_fractional(bm, mono1(2), z, 1.0, 0.5);
    CHECK(got == doctest::Approx(1.1283791670955126).epsilon(1e-12));
    // and scales like t^alpha / Gamma(1 + alpha)
    const double g2 = moment_fractional(bm, mono1(2), z, 4.0, 0.5);
    CHECK(g2 / got == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("moments are linear in the polynomial") {
    Eigen::VectorXd x(1);
    x << 0.7;
    auto b2 = build_basis(1, 2);
    Eigen::VectorXd c(3);
    c << 0.5, -1.0, 2.0;
    const PolyVec p(b2, c);
    const double direct = moment_fractional(kPearson, p, x, 1.0, 0.5);
    const double parts = 0.5 - moment_fractional(kPearson, mono1(1), x, 1.0, 0.5) +
                         2.0 * moment_fractional(kPearson, mono1(2), x, 1.0, 0.5);
    CHECK(direct == doctest::Approx(parts).epsilon(1e-12));
}

TEST_CASE("t = 0 returns the polynomial evaluated at the start point") {
    Eigen::VectorXd x(1);
    x << 1.7;
    CHECK(moment_classical(kPearson, mono1(2), x, 0.0) == doctest::Approx(1.7 * 1.7));
    CHECK(moment_fractional(kPearson, mono1(2), x, 0.0, 0.3) == doctest::Approx(1.7 * 1.7));
}

TEST_CASE("general clock with exponent sqrt(lambda) reproduces the alpha = 1/2 clock") {
    Eigen::VectorXd x(1);
    x << 3.0;
    GeneralBernstein gb;
    gb.f = [](std::complex<double> l) { return std::sqrt(l); };
    for (double t : {0.5, 1.0, 2.0}) {
        double err = 0.0;
        const double got = moment_general_f(kPearson, mono1(1), x, t, gb, &err);
        const double ref = moment_fractional(kPearson, mono1(1), x, t, 0.5);
        CHECK(std::abs(got - ref) <= 1e-6 * std::abs(ref));
        CHECK(err <= 1e-6 * std::abs(ref));
    }
}

TEST_CASE("general clock with identity exponent reproduces the classical clock") {
    Eigen::VectorXd x(1);
    x << 3.0;
    GeneralBernstein gid;
    gid.drift = 1.0;
    gid.f = [](std::complex<double> l) { return l; };
    const double got = moment_general_f(kPearson, mono1(2), x, 0.8, gid);
    CHECK(got == doctest::Approx(moment_classical(kPearson, mono1(2), x, 0.8)).epsilon(1e-8));
}

TEST_CASE("subordinator exponents are validated") {
    CHECK_THROWS(SubordinatorSpec{StableAlpha{1.0}});
    CHECK_THROWS(SubordinatorSpec{StableAlpha{0.0}});
    GeneralBernstein killed;
    killed.f = [](std::complex<double>) { return std::complex<double>(1.0); };
    CHECK_THROWS(SubordinatorSpec{killed});  // f(0+) must vanish
    GeneralBernstein decreasing;
    decreasing.f = [](std::complex<double> l) { return -l; };
    CHECK_THROWS(SubordinatorSpec{decreasing});
}

TEST_CASE("run_query dispatches on the configured clock") {
    Eigen::VectorXd x(1);
    x << 3.0;
    MomentQuery q{kPearson, mono1(1), x, 0.5, std::nullopt};
    CHECK(run_query(q) == doctest::Approx(moment_classical(kPearson, mono1(1), x, 0.5)));
    q.subordinator = SubordinatorSpec{StableAlpha{0.5}};
    CHECK(run_query(q) == doctest::Approx(moment_fractional(kPearson, mono1(1), x, 0.5, 0.5)));
}

TEST_CASE("fractional solutions pass the residual oracle, exponentials fail it") {
    const GeneratorMatrix G = generator_matrix(kPearson, 2);
    const auto grid = graded_grid(2.0, 200, 4.0);
    const Eigen::VectorXd p0 = embed(mono1(2), G.basis_ptr()).coeffs();
    Eigen::MatrixXd q(static_cast<int>(grid.size()), 3);
    for (std::size_t i = 0; i < grid.size(); ++i)
        q.row(static_cast<int>(i)) = (ml_matrix(0.5, grid[i], G) * p0).transpose();
    CHECK(caputo_residual(q, 0.5, G.matrix(), grid) <= 1e-3);
    for (std::size_t i = 0; i < grid.size(); ++i)
        q.row(static_cast<int>(i)) = ((grid[i] * G.matrix()).exp() * p0).transpose();
    CHECK(caputo_residual(q, 0.5, G.matrix(), grid) > 0.1);  // negative control
}

TEST_CASE("constant samples in the kernel of A have zero residual") {
    Eigen::MatrixXd A(2, 2);
    A << 0.0, 1.0, 0.0, -1.0;  // A (1, 0)^T = 0
    const auto grid = graded_grid(1.0, 64, 2.0);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<int>(grid.size()), 2);
    q.col(0).setOnes();
    CHECK(caputo_residual(q, 0.5, A, grid) <= 1e-12);
}

TEST_CASE("residual oracle validates its inputs") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1, 1);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(64, 1);
    CHECK_THROWS(caputo_residual(q, 0.5, A, graded_grid(1.0, 8, 2.0)));   // too coarse
    CHECK_THROWS(caputo_residual(q, 1.0, A, graded_grid(1.0, 64, 2.0)));  // alpha out of range
    std::vector<double> shifted = graded_grid(1.0, 64, 2.0);
    shifted[0] = 0.5;
    CHECK_THROWS(caputo_residual(q, 0.5, A, shifted));  // must start at 0
}

TEST_CASE("graded grid spans [0, T] and clusters at the origin") {
    const auto g = graded_grid(2.0, 100, 3.0);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(2.0));
    CHECK(g[1] < 2.0 / 99.0);  // denser than uniform near 0
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("dimension mismatches are rejected") {
    Eigen::VectorXd x2(2);
    x2 << 0.0, 0.0;
    CHECK_THROWS(moment_classical(kPearson, mono1(1), x2, 1.0));
    const ModelSpec qtsm{QTSMParams{0.5, 1.0, 0.5, 0.1, 0.2, 1.0}};
    Eigen::VectorXd x1(1);
    x1 << 0.0;
    CHECK_THROWS(moment_classical(qtsm, mono1(1), x1, 1.0));
}
