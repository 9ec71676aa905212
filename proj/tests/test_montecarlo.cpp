#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "polyfrac/mittag.hpp"
#include "polyfrac/moments.hpp"
#include "polyfrac/montecarlo.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace polyfrac;

namespace {

PolyVec mono1(int k) { return monomial(build_basis(1, k), MultiIndex{{k}}); }

struct Welford {
    long n = 0;
    double mean = 0.0, m2 = 0.0;
    void push(double v) {
        ++n;
        const double d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    double se() const { return std::sqrt(m2 / ((n - 1.0) * n)); }
};

}  // namespace

TEST_CASE("per-path seeds are deterministic and distinct") {
    CHECK(path_seed(1, 0) == path_seed(1, 0));
    CHECK(path_seed(1, 0) != path_seed(1, 1));
    CHECK(path_seed(1, 0) != path_seed(2, 0));
}

TEST_CASE("stable draws have Laplace transform exp(-lambda^alpha)") {
    for (double alpha : {0.4, 0.7}) {
        std::mt19937_64 rng(31);
        Welford w;
        for (int i = 0; i < 40000; ++i) {
            const auto inc = simulate_stable_increments(alpha, 1, 1.0, rng);
            w.push(std::exp(-2.0 * inc[0]));
        }
        const double ref = std::exp(-std::pow(2.0, alpha));
        CHECK(std::abs(w.mean - ref) <= 4.0 * w.se());
    }
}

TEST_CASE("increments scale like ds^{1/alpha}") {
    std::mt19937_64 a(5), b(5);
    const auto u = simulate_stable_increments(0.5, 10, 1.0, a);
    const auto v = simulate_stable_increments(0.5, 10, 0.25, b);
    for (int i = 0; i < 10; ++i) CHECK(v[i] == doctest::Approx(u[i] / 16.0).epsilon(1e-13));
}

TEST_CASE("path inversion interpolates the first passage and reports truncation") {
    const std::vector<double> cum{1.0, 2.0};
    bool trunc = false;
    const auto L = invert_path(cum, {0.5, 1.0, 1.5}, 1.0, &trunc);
    CHECK_FALSE(trunc);
    CHECK(L[0] == doctest::Approx(0.5));
    CHECK(L[1] == doctest::Approx(1.0));  // level reached exactly at the first step
    CHECK(L[2] == doctest::Approx(1.5));
    const auto Lt = invert_path(cum, {5.0}, 1.0, &trunc);
    CHECK(trunc);
    CHECK(Lt[0] == doctest::Approx(2.0));  // path horizon
    CHECK_THROWS(invert_path(cum, {1.0, 0.5}, 1.0));
}

TEST_CASE("path inversion is non-decreasing on random paths") {
    std::mt19937_64 rng(13);
    const auto inc = simulate_stable_increments(0.6, 500, 1e-2, rng);
    std::vector<double> cum(inc.size());
    std::partial_sum(inc.begin(), inc.end(), cum.begin());
    std::vector<double> ts;
    for (double t = 0.0; t < cum.back(); t += cum.back() / 50.0) ts.push_back(t);
    const auto L = invert_path(cum, ts, 1e-2);
    for (std::size_t i = 1; i < L.size(); ++i) CHECK(L[i] >= L[i - 1]);
}

TEST_CASE("pairwise sum matches a long double accumulation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> xs(10001);
    long double acc = 0.0L;
    for (auto& x : xs) {
        x = u(rng);
        acc += x;
    }
    CHECK(pairwise_sum(xs.data(), xs.size()) ==
          doctest::Approx(static_cast<double>(acc)).epsilon(1e-13));
    CHECK(pairwise_sum(xs.data(), 0) == 0.0);
}

TEST_CASE("stationary samplers reproduce the known laws") {
    std::mt19937_64 rng(23);
    SUBCASE("Gaussian for the linear-diffusion case") {
        const ModelSpec ou{PearsonParams{2.0, 1.0, 1.0, 0.0, 0.0}};
        Welford w;
        for (int i = 0; i < 40000; ++i) w.push(stationary_sample(ou, 1e-3, rng)[0]);
        CHECK(std::abs(w.mean - 1.0) <= 4.0 * w.se());
    }
    SUBCASE("Gamma for the square-root-diffusion case") {
        const ModelSpec cir{PearsonParams{1.0, 0.5, 0.0, 0.25, 0.0}};
        Welford w;
        for (int i = 0; i < 40000; ++i) w.push(stationary_sample(cir, 1e-3, rng)[0]);
        CHECK(std::abs(w.mean - 0.5) <= 4.0 * w.se());
    }
    SUBCASE("Beta for the bounded diffusion without jumps") {
        const ModelSpec jac{JacobiJumpParams{1.0, 0.5, 0.5, 0.0}};
        Welford w;
        for (int i = 0; i < 40000; ++i) w.push(stationary_sample(jac, 1e-3, rng)[0]);
        CHECK(std::abs(w.mean - 0.5) <= 4.0 * w.se());
    }
    SUBCASE("Brownian motion has none") {
        CHECK_THROWS(stationary_sample(ModelSpec{BrownianMotionParams{}}, 1e-3, rng));
    }
}

TEST_CASE("moment estimates agree with the closed form at testing scale") {
    const ModelSpec bm{BrownianMotionParams{}};
    Eigen::VectorXd z = Eigen::VectorXd::Zero(1);
    SimConfig cfg;
    cfg.n_paths = 4000;
    cfg.seed = 9;
    const EstimateResult r = estimate_moment(bm, mono1(2), z, 1.0, 0.5, cfg);
    const double ref = moment_fractional(bm, mono1(2), z, 1.0, 0.5);
    CHECK(std::abs(r.estimate - ref) <= 4.0 * r.std_error);
    CHECK(r.std_error > 0.0);
}

TEST_CASE("results are bit-identical across thread counts and repeated runs") {
    const ModelSpec ou{PearsonParams{1.0, 0.3, 0.2, 0.0, 0.0}};
    Eigen::VectorXd x0(1);
    x0 << 0.1;
    SimConfig one;
    one.n_paths = 1500;
    one.seed = 77;
    SimConfig four = one;
    four.jobs = 4;
    const EstimateResult a = estimate_moment(ou, mono1(1), x0, 1.0, 0.5, one);
    const EstimateResult b = estimate_moment(ou, mono1(1), x0, 1.0, 0.5, four);
    const EstimateResult c = estimate_moment(ou, mono1(1), x0, 1.0, 0.5, one);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
    CHECK(a.estimate == c.estimate);
}

TEST_CASE("halving the operational step moves the estimate by less than two joint errors") {
    const ModelSpec cir{PearsonParams{1.0, 0.5, 0.0, 0.25, 0.0}};
    Eigen::VectorXd x0(1);
    x0 << 0.4;
    SimConfig coarse;
    coarse.n_paths = 8000;
    coarse.seed = 41;
    SimConfig fine = coarse;
    fine.dt_operational = coarse.dt_operational / 2.0;
    const EstimateResult a = estimate_moment(cir, mono1(2), x0, 1.0, 0.5, coarse);
    const EstimateResult b = estimate_moment(cir, mono1(2), x0, 1.0, 0.5, fine);
    const double joint = std::hypot(a.std_error, b.std_error);
    CHECK(std::abs(a.estimate - b.estimate) <= 2.0 * joint);
}

TEST_CASE("increment transform estimator handles the degenerate s = 0 case exactly") {
    SimConfig cfg;
    cfg.n_paths = 500;
    cfg.seed = 2;
    const EstimateResult r = estimate_increment_laplace(0.5, 1.0, 0.0, 1.0, cfg);
    CHECK(r.estimate == 1.0);
    CHECK(r.std_error == 0.0);
}

TEST_CASE("configuration validation") {
    SimConfig cfg;
    cfg.n_paths = 10;
    CHECK_THROWS(validate(cfg));
    cfg.n_paths = 1000;
    cfg.dt_operational = 0.0;
    CHECK_THROWS(validate(cfg));
    cfg.dt_operational = 1e-3;
    cfg.jobs = 0;
    CHECK_THROWS(validate(cfg));
}
