#include "polyfrac/moments.hpp"

#include "polyfrac/laplace.hpp"
#include "polyfrac/mittag.hpp"
#include "polyfrac/spectral.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace polyfrac {

namespace {

GeneratorMatrix prepare(const ModelSpec& model, const PolyVec& p, const Eigen::VectorXd& x,
                        Eigen::VectorXd& coeffs) {
    if (x.size() != model.state_dim())
        throw std::invalid_argument("moment: state vector dimension mismatch");
    if (p.basis().dimension() != model.state_dim())
        throw std::invalid_argument("moment: polynomial lives in the wrong dimension");
    if (!model.in_state_space(x))
        std::cerr << "warning: initial state outside the " << model.name()
                  << " state space; evaluating the polynomial extension\n";
    const int k = std::max(1, p.basis().max_degree());
    GeneratorMatrix G = generator_matrix(model, k);
    coeffs = embed(p, G.basis_ptr()).coeffs();
    return G;
}

double contract(const GeneratorMatrix& G, const Eigen::VectorXd& q, const Eigen::VectorXd& x) {
    return evaluate(PolyVec(G.basis_ptr(), q), x);
}

// Smallest c >= 0 with Re f(c) = target, by bracketing and bisection. f is a
// Bernstein exponent: real, increasing, f(0+) = 0 on the positive half-line.
double contour_abscissa(const GeneralBernstein& sub, double target) {
    if (target <= 0.0) return 0.0;
    double hi = 1.0;
    while (sub.f(hi).real() < target) {
        hi *= 2.0;
        if (hi > 1e6)
            throw NumericalError(
                "moment_general_f: contour placement impossible, f stays below pi(A) up to 1e6");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (sub.f(mid).real() < target ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace

SubordinatorSpec::SubordinatorSpec(Params params) : params_(std::move(params)) {
    if (const auto* s = std::get_if<StableAlpha>(&params_)) {
        if (!(s->alpha > 0.0) || !(s->alpha < 1.0))
            throw std::invalid_argument("SubordinatorSpec: alpha must lie in (0,1)");
    } else {
        const auto& g = std::get<GeneralBernstein>(params_);
        if (!g.f) throw std::invalid_argument("SubordinatorSpec: Laplace exponent required");
        if (g.drift < 0.0) throw std::invalid_argument("SubordinatorSpec: drift must be >= 0");
        if (std::abs(g.f(1e-8)) > 1e-3)
            throw std::invalid_argument("SubordinatorSpec: f(0+) must vanish (no killing)");
        double prev = 0.0;
        for (double lam : {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0}) {
            const double cur = g.f(lam).real();
            if (cur <= prev)
                throw std::invalid_argument("SubordinatorSpec: f must be strictly increasing");
            prev = cur;
        }
    }
}

double moment_classical(const ModelSpec& model, const PolyVec& p, const Eigen::VectorXd& x,
                        double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("moment_classical: t must be >= 0");
    Eigen::VectorXd c;
    GeneratorMatrix G = prepare(model, p, x, c);
    return contract(G, (t * G.matrix()).exp() * c, x);
}

double moment_fractional(const ModelSpec& model, const PolyVec& p, const Eigen::VectorXd& x,
                         double t, double alpha) {
    if (!(t >= 0.0)) throw std::invalid_argument("moment_fractional: t must be >= 0");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("moment_fractional: alpha must lie in (0,1)");
    Eigen::VectorXd c;
    GeneratorMatrix G = prepare(model, p, x, c);
    return contract(G, ml_matrix(alpha, t, G) * c, x);
}

double moment_general_f(const ModelSpec& model, const PolyVec& p, const Eigen::VectorXd& x,
                        double t, const GeneralBernstein& sub, double* error_estimate) {
    if (!(t > 0.0)) throw std::invalid_argument("moment_general_f: t must be > 0");
    SubordinatorSpec check{sub};  // validates the exponent
    Eigen::VectorXd c;
    GeneratorMatrix G = prepare(model, p, x, c);
    const Eigen::MatrixXcd A = G.matrix().cast<std::complex<double>>();
    const int n = static_cast<int>(A.rows());
    const double shift = contour_abscissa(sub, std::max(stability_index(G), 0.0)) + 0.5;
    const Eigen::VectorXcd pc = c.cast<std::complex<double>>();

    auto F = [&](std::complex<double> lam) -> Eigen::VectorXcd {
        const std::complex<double> flam = sub.f(lam);
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(flam * Eigen::MatrixXcd::Identity(n, n) - A);
        if (!lu.isInvertible()) {
            std::ostringstream msg;
            msg << "moment_general_f: resolvent singular at lambda = " << lam;
            throw NumericalError(msg.str());
        }
        return (flam / lam) * lu.solve(pc);
    };
    const LaplaceInversion inv = invert_laplace(F, t, shift);
    if (error_estimate) *error_estimate = inv.error_estimate;
    return contract(G, inv.value, x);
}

double run_query(const MomentQuery& query) {
    if (!query.subordinator) return moment_classical(query.model, query.p, query.x, query.t);
    if (query.subordinator->is_stable())
        return moment_fractional(query.model, query.p, query.x, query.t,
                                 query.subordinator->stable().alpha);
    return moment_general_f(query.model, query.p, query.x, query.t,
                            query.subordinator->bernstein());
}

double caputo_residual(const Eigen::MatrixXd& q, double alpha, const Eigen::MatrixXd& A,
                       const std::vector<double>& grid) {
    const int n = static_cast<int>(grid.size());
    if (n < 16) throw std::invalid_argument("caputo_residual: grid needs at least 16 points");
    if (grid[0] != 0.0) throw std::invalid_argument("caputo_residual: grid must start at 0");
    for (int i = 1; i < n; ++i)
        if (grid[i] <= grid[i - 1])
            throw std::invalid_argument("caputo_residual: grid must be strictly increasing");
    if (q.rows() != n || q.cols() != A.rows())
        throw std::invalid_argument("caputo_residual: sample shape mismatch");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("caputo_residual: alpha must lie in (0,1)");

    // Split off the boundary layer a1*t^alpha + a2*t^{2 alpha} fitted at the
    // first two nodes: polynomial interpolants approximate these terms with
    // O(1) relative error near 0, while their Caputo derivatives are known in
    // closed form. The remainder decays like t^{3 alpha}, which product
    // integration handles on a graded grid.
    const double t1a = std::pow(grid[1], alpha), t2a = std::pow(grid[2], alpha);
    const double det = t1a * t2a * t2a - t2a * t1a * t1a;
    const Eigen::RowVectorXd u1 = q.row(1) - q.row(0);
    const Eigen::RowVectorXd u2 = q.row(2) - q.row(0);
    const Eigen::RowVectorXd a1 = (t2a * t2a * u1 - t1a * t1a * u2) / det;
    const Eigen::RowVectorXd a2 = (t1a * u2 - t2a * u1) / det;
    Eigen::MatrixXd r = q;
    for (int i = 0; i < n; ++i) {
        const double ta = std::pow(grid[i], alpha);
        r.row(i) -= q.row(0) + ta * a1 + ta * ta * a2;
    }
    const double g1 = std::tgamma(1.0 + alpha);
    const double g2 = std::tgamma(1.0 + 2.0 * alpha) / g1;

    // Product integration: the kernel (t_i - s)^{-alpha} is integrated exactly
    // against the derivative of the local quadratic through three neighbouring
    // samples of the remainder.
    const double ginv = 1.0 / std::tgamma(1.0 - alpha);
    double worst = 0.0;
    for (int i = 1; i < n; ++i) {
        const double ti = grid[i];
        Eigen::VectorXd d = Eigen::VectorXd::Zero(q.cols());
        for (int j = 0; j < i; ++j) {
            const double lo = ti - grid[j + 1];
            const double hi = ti - grid[j];
            const double m0 =
                (std::pow(hi, 1.0 - alpha) - std::pow(lo, 1.0 - alpha)) / (1.0 - alpha);
            const double m1 =
                (std::pow(hi, 2.0 - alpha) - std::pow(lo, 2.0 - alpha)) / (2.0 - alpha);
            const int b = (j == 0) ? 0 : j - 1;  // stencil nodes b, b+1, b+2
            const double s0 = grid[b], s1 = grid[b + 1], s2 = grid[b + 2];
            const Eigen::RowVectorXd d1 = (r.row(b + 1) - r.row(b)) / (s1 - s0);
            const Eigen::RowVectorXd d2 =
                ((r.row(b + 2) - r.row(b + 1)) / (s2 - s1) - d1) / (s2 - s0);
            d += (m0 * d1 + (m0 * (2.0 * ti - s0 - s1) - 2.0 * m1) * d2).transpose();
        }
        const double tia = std::pow(ti, alpha);
        d = ginv * d + (g1 * a1 + g2 * tia * a2).transpose();
        const Eigen::VectorXd rhs = A * q.row(i).transpose();
        const double res = (d - rhs).cwiseAbs().maxCoeff() / (1.0 + rhs.cwiseAbs().maxCoeff());
        worst = std::max(worst, res);
    }
    return worst;
}

std::vector<double> graded_grid(double T, int n, double gamma) {
    if (n < 2) throw std::invalid_argument("graded_grid: need at least 2 points");
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = T * std::pow(static_cast<double>(i) / (n - 1), gamma);
    return g;
}

}  // namespace polyfrac
