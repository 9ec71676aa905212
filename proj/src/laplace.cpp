#include "polyfrac/laplace.hpp"

#include "polyfrac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polyfrac {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Fixed-Talbot rule with M nodes applied to G(s) = F(shift + s); the shift is
// undone by the exp(shift * t) factor.
Eigen::VectorXd talbot_once(const std::function<Eigen::VectorXcd(std::complex<double>)>& F,
                            double t, double shift, int M) {
    const double r = 2.0 * M / (5.0 * t);
    Eigen::VectorXcd acc = 0.5 * std::exp(r * t) * F(shift + r);
    for (int k = 1; k < M; ++k) {
        const double th = k * kPi / M;
        const double cot = std::cos(th) / std::sin(th);
        const std::complex<double> s(r * th * cot, r * th);
        const double sigma = th + (th * cot - 1.0) * cot;
        const std::complex<double> weight = std::exp(t * s) * std::complex<double>(1.0, sigma);
        acc += weight * F(shift + s);
    }
    return std::exp(shift * t) * (r / M) * acc.real();
}

}  // namespace

LaplaceInversion invert_laplace(const std::function<Eigen::VectorXcd(std::complex<double>)>& F,
                                double t, double shift, int max_nodes) {
    if (!(t > 0.0)) throw std::invalid_argument("invert_laplace: t must be > 0");
    if (max_nodes < 16) throw std::invalid_argument("invert_laplace: need at least 16 nodes");
    // Roundoff on this contour grows like exp(2M/5), so double precision caps
    // the useful node count near 32; larger M loses digits instead of gaining.
    const int M = std::min(max_nodes, 32);
    const int M0 = (3 * M) / 4;
    const Eigen::VectorXd coarse = talbot_once(F, t, shift, M0);
    LaplaceInversion out;
    out.value = talbot_once(F, t, shift, M);
    out.nodes_used = M;
    out.error_estimate = (out.value - coarse).cwiseAbs().maxCoeff();
    if (!out.value.allFinite())
        throw NumericalError("invert_laplace: contour evaluation produced non-finite values");
    return out;
}

}  // namespace polyfrac
