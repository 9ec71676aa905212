#pragma once

#include "polyfrac/basis.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace polyfrac {

/// Convolution kernel kappa(t) = t^{-alpha} / Gamma(1-alpha).
struct AlphaKernel {
    double alpha = 0.5;
};

/// User kernels must be non-increasing with an integrable singularity at 0;
/// this is checked numerically on a log grid at construction.
using KappaSpec = std::variant<AlphaKernel, std::function<double(double)>>;

/// Coefficient problem for the Volterra equation
///   d/dt int_0^t q(s,x) kappa(t-s)/x ds - kappa(t)/x q(0,x) = G q(t,x)
/// with G the square-root diffusion generator b d/dx + (sigma^2 x / 2) d2/dx2
/// and polynomial initial condition u.
struct StateDepProblem {
    double b = 0.0;
    double sigma = 0.0;
    KappaSpec kappa;
    PolyVec u;
};

struct CoefficientSolution {
    std::vector<double> grid;
    /// c[j] samples the coefficient of x^j on the grid; c[0] is constant.
    std::vector<std::vector<double>> c;
    /// Which rate indexing survived the residual check: "component-matched"
    /// (rate j*b + j(j-1)/2 sigma^2 for c_j) or "shifted" (the same with
    /// j replaced by j-1). Both are tried; the residual oracle decides.
    std::string rate_convention;
    double residual = 0.0;
    /// Max residual each candidate achieved against the generator-derived
    /// equation, for reporting which indexing the oracle rejected.
    double residual_component_matched = 0.0;
    double residual_shifted = 0.0;
};

/// Max over the grid of the relative residual of
/// d/dt int_0^t c(s) kappa(t-s) ds - kappa(t) c(0) = lam c(t),
/// via product integration of the singular convolution and centered
/// differencing. Grid needs at least 64 points.
double volterra_residual(const std::vector<double>& c, const KappaSpec& kappa, double lam,
                         const std::vector<double>& grid);

/// Solves the decoupled scalar equations for each coefficient; closed
/// Mittag-Leffler form for the alpha kernel, implicit product-integration
/// Volterra stepping for user kernels. Aborts when no candidate rate passes
/// the residual check at 1e-3.
CoefficientSolution solve_coefficients(const StateDepProblem& prob,
                                       const std::vector<double>& t_grid);

}  // namespace polyfrac
