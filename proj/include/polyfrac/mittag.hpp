#pragma once

#include "polyfrac/models.hpp"

#include <complex>

namespace polyfrac {

/// One-parameter Mittag-Leffler function E_alpha(z) for alpha in (0, 1].
///
/// Routing: Taylor series with compensated summation inside an alpha-dependent
/// cancellation-safe radius; outside, the Hankel-collapsed integral
/// representation (plus the exponential residue term in the growth sector
/// |arg z| < alpha*pi). Accuracy degrades near the Stokes rays
/// |arg z| = alpha*pi at large |z|, where the integrand develops a
/// near-singularity; that zone is outside the generator spectra this library
/// produces.
std::complex<double> ml_scalar(double alpha, std::complex<double> z);

/// order-th derivative of E_alpha at z, order <= 8.
std::complex<double> ml_scalar_deriv(double alpha, std::complex<double> z, int order);

/// E_alpha(t^alpha A). Nilpotent A: exact finite series. Diagonalizable with a
/// well-conditioned eigenbasis: spectral evaluation. Otherwise the Schur-form
/// block recurrence with Mittag-Leffler derivatives.
Eigen::MatrixXd ml_matrix(double alpha, double t, const Eigen::MatrixXd& A);
Eigen::MatrixXd ml_matrix(double alpha, double t, const GeneratorMatrix& G);

/// Largest m <= n with A^m = 0 (structural nilpotency), or 0 if A is not
/// nilpotent. Exposed for tests.
int nilpotency_index(const Eigen::MatrixXd& A);

}  // namespace polyfrac
