#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace polyfrac {

/// Eigen-decomposition of a real square matrix, with a conditioning estimate
/// for the eigenvector matrix Q. `diagonalizable` is a numerical verdict:
/// Q is invertible and Q diag(xi) Q^{-1} reconstructs A to 1e-10 * ||A||.
struct SpectralDecomposition {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd right_vectors;  // Q
    Eigen::MatrixXcd left_vectors;   // Q^{-1}
    bool diagonalizable = false;
    double condition_estimate = 0.0;
};

/// Dense eigensolve. Throws NumericalError if the QR iteration fails.
SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& A);

/// A scalar function together with its derivatives: f(z, j) returns the j-th
/// derivative of f at z (j = 0 is the function itself).
using ScalarFunction = std::function<std::complex<double>(std::complex<double>, int)>;

/// f(A) through the spectrum of A. Uses the eigendecomposition when Q is well
/// conditioned (condition_estimate <= 1e6); otherwise a Schur-form block
/// recurrence with derivative-based Taylor evaluation on clustered eigenvalues.
/// A real matrix with conjugate-symmetric f yields a real result; the dropped
/// imaginary residue is reported through `imag_residue` when non-null.
Eigen::MatrixXd apply_scalar_function(const ScalarFunction& f, const Eigen::MatrixXd& A,
                                      int max_order = 8, double* imag_residue = nullptr);

/// Error type for eigensolver / numerical-routine failures; never a silent NaN.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace polyfrac
