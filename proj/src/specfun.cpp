#include "polyfrac/mittag.hpp"

#include "polyfrac/quad.hpp"
#include "polyfrac/spectral.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace polyfrac {

namespace {

constexpr double kPi = 3.14159265358979323846;
using Complex = std::complex<double>;

void check_alpha(double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("Mittag-Leffler: alpha must lie in (0, 1]");
}

// The Taylor partial sums reach ~exp(|z|^{1/alpha}) before cancelling down, so
// the series is only trusted while that amplification stays below ~exp(6.5).
bool series_safe(double alpha, Complex z) {
    return std::pow(std::abs(z), 1.0 / alpha) <= 6.5;
}

struct KahanC {
    Complex sum{0.0, 0.0};
    Complex carry{0.0, 0.0};
    void add(Complex term) {
        const Complex y = term - carry;
        const Complex t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// sum_{k >= order} k!/(k-order)! z^{k-order} / Gamma(alpha k + 1)
Complex ml_series(double alpha, Complex z, int order) {
    KahanC acc;
    Complex zp{1.0, 0.0};
    double prev = std::numeric_limits<double>::infinity();
    for (int k = order; k < 500; ++k) {
        const double logc = std::lgamma(k + 1.0) - std::lgamma(k - order + 1.0) -
                            std::lgamma(alpha * k + 1.0);
        const Complex term = std::exp(logc) * zp;
        acc.add(term);
        zp *= z;
        const double mag = std::abs(term);
        if (mag < prev && mag <= 1e-17 * std::max(std::abs(acc.sum), 1e-280)) return acc.sum;
        prev = mag;
    }
    throw NumericalError("Mittag-Leffler series did not converge within 500 terms");
}

Complex integrate_complex(const std::function<Complex(double)>& g, double a, double b) {
    const QuadResult re = integrate([&](double w) { return g(w).real(); }, a, b, 1e-14, 1e-12);
    const QuadResult im = integrate([&](double w) { return g(w).imag(); }, a, b, 1e-14, 1e-12);
    const Complex value(re.value, im.value);
    const double err = re.error_estimate + im.error_estimate;
    if (!re.converged && !im.converged && err > 1e-8 * (std::abs(value) + 1e-300))
        throw NumericalError("Mittag-Leffler contour integral failed to converge");
    return value;
}

// Collapsed Hankel representation, valid away from the origin. The residue of
// the pole at w = z^{1/alpha} contributes the exponential term inside the
// growth sector |arg z| < alpha pi.
Complex ml_integral(double alpha, Complex z, int order) {
    const double absz = std::abs(z);
    const double W = std::max(std::pow(45.0, alpha), 2.0 * absz);
    Complex value;
    if (order == 0) {
        const double c = std::cos(kPi * alpha);
        auto g = [&](double w) {
            const Complex denom = w * w - 2.0 * c * w * z + z * z;
            return std::exp(-std::pow(w, 1.0 / alpha)) / denom;
        };
        const Complex I = integrate_complex(g, 0.0, W);
        value = -(z * std::sin(kPi * alpha) / (alpha * kPi)) * I;
    } else {
        const Complex ep = std::polar(1.0, kPi * alpha);
        const Complex em = std::conj(ep);
        auto g = [&](double w) {
            const Complex a = std::pow(z - w * ep, -(order + 1.0));
            const Complex b = std::pow(z - w * em, -(order + 1.0));
            return std::exp(-std::pow(w, 1.0 / alpha)) * (ep * a - em * b);
        };
        const Complex I = integrate_complex(g, 0.0, W);
        double fact = 1.0;
        for (int i = 2; i <= order; ++i) fact *= i;
        const double sign = (order % 2 == 0) ? 1.0 : -1.0;
        value = -(sign * fact / (2.0 * kPi * alpha)) * (I / Complex(0.0, 1.0));
    }
    if (std::abs(std::arg(z)) < alpha * kPi) {
        // Exponential residue term; only reachable with order == 0 because the
        // derivative path uses a Cauchy circle inside the growth sector.
        value += (1.0 / alpha) * std::exp(std::pow(z, 1.0 / alpha));
    }
    return value;
}

Complex ml_cauchy_deriv(double alpha, Complex z, int order) {
    constexpr int M = 64;
    const double rho = 1.0;
    KahanC acc;
    for (int m = 0; m < M; ++m) {
        const double th = 2.0 * kPi * m / M;
        const Complex zeta = z + std::polar(rho, th);
        acc.add(ml_scalar(alpha, zeta) * std::polar(1.0, -order * th));
    }
    double fact = 1.0;
    for (int i = 2; i <= order; ++i) fact *= i;
    return acc.sum * (fact / (M * std::pow(rho, order)));
}

Eigen::MatrixXd ml_matrix_impl(double alpha, double t, const Eigen::MatrixXd& A,
                               const SpectralDecomposition* cached) {
    check_alpha(alpha);
    if (A.rows() != A.cols()) throw std::invalid_argument("ml_matrix: matrix must be square");
    if (!(t >= 0.0)) throw std::invalid_argument("ml_matrix: time must be >= 0");
    const int n = static_cast<int>(A.rows());
    if (t == 0.0) return Eigen::MatrixXd::Identity(n, n);
    if (alpha == 1.0) return (t * A).exp();

    const double ta = std::pow(t, alpha);
    const int m = nilpotency_index(A);
    if (m > 0) {
        const Eigen::MatrixXd B = ta * A;
        Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
        for (int l = 1; l < m; ++l) {
            P = P * B;
            S += P / std::tgamma(alpha * l + 1.0);
        }
        return S;
    }

    SpectralDecomposition local;
    const SpectralDecomposition* sd = cached;
    if (!sd) {
        local = spectral_decompose(A);
        sd = &local;
    }
    if (sd->diagonalizable && sd->condition_estimate <= 1e6) {
        Eigen::VectorXcd d(n);
        for (int i = 0; i < n; ++i) d[i] = ml_scalar(alpha, ta * sd->eigenvalues[i]);
        const Eigen::MatrixXcd F = sd->right_vectors * d.asDiagonal() * sd->left_vectors;
        return F.real();
    }
    return apply_scalar_function(
        [alpha, ta](Complex zeta, int j) {
            return std::pow(ta, j) * ml_scalar_deriv(alpha, ta * zeta, j);
        },
        A);
}

}  // namespace

std::complex<double> ml_scalar(double alpha, std::complex<double> z) {
    check_alpha(alpha);
    if (alpha == 1.0) return std::exp(z);
    if (z == Complex(0.0, 0.0)) return Complex(1.0, 0.0);
    if (series_safe(alpha, z)) return ml_series(alpha, z, 0);
    return ml_integral(alpha, z, 0);
}

std::complex<double> ml_scalar_deriv(double alpha, std::complex<double> z, int order) {
    check_alpha(alpha);
    if (order < 0 || order > 8)
        throw std::invalid_argument("ml_scalar_deriv: order must lie in [0, 8]");
    if (order == 0) return ml_scalar(alpha, z);
    if (alpha == 1.0) return std::exp(z);
    if (series_safe(alpha, z)) return ml_series(alpha, z, order);
    if (std::abs(std::arg(z)) > alpha * kPi) return ml_integral(alpha, z, order);
    return ml_cauchy_deriv(alpha, z, order);
}

int nilpotency_index(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    const double scale = A.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 1;
    Eigen::MatrixXd P = A;
    for (int m = 1; m <= n; ++m) {
        if (P.cwiseAbs().maxCoeff() <= 1e-13 * std::pow(scale, m)) return m;
        if (m < n) P = P * A;
    }
    return 0;
}

Eigen::MatrixXd ml_matrix(double alpha, double t, const Eigen::MatrixXd& A) {
    return ml_matrix_impl(alpha, t, A, nullptr);
}

Eigen::MatrixXd ml_matrix(double alpha, double t, const GeneratorMatrix& G) {
    if (nilpotency_index(G.matrix()) > 0) return ml_matrix_impl(alpha, t, G.matrix(), nullptr);
    return ml_matrix_impl(alpha, t, G.matrix(), &G.spectrum());
}

}  // namespace polyfrac
