#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace polyfrac {

struct LaplaceInversion {
    Eigen::VectorXd value;
    double error_estimate = 0.0;
    int nodes_used = 0;
};

/// Inverts a vector-valued Laplace transform at time t > 0 on a fixed-Talbot
/// contour shifted right by `shift`, so F only gets evaluated at
/// Re(lambda) >= shift. F must be conjugate-symmetric (real original). The
/// error estimate is the difference between the finest two node counts
/// (32/64/128 by default).
LaplaceInversion invert_laplace(const std::function<Eigen::VectorXcd(std::complex<double>)>& F,
                                double t, double shift, int max_nodes = 128);

}  // namespace polyfrac
