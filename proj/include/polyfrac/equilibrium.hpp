#pragma once

#include "polyfrac/models.hpp"

#include <optional>

namespace polyfrac {

/// Left null eigenvector of the generator (the vector of stationary moments),
/// normalized so its constant entry is 1. Requires zero-stability.
Eigen::VectorXd stationary_vector(const GeneratorMatrix& G);

/// Holds the generator on degrees k and 2k together with the stationary
/// moment vector on degree 2k. Construction fails fast when either generator
/// is not zero-stable.
class EquilibriumContext {
  public:
    EquilibriumContext(ModelSpec model, int k);

    const ModelSpec& model() const { return model_; }
    int degree() const { return k_; }
    const GeneratorMatrix& Ak() const { return Ak_; }
    const GeneratorMatrix& A2k() const { return A2k_; }
    const Eigen::VectorXd& v() const { return v_; }

  private:
    ModelSpec model_;
    int k_;
    GeneratorMatrix Ak_;
    GeneratorMatrix A2k_;
    Eigen::VectorXd v_;
};

/// E_mu[p(X_t)] = v^T p, identical for the classical and time-changed process.
double stationary_moment(const EquilibriumContext& ctx, const PolyVec& p);

/// Laplace transform F_{s,t}(beta) = E[exp(-beta (L_{t+s} - L_t))] of the
/// inverse alpha-stable subordinator increment. The endpoint singularity of
/// the defining integral is removed exactly by the substitution w = z^alpha.
double fhat_scalar(double alpha, double beta, double s, double t);

/// F_{s,t}(-A) as a matrix function of the zero-stable generator; eigenvalue 0
/// maps to 1, eigenvalue xi < 0 to fhat_scalar(alpha, -xi, s, t).
Eigen::MatrixXd fhat_matrix(double alpha, const GeneratorMatrix& G, double s, double t);

/// Equilibrium cross-moment E_mu[p(X_{T_{t+s}}) q(X_{T_t})] where T is the
/// fractional clock when alpha is given and the identity clock otherwise.
double cross_moment(const EquilibriumContext& ctx, const PolyVec& p, const PolyVec& q, double s,
                    double t, std::optional<double> alpha);

/// corr_mu(X_{L_{t+s}}, X_{L_t}) for one-dimensional models whose first-degree
/// generator has eigenvalues {0, -beta}: equals fhat_scalar(alpha, beta, s, t).
/// The raw covariance from cross_moment is exposed for cross-validation.
double correlation(const EquilibriumContext& ctx, double s, double t, double alpha,
                   double* covariance = nullptr);

/// Power-law tail R_{s,t}(lam) that fhat_scalar approaches as s grows.
double lrd_asymptote(double alpha, double lam, double s, double t);

}  // namespace polyfrac
