#pragma once

#include "polyfrac/models.hpp"

#include <functional>
#include <optional>
#include <variant>

namespace polyfrac {

struct StableAlpha {
    double alpha = 0.5;  // in (0, 1) strictly
};

/// Bernstein Laplace exponent f(x) = b x + int (1 - e^{-s x}) nu(ds), no
/// killing term. `f` must be evaluable on a right half-plane and
/// conjugate-symmetric; `nu_tail` is the tail s -> nu((s, inf)), optional.
struct GeneralBernstein {
    double drift = 0.0;
    std::function<std::complex<double>(std::complex<double>)> f;
    std::function<double(double)> nu_tail;
};

class SubordinatorSpec {
  public:
    using Params = std::variant<StableAlpha, GeneralBernstein>;

    explicit SubordinatorSpec(Params params);

    bool is_stable() const { return std::holds_alternative<StableAlpha>(params_); }
    const StableAlpha& stable() const { return std::get<StableAlpha>(params_); }
    const GeneralBernstein& bernstein() const { return std::get<GeneralBernstein>(params_); }

  private:
    Params params_;
};

struct MomentQuery {
    ModelSpec model;
    PolyVec p;
    Eigen::VectorXd x;
    double t = 0.0;
    std::optional<SubordinatorSpec> subordinator;  // nullopt: classical clock
};

/// E_x[p(X_t)] = H(x)^T exp(tA) p. x outside the model's state space only
/// warns: the formula is a polynomial identity in x.
double moment_classical(const ModelSpec& model, const PolyVec& p, const Eigen::VectorXd& x,
                        double t);

/// E_x[p(X_{L_t})] = H(x)^T E_alpha(t^alpha A) p for the inverse alpha-stable clock.
double moment_fractional(const ModelSpec& model, const PolyVec& p, const Eigen::VectorXd& x,
                         double t, double alpha);

/// Same moment under a general Bernstein subordinator clock: inverts the
/// resolvent transform lambda -> (f(lambda)/lambda) (f(lambda) I - A)^{-1} p
/// numerically on a contour right of f^{-1}(max(pi(A), 0)). Target accuracy
/// 1e-6 relative; the contour-refinement estimate lands in *error_estimate.
double moment_general_f(const ModelSpec& model, const PolyVec& p, const Eigen::VectorXd& x,
                        double t, const GeneralBernstein& sub, double* error_estimate = nullptr);

double run_query(const MomentQuery& query);

/// Max over the grid of ||D^alpha q - A q|| / (1 + ||A q||), with the Caputo
/// derivative evaluated by product integration of the singular kernel against
/// local quadratics, after splitting off the t^alpha and t^{2 alpha} boundary
/// layer fitted at the first two nodes. q.row(i) holds the sampled vector at
/// grid[i]; grid starts at 0, strictly increasing, at least 16 points.
double caputo_residual(const Eigen::MatrixXd& q, double alpha, const Eigen::MatrixXd& A,
                       const std::vector<double>& grid);

/// n-point grid T (i/(n-1))^gamma on [0, T], clustered at 0 to resolve the
/// t^alpha behaviour of fractional solutions.
std::vector<double> graded_grid(double T, int n, double gamma);

}  // namespace polyfrac
