#pragma once

#include "polyfrac/basis.hpp"
#include "polyfrac/spectral.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace polyfrac {

struct BrownianMotionParams {};

/// dX = -beta (X - theta) dt + sqrt(a0 + a1 X + a2 X^2) dW
struct PearsonParams {
    double beta = 1.0;
    double theta = 0.0;
    double a0 = 1.0;
    double a1 = 0.0;
    double a2 = 0.0;
};

/// dX = -beta (X - theta) dt + sigma sqrt(X (1 - X)) dW + (1 - 2X) dJ on [0,1]
struct JacobiJumpParams {
    double beta = 1.0;
    double theta = 0.5;
    double sigma = 0.5;
    double lambda = 0.0;  // Poisson jump intensity
};

/// dX = -beta (X - theta) dt + sigma dY with Y a Levy process (levy_a, levy_b
/// Gaussian/drift parts, truncation xi -> xi). levy_m2 is the second jump
/// moment int xi^2 nu(dxi); levy_moments[i] supplies the moment of order i+3,
/// required whenever the generator degree exceeds 2.
struct LevyOUParams {
    double beta = 1.0;
    double theta = 0.0;
    double sigma = 1.0;
    double levy_b = 0.0;
    double levy_a = 0.0;
    double levy_m2 = 0.0;
    std::vector<double> levy_moments;  // moments of order 3, 4, ... if needed
    // Jump law for simulation only: compensated compound Poisson with
    // Exponential(jump_mean) jumps at intensity jump_rate. The simulator
    // requires jump_rate * 2 * jump_mean^2 == levy_m2; the moment fields above
    // stay authoritative for the formulas.
    double jump_rate = 0.0;
    double jump_mean = 0.0;
};

/// Quadratic term structure: r = R0 + R1 Y + R2 Y^2 with dY = (b - beta Y) dt + sigma dW.
/// State is the joint process (Y, r) in two dimensions.
struct QTSMParams {
    double b = 0.0;
    double beta = 1.0;
    double sigma = 1.0;
    double R0 = 0.0;
    double R1 = 0.0;
    double R2 = 1.0;
};

class ModelSpec {
  public:
    enum class Kind { BrownianMotion, Pearson, JacobiJump, LevyOU, QTSM };

    using Params = std::variant<BrownianMotionParams, PearsonParams, JacobiJumpParams,
                                LevyOUParams, QTSMParams>;

    explicit ModelSpec(Params params);

    Kind kind() const;
    const Params& params() const { return params_; }
    int state_dim() const { return kind() == Kind::QTSM ? 2 : 1; }
    std::string name() const;

    /// True when x lies in the model's declared state space.
    bool in_state_space(const Eigen::VectorXd& x) const;

    template <typename T>
    const T& as() const { return std::get<T>(params_); }

  private:
    Params params_;
};

/// Matrix representation of the generator on the monomial basis of degree <= k:
/// column j carries the coefficients of G h_j, so the coefficient vector of
/// G u is A u and moments read H(x)^T exp(tA) u.
class GeneratorMatrix {
  public:
    GeneratorMatrix(Eigen::MatrixXd A, std::shared_ptr<const Basis> basis, ModelSpec model, int k);

    const Eigen::MatrixXd& matrix() const { return A_; }
    const Basis& basis() const { return *basis_; }
    std::shared_ptr<const Basis> basis_ptr() const { return basis_; }
    const ModelSpec& model() const { return model_; }
    int degree() const { return k_; }

    /// Cached eigen-decomposition, computed once on first use.
    const SpectralDecomposition& spectrum() const;

  private:
    struct SpectrumCache {
        std::once_flag once;
        std::optional<SpectralDecomposition> value;
    };

    Eigen::MatrixXd A_;
    std::shared_ptr<const Basis> basis_;
    ModelSpec model_;
    int k_;
    std::shared_ptr<SpectrumCache> spectrum_ = std::make_shared<SpectrumCache>();
};

/// Builds G|_{P_k} by applying the extended generator to each basis monomial.
GeneratorMatrix generator_matrix(const ModelSpec& model, int k);

/// pi(A): maximum real part over the eigenvalues.
double stability_index(const GeneratorMatrix& G);
double stability_index(const Eigen::MatrixXd& A);

/// True iff all eigenvalues have real part below tolerance except a single
/// simple eigenvalue at zero. The default tolerance is 1e-9 relative to ||A||.
bool is_zero_stable(const GeneratorMatrix& G, double tol = 1e-9);
bool is_zero_stable(const Eigen::MatrixXd& A, double tol = 1e-9);

}  // namespace polyfrac
