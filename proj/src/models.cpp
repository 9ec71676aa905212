#include "polyfrac/models.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace polyfrac {

namespace {

// Sparse polynomial scratch representation used while applying the generator.
using Poly1 = std::map<int, double>;                      // exponent -> coeff
using Poly2 = std::map<std::pair<int, int>, double>;      // (i, j) -> coeff

void add(Poly1& p, int e, double c) {
    if (c != 0.0) p[e] += c;
}
void add(Poly2& p, int i, int j, double c) {
    if (c != 0.0) p[{i, j}] += c;
}

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// G x^m for the one-dimensional models.
Poly1 apply_generator_1d(const ModelSpec& model, int m, int k) {
    Poly1 out;
    const double dm = m;
    switch (model.kind()) {
        case ModelSpec::Kind::BrownianMotion: {
            if (m >= 2) add(out, m - 2, 0.5 * dm * (dm - 1.0));
            break;
        }
        case ModelSpec::Kind::Pearson: {
            const auto& p = model.as<PearsonParams>();
            if (m >= 1) {
                add(out, m - 1, dm * p.beta * p.theta);
                add(out, m, -dm * p.beta);
            }
            if (m >= 2) {
                const double c = 0.5 * dm * (dm - 1.0);
                add(out, m - 2, c * p.a0);
                add(out, m - 1, c * p.a1);
                add(out, m, c * p.a2);
            }
            break;
        }
        case ModelSpec::Kind::JacobiJump: {
            const auto& p = model.as<JacobiJumpParams>();
            if (m >= 1) {
                add(out, m - 1, dm * p.beta * p.theta);
                add(out, m, -dm * p.beta);
            }
            if (m >= 2) {
                const double c = 0.5 * dm * (dm - 1.0) * p.sigma * p.sigma;
                add(out, m - 1, c);
                add(out, m, -c);
            }
            if (p.lambda > 0.0 && m >= 1) {
                // lambda ((1-x)^m - x^m), expanded binomially.
                for (int j = 0; j <= m; ++j)
                    add(out, j, p.lambda * binom(m, j) * ((j % 2 == 0) ? 1.0 : -1.0));
                add(out, m, -p.lambda);
            }
            break;
        }
        case ModelSpec::Kind::LevyOU: {
            const auto& p = model.as<LevyOUParams>();
            if (m >= 3 && static_cast<int>(p.levy_moments.size()) < m - 2)
                throw std::invalid_argument(
                    "LevyOU: jump moments of order 3.." + std::to_string(k) +
                    " must be supplied for generators of degree >= 3");
            if (m >= 1) {
                add(out, m - 1, dm * (p.beta * p.theta + p.levy_b * p.sigma));
                add(out, m, -dm * p.beta);
            }
            if (m >= 2)
                add(out, m - 2, 0.5 * dm * (dm - 1.0) * p.sigma * p.sigma * p.levy_a * p.levy_a);
            // Compensated jumps: sum_{j>=2} C(m,j) sigma^j m_j x^{m-j}.
            for (int j = 2; j <= m; ++j) {
                const double mj = (j == 2) ? p.levy_m2 : p.levy_moments[static_cast<std::size_t>(j - 3)];
                add(out, m - j, binom(m, j) * std::pow(p.sigma, j) * mj);
            }
            break;
        }
        default:
            throw std::logic_error("apply_generator_1d: not a one-dimensional model");
    }
    return out;
}

// G y^i r^j for the joint quadratic term-structure state (Y, r).
Poly2 apply_generator_qtsm(const QTSMParams& p, int i, int j) {
    Poly2 out;
    const double di = i, dj = j;
    const double s2 = p.sigma * p.sigma;
    const double c0 = p.R1 * p.b + p.R2 * s2 + 2.0 * p.R0 * p.beta;
    const double c1 = 2.0 * p.R2 * p.b + p.R1 * p.beta;
    // drift_y d/dy with drift_y = b - beta y
    if (i >= 1) {
        add(out, i - 1, j, di * p.b);
        add(out, i, j, -di * p.beta);
    }
    // drift_r d/dr with drift_r = c0 + c1 y - 2 beta r
    if (j >= 1) {
        add(out, i, j - 1, dj * c0);
        add(out, i + 1, j - 1, dj * c1);
        add(out, i, j, -2.0 * dj * p.beta);
    }
    // (1/2) sigma^2 d2/dy2
    if (i >= 2) add(out, i - 2, j, 0.5 * s2 * di * (di - 1.0));
    // sigma^2 (R1 + 2 R2 y) d2/dydr
    if (i >= 1 && j >= 1) {
        add(out, i - 1, j - 1, s2 * p.R1 * di * dj);
        add(out, i, j - 1, 2.0 * s2 * p.R2 * di * dj);
    }
    // (1/2) sigma^2 (R1 + 2 R2 y)^2 d2/dr2
    if (j >= 2) {
        const double c = 0.5 * s2 * dj * (dj - 1.0);
        add(out, i, j - 2, c * p.R1 * p.R1);
        add(out, i + 1, j - 2, c * 4.0 * p.R1 * p.R2);
        add(out, i + 2, j - 2, c * 4.0 * p.R2 * p.R2);
    }
    return out;
}

}  // namespace

ModelSpec::ModelSpec(Params params) : params_(std::move(params)) {
    if (const auto* p = std::get_if<PearsonParams>(&params_)) {
        if (p->beta < 0.0) throw std::invalid_argument("Pearson: beta must be >= 0");
    } else if (const auto* j = std::get_if<JacobiJumpParams>(&params_)) {
        if (j->beta <= 0.0) throw std::invalid_argument("JacobiJump: beta must be > 0");
        if (j->theta < 0.0 || j->theta > 1.0)
            throw std::invalid_argument("JacobiJump: theta must lie in [0,1]");
        if (j->sigma <= 0.0) throw std::invalid_argument("JacobiJump: sigma must be > 0");
        if (j->lambda < 0.0) throw std::invalid_argument("JacobiJump: lambda must be >= 0");
    } else if (const auto* l = std::get_if<LevyOUParams>(&params_)) {
        if (l->beta <= 0.0) throw std::invalid_argument("LevyOU: beta must be > 0");
        if (l->sigma <= 0.0) throw std::invalid_argument("LevyOU: sigma must be > 0");
        if (l->levy_m2 < 0.0) throw std::invalid_argument("LevyOU: levy_m2 must be >= 0");
    }
}

ModelSpec::Kind ModelSpec::kind() const {
    return static_cast<Kind>(params_.index());
}

std::string ModelSpec::name() const {
    switch (kind()) {
        case Kind::BrownianMotion: return "BrownianMotion";
        case Kind::Pearson: return "Pearson";
        case Kind::JacobiJump: return "JacobiJump";
        case Kind::LevyOU: return "LevyOU";
        case Kind::QTSM: return "QTSM";
    }
    return "?";
}

bool ModelSpec::in_state_space(const Eigen::VectorXd& x) const {
    if (x.size() != state_dim()) return false;
    if (kind() == Kind::JacobiJump) return x[0] >= 0.0 && x[0] <= 1.0;
    return true;
}

GeneratorMatrix::GeneratorMatrix(Eigen::MatrixXd A, std::shared_ptr<const Basis> basis,
                                 ModelSpec model, int k)
    : A_(std::move(A)), basis_(std::move(basis)), model_(std::move(model)), k_(k) {}

const SpectralDecomposition& GeneratorMatrix::spectrum() const {
    std::call_once(spectrum_->once, [this] { spectrum_->value = spectral_decompose(A_); });
    return *spectrum_->value;
}

GeneratorMatrix generator_matrix(const ModelSpec& model, int k) {
    if (k < 1) throw std::invalid_argument("generator_matrix: degree must be >= 1");
    auto basis = build_basis(model.state_dim(), k);
    const int N = basis->size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    for (int j = 0; j < N; ++j) {
        const auto& mono = basis->monomial(j).exponents;
        if (model.kind() == ModelSpec::Kind::QTSM) {
            const Poly2 g = apply_generator_qtsm(model.as<QTSMParams>(), mono[0], mono[1]);
            for (const auto& [exps, c] : g)
                A(basis->index_of(MultiIndex{{exps.first, exps.second}}), j) = c;
        } else {
            const Poly1 g = apply_generator_1d(model, mono[0], k);
            for (const auto& [e, c] : g) A(basis->index_of(MultiIndex{{e}}), j) = c;
        }
    }
    return GeneratorMatrix(std::move(A), std::move(basis), model, k);
}

double stability_index(const Eigen::MatrixXd& A) {
    const SpectralDecomposition sd = spectral_decompose(A);
    return sd.eigenvalues.real().maxCoeff();
}

double stability_index(const GeneratorMatrix& G) {
    return G.spectrum().eigenvalues.real().maxCoeff();
}

namespace {

bool zero_stable_impl(const Eigen::MatrixXd& A, const SpectralDecomposition& sd, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("is_zero_stable: tolerance must be > 0");
    const int n = static_cast<int>(A.rows());
    const double scale = std::max(A.cwiseAbs().maxCoeff(), 1.0);
    const double atol = tol * scale;

    std::vector<double> re(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (sd.eigenvalues[i].real() > atol) return false;
        re[static_cast<std::size_t>(i)] = std::abs(sd.eigenvalues[i].real());
    }
    std::sort(re.begin(), re.end());
    // One eigenvalue at zero (real and imaginary part), the rest well separated.
    int nearest = 0;
    for (int i = 0; i < n; ++i)
        if (std::abs(sd.eigenvalues[i]) < std::abs(sd.eigenvalues[nearest])) nearest = i;
    if (std::abs(sd.eigenvalues[nearest]) > 10.0 * atol) return false;
    if (n > 1 && re[1] <= 10.0 * atol) return false;

    // Simplicity: the near-null space of A has numerical rank deficiency one.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 10.0 * atol) ++rank;
    return rank == n - 1;
}

}  // namespace

bool is_zero_stable(const Eigen::MatrixXd& A, double tol) {
    return zero_stable_impl(A, spectral_decompose(A), tol);
}

bool is_zero_stable(const GeneratorMatrix& G, double tol) {
    return zero_stable_impl(G.matrix(), G.spectrum(), tol);
}

}  // namespace polyfrac
