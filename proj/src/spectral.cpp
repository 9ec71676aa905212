#include "polyfrac/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace polyfrac {

namespace {

using Cplx = std::complex<double>;

double mat_norm(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success)
        throw NumericalError("spectral_decompose: eigensolver did not converge");
    SpectralDecomposition out;
    out.eigenvalues = es.eigenvalues();
    out.right_vectors = es.eigenvectors();

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(out.right_vectors);
    if (!lu.isInvertible()) {
        out.diagonalizable = false;
        out.condition_estimate = std::numeric_limits<double>::infinity();
        return out;
    }
    out.left_vectors = lu.inverse();
    out.condition_estimate = mat_norm(out.right_vectors) * mat_norm(out.left_vectors) *
                             static_cast<double>(A.rows());

    const Eigen::MatrixXcd recon = out.right_vectors *
                                   out.eigenvalues.asDiagonal() * out.left_vectors;
    const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
    out.diagonalizable = mat_norm(recon - A.cast<Cplx>()) <= 1e-10 * scale;
    return out;
}

namespace {

// Swaps the adjacent diagonal entries k, k+1 of the upper-triangular T by a
// unitary similarity, updating U accordingly.
void schur_swap(Eigen::MatrixXcd& T, Eigen::MatrixXcd& U, int k) {
    const Cplx t11 = T(k, k), t12 = T(k, k + 1), t22 = T(k + 1, k + 1);
    // Eigenvector of the 2x2 block for eigenvalue t22.
    Cplx v1 = t12, v2 = t22 - t11;
    const double nv = std::sqrt(std::norm(v1) + std::norm(v2));
    if (nv == 0.0) return;  // already decoupled and equal
    v1 /= nv;
    v2 /= nv;
    Eigen::Matrix2cd G;
    G << v1, -std::conj(v2), v2, std::conj(v1);
    T.middleRows(k, 2) = G.adjoint() * T.middleRows(k, 2);
    T.middleCols(k, 2) = T.middleCols(k, 2) * G;
    U.middleCols(k, 2) = U.middleCols(k, 2) * G;
    T(k + 1, k) = 0.0;
}

// Taylor evaluation of f on a single-cluster triangular block about the
// cluster mean. Block size minus one bounds the needed derivative order.
Eigen::MatrixXcd block_function(const ScalarFunction& f, const Eigen::MatrixXcd& Tb,
                                int max_order) {
    const int m = static_cast<int>(Tb.rows());
    if (m == 1) {
        Eigen::MatrixXcd F(1, 1);
        F(0, 0) = f(Tb(0, 0), 0);
        return F;
    }
    const int extra = 3;
    const int K = std::min(max_order, m - 1 + extra);
    if (m - 1 > max_order)
        throw NumericalError("apply_scalar_function: cluster defect exceeds supported derivative order");
    Cplx mu = 0.0;
    for (int i = 0; i < m; ++i) mu += Tb(i, i);
    mu /= static_cast<double>(m);
    const Eigen::MatrixXcd M = Tb - mu * Eigen::MatrixXcd::Identity(m, m);
    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(m, m);
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(m, m);
    double kfact = 1.0;
    for (int k = 0; k <= K; ++k) {
        if (k > 0) {
            P = P * M;
            kfact *= k;
        }
        F += (f(mu, k) / kfact) * P;
    }
    return F;
}

// Solves T11 X - X T22 = R by Kronecker expansion (blocks are tiny).
Eigen::MatrixXcd solve_sylvester(const Eigen::MatrixXcd& T11, const Eigen::MatrixXcd& T22,
                                 const Eigen::MatrixXcd& R) {
    const int p = static_cast<int>(T11.rows());
    const int q = static_cast<int>(T22.rows());
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(p * q, p * q);
    // vec is column-major: vec(T11 X) = (I_q kron T11) vec, vec(X T22) = (T22^T kron I_p) vec.
    for (int j = 0; j < q; ++j)
        K.block(j * p, j * p, p, p) += T11;
    for (int j = 0; j < q; ++j)
        for (int l = 0; l < q; ++l)
            K.block(j * p, l * p, p, p).diagonal().array() -= T22(l, j);
    Eigen::VectorXcd r(p * q);
    for (int j = 0; j < q; ++j) r.segment(j * p, p) = R.col(j);
    const Eigen::VectorXcd x = K.fullPivLu().solve(r);
    Eigen::MatrixXcd X(p, q);
    for (int j = 0; j < q; ++j) X.col(j) = x.segment(j * p, p);
    return X;
}

Eigen::MatrixXcd schur_parlett(const ScalarFunction& f, const Eigen::MatrixXd& A,
                               int max_order) {
    const int n = static_cast<int>(A.rows());
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(A.cast<Cplx>(), /*computeU=*/true);
    if (schur.info() != Eigen::Success)
        throw NumericalError("apply_scalar_function: Schur decomposition did not converge");
    Eigen::MatrixXcd T = schur.matrixT();
    Eigen::MatrixXcd U = schur.matrixU();

    // Cluster eigenvalues by transitive proximity.
    const double scale = std::max(A.cwiseAbs().maxCoeff(), 1.0);
    const double delta = 1e-6 * scale;
    std::vector<int> cluster(static_cast<std::size_t>(n), -1);
    {
        std::vector<Cplx> centers;
        bool changed = true;
        for (int i = 0; i < n; ++i) {
            int hit = -1;
            for (std::size_t c = 0; c < centers.size(); ++c)
                if (std::abs(T(i, i) - centers[c]) <= delta) { hit = static_cast<int>(c); break; }
            if (hit < 0) {
                centers.push_back(T(i, i));
                hit = static_cast<int>(centers.size()) - 1;
            }
            cluster[static_cast<std::size_t>(i)] = hit;
        }
        // Merge centers that drifted within delta of each other.
        while (changed) {
            changed = false;
            for (std::size_t a = 0; a < centers.size() && !changed; ++a)
                for (std::size_t b = a + 1; b < centers.size() && !changed; ++b)
                    if (std::abs(centers[a] - centers[b]) <= delta) {
                        for (auto& c : cluster)
                            if (c == static_cast<int>(b)) c = static_cast<int>(a);
                        centers[b] = centers[a];
                        changed = true;
                    }
        }
    }

    // Reorder the Schur form so that clusters are contiguous, preserving the
    // order of first appearance (bubble adjacent swaps keep T triangular).
    std::vector<int> target_order;
    for (int i = 0; i < n; ++i)
        if (std::find(target_order.begin(), target_order.end(),
                      cluster[static_cast<std::size_t>(i)]) == target_order.end())
            target_order.push_back(cluster[static_cast<std::size_t>(i)]);
    auto rank_of = [&](int c) {
        return static_cast<int>(std::find(target_order.begin(), target_order.end(), c) -
                                target_order.begin());
    };
    bool swapped = true;
    while (swapped) {
        swapped = false;
        for (int i = 0; i + 1 < n; ++i) {
            if (rank_of(cluster[static_cast<std::size_t>(i)]) >
                rank_of(cluster[static_cast<std::size_t>(i + 1)])) {
                schur_swap(T, U, i);
                std::swap(cluster[static_cast<std::size_t>(i)],
                          cluster[static_cast<std::size_t>(i + 1)]);
                swapped = true;
            }
        }
    }

    // Block boundaries.
    std::vector<int> starts{0};
    for (int i = 1; i < n; ++i)
        if (cluster[static_cast<std::size_t>(i)] != cluster[static_cast<std::size_t>(i - 1)])
            starts.push_back(i);
    starts.push_back(n);
    const int nb = static_cast<int>(starts.size()) - 1;

    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(n, n);
    auto blk = [&](Eigen::MatrixXcd& M, int bi, int bj) {
        return M.block(starts[static_cast<std::size_t>(bi)], starts[static_cast<std::size_t>(bj)],
                       starts[static_cast<std::size_t>(bi) + 1] - starts[static_cast<std::size_t>(bi)],
                       starts[static_cast<std::size_t>(bj) + 1] - starts[static_cast<std::size_t>(bj)]);
    };
    for (int b = 0; b < nb; ++b)
        blk(F, b, b) = block_function(f, blk(T, b, b), max_order);
    // Parlett recurrence over superdiagonals of blocks.
    for (int diag = 1; diag < nb; ++diag) {
        for (int i = 0; i + diag < nb; ++i) {
            const int j = i + diag;
            Eigen::MatrixXcd R = blk(F, i, i) * blk(T, i, j) - blk(T, i, j) * blk(F, j, j);
            for (int k = i + 1; k < j; ++k)
                R += blk(F, i, k) * blk(T, k, j) - blk(T, i, k) * blk(F, k, j);
            blk(F, i, j) = solve_sylvester(blk(T, i, i), blk(T, j, j), R);
        }
    }
    return U * F * U.adjoint();
}

}  // namespace

Eigen::MatrixXd apply_scalar_function(const ScalarFunction& f, const Eigen::MatrixXd& A,
                                      int max_order, double* imag_residue) {
    Eigen::MatrixXcd Fc;
    const SpectralDecomposition sd = spectral_decompose(A);
    if (sd.diagonalizable && sd.condition_estimate <= 1e6) {
        Eigen::VectorXcd fx(sd.eigenvalues.size());
        for (int i = 0; i < fx.size(); ++i) fx[i] = f(sd.eigenvalues[i], 0);
        Fc = sd.right_vectors * fx.asDiagonal() * sd.left_vectors;
    } else {
        Fc = schur_parlett(f, A, max_order);
    }
    const double scale = std::max(Fc.cwiseAbs().maxCoeff(), 1e-300);
    const double residue = Fc.imag().cwiseAbs().maxCoeff() / scale;
    if (imag_residue) *imag_residue = residue;
    return Fc.real();
}

}  // namespace polyfrac
