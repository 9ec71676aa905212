#pragma once

#include <Eigen/Dense>
#include <compare>
#include <map>
#include <memory>
#include <vector>

namespace polyfrac {

/// Exponent tuple of a monomial x1^k1 ... xd^kd.
struct MultiIndex {
    std::vector<int> exponents;

    int degree() const;
    bool operator==(const MultiIndex& other) const = default;
};

/// Graded-lexicographic order: total degree first, then lexicographic with
/// the first variable most significant (larger exponent earlier). Gives
/// (1, x, y, x^2, xy, y^2) in two variables.
bool grlex_less(const MultiIndex& a, const MultiIndex& b);

/// Ordered monomial basis of the polynomials of degree <= n in d variables.
/// Index 0 is the constant monomial; size is C(n+d, d).
class Basis {
  public:
    Basis(int d, int n);

    int dimension() const { return d_; }
    int max_degree() const { return n_; }
    int size() const { return static_cast<int>(ordering_.size()); }
    const std::vector<MultiIndex>& ordering() const { return ordering_; }
    const MultiIndex& monomial(int i) const { return ordering_.at(static_cast<std::size_t>(i)); }

    /// Linear index of a multi-index; throws if out of range.
    int index_of(const MultiIndex& k) const;

  private:
    int d_;
    int n_;
    std::vector<MultiIndex> ordering_;
    std::map<std::vector<int>, int> index_;
};

std::shared_ptr<const Basis> build_basis(int d, int n);

/// Coefficient vector of a polynomial in a fixed basis.
class PolyVec {
  public:
    PolyVec(std::shared_ptr<const Basis> basis, Eigen::VectorXd coeffs);

    /// Zero polynomial in the given basis.
    explicit PolyVec(std::shared_ptr<const Basis> basis);

    const Basis& basis() const { return *basis_; }
    std::shared_ptr<const Basis> basis_ptr() const { return basis_; }
    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    Eigen::VectorXd& coeffs() { return coeffs_; }

    /// Largest total degree carried by a nonzero coefficient.
    int degree() const;

  private:
    std::shared_ptr<const Basis> basis_;
    Eigen::VectorXd coeffs_;
};

/// p(x) = H(x)^T p.
double evaluate(const PolyVec& p, const Eigen::VectorXd& x);

/// Coordinate vector of p*q in the degree-2n basis of the same dimension.
/// Exponent-wise convolution of coefficients; both factors must share a basis.
PolyVec product_vec(const PolyVec& p, const PolyVec& q);

/// Re-expresses p in a larger basis of the same dimension by multi-index
/// lookup (graded-lex positions shift between degrees when d > 1).
PolyVec embed(const PolyVec& p, std::shared_ptr<const Basis> target);

/// Convenience: the monomial x^k as a PolyVec.
PolyVec monomial(std::shared_ptr<const Basis> basis, const MultiIndex& k);

}  // namespace polyfrac
