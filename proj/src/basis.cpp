#include "polyfrac/basis.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace polyfrac {

int MultiIndex::degree() const {
    return std::accumulate(exponents.begin(), exponents.end(), 0);
}

bool grlex_less(const MultiIndex& a, const MultiIndex& b) {
    const int da = a.degree();
    const int db = b.degree();
    if (da != db) return da < db;
    // Within equal degree: first variable most significant, larger exponent first.
    return a.exponents > b.exponents;
}

namespace {

void enumerate_degree(int d, int deg, std::vector<int>& scratch,
                      std::vector<MultiIndex>& out) {
    if (d == 1) {
        scratch.push_back(deg);
        out.push_back(MultiIndex{scratch});
        scratch.pop_back();
        return;
    }
    for (int e = deg; e >= 0; --e) {
        scratch.push_back(e);
        enumerate_degree(d - 1, deg - e, scratch, out);
        scratch.pop_back();
    }
}

}  // namespace

Basis::Basis(int d, int n) : d_(d), n_(n) {
    if (d < 1) throw std::invalid_argument("Basis: dimension must be >= 1");
    if (n < 0) throw std::invalid_argument("Basis: max degree must be >= 0");
    std::vector<int> scratch;
    for (int deg = 0; deg <= n; ++deg) enumerate_degree(d, deg, scratch, ordering_);
    for (int i = 0; i < static_cast<int>(ordering_.size()); ++i)
        index_[ordering_[static_cast<std::size_t>(i)].exponents] = i;
}

int Basis::index_of(const MultiIndex& k) const {
    auto it = index_.find(k.exponents);
    if (it == index_.end())
        throw std::invalid_argument("Basis::index_of: multi-index not in basis");
    return it->second;
}

std::shared_ptr<const Basis> build_basis(int d, int n) {
    return std::make_shared<const Basis>(d, n);
}

PolyVec::PolyVec(std::shared_ptr<const Basis> basis, Eigen::VectorXd coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != basis_->size())
        throw std::invalid_argument("PolyVec: coefficient length does not match basis size");
}

PolyVec::PolyVec(std::shared_ptr<const Basis> basis)
    : basis_(std::move(basis)), coeffs_(Eigen::VectorXd::Zero(basis_->size())) {}

int PolyVec::degree() const {
    int deg = 0;
    for (int i = 0; i < coeffs_.size(); ++i)
        if (coeffs_[i] != 0.0) deg = std::max(deg, basis_->monomial(static_cast<int>(i)).degree());
    return deg;
}

double evaluate(const PolyVec& p, const Eigen::VectorXd& x) {
    const Basis& b = p.basis();
    if (x.size() != b.dimension())
        throw std::invalid_argument("evaluate: state dimension does not match basis");
    double acc = 0.0;
    for (int i = 0; i < b.size(); ++i) {
        const double c = p.coeffs()[i];
        if (c == 0.0) continue;
        double mono = 1.0;
        const auto& k = b.monomial(i).exponents;
        for (int j = 0; j < b.dimension(); ++j)
            mono *= std::pow(x[j], k[static_cast<std::size_t>(j)]);
        acc += c * mono;
    }
    return acc;
}

PolyVec product_vec(const PolyVec& p, const PolyVec& q) {
    if (p.basis_ptr() != q.basis_ptr() &&
        (p.basis().dimension() != q.basis().dimension() ||
         p.basis().max_degree() != q.basis().max_degree()))
        throw std::invalid_argument("product_vec: factors must share a basis");
    const Basis& b = p.basis();
    auto target = build_basis(b.dimension(), 2 * b.max_degree());
    PolyVec out(target);
    for (int i = 0; i < b.size(); ++i) {
        const double ci = p.coeffs()[i];
        if (ci == 0.0) continue;
        for (int j = 0; j < b.size(); ++j) {
            const double cj = q.coeffs()[j];
            if (cj == 0.0) continue;
            MultiIndex k = b.monomial(i);
            const auto& kj = b.monomial(j).exponents;
            for (std::size_t m = 0; m < k.exponents.size(); ++m) k.exponents[m] += kj[m];
            out.coeffs()[target->index_of(k)] += ci * cj;
        }
    }
    return out;
}

PolyVec embed(const PolyVec& p, std::shared_ptr<const Basis> target) {
    const Basis& src = p.basis();
    if (target->dimension() != src.dimension() || target->max_degree() < src.max_degree())
        throw std::invalid_argument("embed: target basis cannot hold the polynomial");
    PolyVec out(target);
    for (int i = 0; i < src.size(); ++i)
        if (p.coeffs()[i] != 0.0) out.coeffs()[target->index_of(src.monomial(i))] = p.coeffs()[i];
    return out;
}

PolyVec monomial(std::shared_ptr<const Basis> basis, const MultiIndex& k) {
    PolyVec out(basis);
    out.coeffs()[basis->index_of(k)] = 1.0;
    return out;
}

}  // namespace polyfrac
