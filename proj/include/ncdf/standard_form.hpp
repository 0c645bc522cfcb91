#pragma once

// Standard form (M, L^2(M, omega), P, J) of a block algebra with a faithful
// state: modular operator/flow, modular conjugation, cone geometry (positive
// parts, wedge), symmetric embeddings, and KMS residuals. The cone P is the
// blockwise PSD cone and J is the blockwise conjugate transpose.

#include "ncdf/algebra.hpp"

#include <memory>

namespace ncdf {

struct StdVector {
    AlgebraDescriptor alg;
    std::vector<CMatrix> blocks;

    StdVector(AlgebraDescriptor a, std::vector<CMatrix> b)
        : alg(std::move(a)), blocks(std::move(b)) {
        if (static_cast<int>(blocks.size()) != alg.blocks())
            throw std::invalid_argument("StdVector: block count mismatch");
        for (int k = 0; k < alg.blocks(); ++k)
            if (blocks[k].rows() != alg.block_dims[k] || blocks[k].cols() != alg.block_dims[k])
                throw std::invalid_argument("StdVector: block shape mismatch");
    }

    static StdVector zero(const AlgebraDescriptor& a) {
        std::vector<CMatrix> b;
        for (int n : a.block_dims) b.push_back(CMatrix::Zero(n, n));
        return StdVector(a, std::move(b));
    }

    static StdVector from_element(const Element& x) { return StdVector(x.alg, x.blocks); }

    Element as_element() const { return Element(alg, blocks); }

    cxd inner(const StdVector& o) const {
        cxd s = 0.0;
        for (size_t k = 0; k < blocks.size(); ++k)
            s += (blocks[k].adjoint() * o.blocks[k]).trace();
        return s;
    }

    double norm() const { return std::sqrt(std::max(0.0, inner(*this).real())); }

    // Modular conjugation J: blockwise conjugate transpose (antilinear).
    StdVector conj_J() const {
        std::vector<CMatrix> b;
        for (const auto& m : blocks) b.push_back(m.adjoint());
        return StdVector(alg, std::move(b));
    }

    bool is_j_real(double tol) const {
        double scale = std::max(1.0, norm());
        for (const auto& m : blocks)
            if (herm_residual(m) > tol * scale) return false;
        return true;
    }
};

inline StdVector operator+(const StdVector& a, const StdVector& b) {
    std::vector<CMatrix> out;
    for (size_t k = 0; k < a.blocks.size(); ++k) out.push_back(a.blocks[k] + b.blocks[k]);
    return StdVector(a.alg, std::move(out));
}

inline StdVector operator-(const StdVector& a, const StdVector& b) {
    std::vector<CMatrix> out;
    for (size_t k = 0; k < a.blocks.size(); ++k) out.push_back(a.blocks[k] - b.blocks[k]);
    return StdVector(a.alg, std::move(out));
}

inline StdVector operator*(cxd s, const StdVector& a) {
    std::vector<CMatrix> out;
    for (const auto& m : a.blocks) out.push_back(s * m);
    return StdVector(a.alg, std::move(out));
}

class StandardSpace {
public:
    AlgebraDescriptor alg;
    State state;

    // GNS construction for a faithful state on a block algebra.
    static std::shared_ptr<const StandardSpace> gns(const State& s) {
        return std::shared_ptr<const StandardSpace>(new StandardSpace(s));
    }

    int l2_dim() const { return alg.l2_dim(); }

    const StdVector& xi_omega() const { return xi_omega_; }

    cxd omega(const Element& x) const {
        cxd s = 0.0;
        for (size_t k = 0; k < x.blocks.size(); ++k)
            s += (state.rho.blocks[k] * x.blocks[k]).trace();
        return s;
    }

    StdVector left(const Element& x, const StdVector& xi) const {
        std::vector<CMatrix> out;
        for (size_t k = 0; k < xi.blocks.size(); ++k) out.push_back(x.blocks[k] * xi.blocks[k]);
        return StdVector(alg, std::move(out));
    }

    // Right action xi * x = J x* J xi, which is the matrix product xi x.
    StdVector right(const StdVector& xi, const Element& x) const {
        std::vector<CMatrix> out;
        for (size_t k = 0; k < xi.blocks.size(); ++k) out.push_back(xi.blocks[k] * x.blocks[k]);
        return StdVector(alg, std::move(out));
    }

    // rho^z blockwise for complex z (principal branch).
    std::vector<CMatrix> rho_power(cxd z) const {
        std::vector<CMatrix> out;
        for (size_t k = 0; k < rho_eig_.size(); ++k) {
            const HermEig& e = rho_eig_[k];
            CVector d(e.eigenvalues.size());
            for (Eigen::Index i = 0; i < d.size(); ++i)
                d[i] = std::exp(z * std::log(e.eigenvalues[i]));
            out.push_back(e.eigenvectors * d.asDiagonal() * e.eigenvectors.adjoint());
        }
        return out;
    }

    // Delta^z xi = rho^z xi rho^{-z}.
    StdVector modular_power(cxd z, const StdVector& xi) const {
        auto p = rho_power(z);
        auto q = rho_power(-z);
        std::vector<CMatrix> out;
        for (size_t k = 0; k < xi.blocks.size(); ++k) out.push_back(p[k] * xi.blocks[k] * q[k]);
        return StdVector(alg, std::move(out));
    }

    // sigma_z(x) = rho^{iz} x rho^{-iz}; real z is the modular flow, complex z
    // its analytic continuation (sigma_{-i/2}, sigma_{t-i/4}, ...).
    Element modular_flow(cxd z, const Element& x) const {
        auto p = rho_power(cxd(0, 1) * z);
        auto q = rho_power(cxd(0, -1) * z);
        std::vector<CMatrix> out;
        for (size_t k = 0; k < x.blocks.size(); ++k) out.push_back(p[k] * x.blocks[k] * q[k]);
        return Element(alg, std::move(out));
    }

    // |omega(a sigma_{-i}(b)) - omega(b a)|.
    double kms_residual(const Element& a, const Element& b) const {
        Element bb = modular_flow(cxd(0, -1), b);
        return std::abs(omega(a * bb) - omega(b * a));
    }

    // Spectral split of a J-real vector: xi = xi_plus - xi_minus, both PSD,
    // orthogonal. This is the Hilbert projection onto the PSD cone.
    std::pair<StdVector, StdVector> positive_parts(const StdVector& xi) const {
        require_j_real(xi, "positive_parts");
        std::vector<CMatrix> plus, minus;
        for (const auto& m : xi.blocks) {
            HermEig e = herm_eig(m);
            RVector dp = e.eigenvalues.cwiseMax(0.0);
            RVector dm = (-e.eigenvalues).cwiseMax(0.0);
            plus.push_back(e.eigenvectors * dp.asDiagonal().toDenseMatrix().cast<cxd>() *
                           e.eigenvectors.adjoint());
            minus.push_back(e.eigenvectors * dm.asDiagonal().toDenseMatrix().cast<cxd>() *
                            e.eigenvectors.adjoint());
        }
        return {StdVector(alg, std::move(plus)), StdVector(alg, std::move(minus))};
    }

    // xi wedge xi_omega = xi_omega - (xi_omega - xi)_plus: the Hilbert
    // projection onto {eta J-real : eta <= xi_omega}.
    StdVector wedge(const StdVector& xi) const {
        require_j_real(xi, "wedge");
        auto [plus, minus] = positive_parts(xi_omega_ - xi);
        (void)minus;
        return xi_omega_ - plus;
    }

    // Symmetric embedding i_omega(x) = Delta^{1/4} x xi_omega = rho^{1/4} x rho^{1/4}.
    StdVector embed_i(const Element& x) const {
        std::vector<CMatrix> out;
        for (size_t k = 0; k < x.blocks.size(); ++k)
            out.push_back(rho_q_[k] * x.blocks[k] * rho_q_[k]);
        return StdVector(alg, std::move(out));
    }

    Element embed_inverse(const StdVector& xi) const {
        std::vector<CMatrix> out;
        for (size_t k = 0; k < xi.blocks.size(); ++k)
            out.push_back(rho_qi_[k] * xi.blocks[k] * rho_qi_[k]);
        return Element(alg, std::move(out));
    }

    // --- vectorize basis ---------------------------------------------------
    // Blocks are column-stacked in order; this is the basis every D x D
    // superoperator (FormOperator) lives in.

    CVector vec(const StdVector& xi) const {
        CVector out(l2_dim());
        int off = 0;
        for (const auto& m : xi.blocks) {
            out.segment(off, m.size()) = vectorize(m);
            off += static_cast<int>(m.size());
        }
        return out;
    }

    StdVector unvec(const CVector& v) const {
        std::vector<CMatrix> out;
        int off = 0;
        for (int n : alg.block_dims) {
            out.push_back(devectorize(v.segment(off, n * n), n, n));
            off += n * n;
        }
        return StdVector(alg, std::move(out));
    }

    // D x D superoperators of the left/right actions (block diagonal).
    CMatrix left_super(const Element& x) const {
        return block_diag_super([&](int k) { return left_mult_op(x.blocks[k]); });
    }

    CMatrix right_super(const Element& x) const {
        return block_diag_super([&](int k) { return right_mult_op(x.blocks[k]); });
    }

    // Apply J in the vectorize basis (antilinear, so a function not a matrix).
    CVector apply_J(const CVector& v) const { return vec(unvec(v).conj_J()); }

private:
    explicit StandardSpace(const State& s)
        : alg(s.alg), state(s), xi_omega_(StdVector::zero(s.alg)) {
        for (const auto& m : s.rho.blocks) {
            HermEig e = herm_eig(m);
            if (e.eigenvalues.minCoeff() <= 0.0)
                throw std::invalid_argument("StandardSpace: state not faithful");
            rho_eig_.push_back(std::move(e));
        }
        auto half = rho_power(0.5);
        xi_omega_ = StdVector(alg, half);
        rho_q_ = rho_power(0.25);
        rho_qi_ = rho_power(-0.25);
    }

    void require_j_real(const StdVector& xi, const char* who) const {
        if (xi.alg != alg) throw std::invalid_argument(std::string(who) + ": wrong space");
        if (!xi.is_j_real(1e-8))
            throw std::invalid_argument(std::string(who) + ": input not J-real");
    }

    template <typename F>
    CMatrix block_diag_super(F&& f) const {
        CMatrix out = CMatrix::Zero(l2_dim(), l2_dim());
        int off = 0;
        for (int k = 0; k < alg.blocks(); ++k) {
            int d = alg.block_dims[k] * alg.block_dims[k];
            out.block(off, off, d, d) = f(k);
            off += d;
        }
        return out;
    }

    StdVector xi_omega_;
    std::vector<HermEig> rho_eig_;
    std::vector<CMatrix> rho_q_, rho_qi_;
};

using SpacePtr = std::shared_ptr<const StandardSpace>;

}  // namespace ncdf
