#pragma once

// Dense complex linear algebra kernels shared by every other module:
// Hermitian eigendecomposition, spectral functional calculus, and the
// column-stacking vectorization that turns matrix maps into superoperators.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace ncdf {

using cxd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Tolerance tiers: tol_eig for identities that hold to rounding, tol_psd for
// PSD cone membership, tol_prop for sampled property tests. All are applied
// relative to the scale of the quantity under test.
struct TolerancePolicy {
    double tol_eig = 1e-12;
    double tol_psd = 1e-10;
    double tol_prop = 1e-8;

    void validate() const {
        if (!(tol_eig > 0.0 && tol_psd > 0.0 && tol_prop > 0.0))
            throw std::invalid_argument("TolerancePolicy: tolerances must be positive");
        if (!(tol_eig <= tol_psd && tol_psd <= tol_prop))
            throw std::invalid_argument("TolerancePolicy: expected tol_eig <= tol_psd <= tol_prop");
    }
};

inline const TolerancePolicy& default_tols() {
    static const TolerancePolicy t{};
    return t;
}

inline void require_square(const CMatrix& a, const char* who) {
    if (a.rows() != a.cols())
        throw std::invalid_argument(std::string(who) + ": matrix must be square");
}

inline void require_finite(const CMatrix& a, const char* who) {
    if (!a.allFinite())
        throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
}

inline double fro_norm(const CMatrix& a) { return a.norm(); }

struct HermEig {
    RVector eigenvalues;   // ascending
    CMatrix eigenvectors;  // columns, orthonormal
};

// Eigendecomposition of (A + A*)/2. Symmetrizing first makes the result
// well defined for inputs that are Hermitian only up to roundoff; callers
// that need to detect genuinely non-Hermitian input check the residual
// themselves.
inline HermEig herm_eig(const CMatrix& a) {
    require_square(a, "herm_eig");
    require_finite(a, "herm_eig");
    CMatrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("herm_eig: eigensolver failed to converge");
    return HermEig{solver.eigenvalues(), solver.eigenvectors()};
}

inline double herm_residual(const CMatrix& a) {
    return 0.5 * (a - a.adjoint()).norm();
}

// f(A) for Hermitian A via the spectral theorem.
inline CMatrix mat_fn(const CMatrix& a, const std::function<double(double)>& f) {
    HermEig e = herm_eig(a);
    RVector d(e.eigenvalues.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = f(e.eigenvalues[i]);
    return e.eigenvectors * d.asDiagonal() * e.eigenvectors.adjoint();
}

inline CMatrix mat_fn_cx(const CMatrix& a, const std::function<cxd(double)>& f) {
    HermEig e = herm_eig(a);
    CVector d(e.eigenvalues.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = f(e.eigenvalues[i]);
    return e.eigenvectors * d.asDiagonal() * e.eigenvectors.adjoint();
}

// A^z for Hermitian positive A, principal branch. The positivity floor guards
// against silently exponentiating a zero or negative eigenvalue; powers with
// nonnegative integer exponent never need it.
inline CMatrix mat_power(const CMatrix& a, cxd z, double floor_ratio = 0.0) {
    HermEig e = herm_eig(a);
    const double lmax = e.eigenvalues.size() ? e.eigenvalues.maxCoeff() : 0.0;
    bool needs_positive = !(z.imag() == 0.0 && z.real() >= 0.0 &&
                            z.real() == std::floor(z.real()));
    if (needs_positive) {
        const double floor = std::max(floor_ratio * lmax,
                                      std::numeric_limits<double>::min());
        if (e.eigenvalues.size() == 0 || e.eigenvalues.minCoeff() <= floor)
            throw std::domain_error("mat_power: spectrum not strictly positive");
    }
    CVector d(e.eigenvalues.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        double l = e.eigenvalues[i];
        if (needs_positive)
            d[i] = std::exp(z * std::log(l));
        else
            d[i] = (z == cxd(0.0, 0.0)) ? cxd(1.0, 0.0) : cxd(std::pow(l, z.real()), 0.0);
    }
    return e.eigenvectors * d.asDiagonal() * e.eigenvectors.adjoint();
}

// Column-stacking vectorization: vec(X)(i + rows*j) = X(i, j), so that
// vec(A X B) = (B^T kron A) vec(X).
inline CVector vectorize(const CMatrix& x) {
    return Eigen::Map<const CVector>(x.data(), x.size());
}

inline CMatrix devectorize(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols)
        throw std::invalid_argument("devectorize: size mismatch");
    return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Superoperator of X -> M X on n x n matrices (n inferred from M).
inline CMatrix left_mult_op(const CMatrix& m) {
    require_square(m, "left_mult_op");
    return kron(CMatrix::Identity(m.rows(), m.cols()), m);
}

// Superoperator of X -> X M.
inline CMatrix right_mult_op(const CMatrix& m) {
    require_square(m, "right_mult_op");
    return kron(m.transpose(), CMatrix::Identity(m.rows(), m.cols()));
}

inline double op_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues()[0];
}

}  // namespace ncdf
