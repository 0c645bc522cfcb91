#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ncdf/numeric.hpp"
#include "ncdf/rng.hpp"

using namespace ncdf;

TEST_CASE("tolerance policy ordering is enforced") {
    TolerancePolicy t = default_tols();
    CHECK_NOTHROW(t.validate());
    t.tol_psd = 1e-13;  // below tol_eig
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("herm_eig reconstructs and orders") {
    Rng rng(7);
    CMatrix h = 5.0 * rng.hermitian(6);
    HermEig e = herm_eig(h);
    CMatrix rec = e.eigenvectors *
                  e.eigenvalues.cast<cxd>().asDiagonal() * e.eigenvectors.adjoint();
    CHECK((rec - 0.5 * (h + h.adjoint())).norm() < 1e-12 * std::max(1.0, h.norm()));
    for (int i = 1; i < 6; ++i) CHECK(e.eigenvalues[i] >= e.eigenvalues[i - 1]);
    CHECK((e.eigenvectors.adjoint() * e.eigenvectors - CMatrix::Identity(6, 6)).norm() < 1e-12);
}

TEST_CASE("herm_eig rejects bad input") {
    CHECK_THROWS(herm_eig(CMatrix::Zero(2, 3)));
    CMatrix bad = CMatrix::Zero(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(herm_eig(bad));
}

TEST_CASE("mat_power respects functional calculus") {
    Rng rng(11);
    CMatrix g = rng.ginibre(5);
    CMatrix p = g * g.adjoint() + 0.1 * CMatrix::Identity(5, 5);
    CMatrix h = mat_power(p, 0.5);
    CHECK((h * h - p).norm() < 1e-10 * p.norm());
    CMatrix inv = mat_power(p, -1.0);
    CHECK((inv * p - CMatrix::Identity(5, 5)).norm() < 1e-10);
    // complex exponent: p^{i} is unitary for PSD p
    CMatrix u = mat_power(p, cxd(0, 1));
    CHECK((u * u.adjoint() - CMatrix::Identity(5, 5)).norm() < 1e-10);
    // negative spectrum rejected for non-integer exponents
    CMatrix neg = -p;
    CHECK_THROWS(mat_power(neg, 0.5));
    CHECK_NOTHROW(mat_power(neg, 2.0));
}

TEST_CASE("vectorize/devectorize round trip and kron identity") {
    Rng rng(13);
    CMatrix a = rng.ginibre(3), x = rng.ginibre(3), b = rng.ginibre(3);
    CVector v = vectorize(x);
    CHECK((devectorize(v, 3, 3) - x).norm() == 0.0);
    // vec(A X B) = (B^T (x) A) vec(X), column-major stacking
    CVector lhs = vectorize(a * x * b);
    CVector rhs = kron(b.transpose(), a) * v;
    CHECK((lhs - rhs).norm() < 1e-12 * std::max(1.0, lhs.norm()));
    CHECK((left_mult_op(a) * v - vectorize(a * x)).norm() < 1e-12);
    CHECK((right_mult_op(b) * v - vectorize(x * b)).norm() < 1e-12);
}

TEST_CASE("op_norm matches the largest singular value") {
    CMatrix d = CMatrix::Zero(3, 3);
    d(0, 0) = 2.0;
    d(1, 1) = -5.0;
    CHECK(op_norm(d) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("rng determinism and haar unitarity") {
    Rng a(42), b(42);
    CHECK(a.normal() == b.normal());
    CHECK(a.next_seed() == b.next_seed());
    Rng rng(5);
    CMatrix u = rng.haar_unitary(4);
    CHECK((u * u.adjoint() - CMatrix::Identity(4, 4)).norm() < 1e-12);
    CMatrix rho = rng.density(4);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
    CHECK(herm_eig(rho).eigenvalues.minCoeff() > 0.0);
}
