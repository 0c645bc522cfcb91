#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ncdf/builders.hpp"

using namespace ncdf;

namespace {

CMatrix sigma(int j) { return detail::pauli(j); }

FormOperator pauli_form() {
    AlgebraDescriptor alg = AlgebraDescriptor::full(2);
    return elementary_trace_form(
        alg, {Element(alg, {sigma(1)}), Element(alg, {sigma(2)}), Element(alg, {sigma(3)})});
}

}  // namespace

TEST_CASE("form operator basics") {
    FormOperator f = pauli_form();
    CHECK(f.dim() == 4);
    CHECK(f.herm_defect() < 1e-14);
    // spectrum of the three-Pauli commutator form: {0, 8, 8, 8}
    RVector ev = f.eig().eigenvalues;
    CHECK(std::abs(ev[0]) < 1e-12);
    for (int i = 1; i < 4; ++i) CHECK(ev[i] == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(f.scale() == doctest::Approx(8.0));
    // evaluate agrees with the bilinear diagonal and with first differences
    const auto& sp = f.space();
    Rng rng(1);
    StdVector xi = random_j_real(sp, rng);
    CHECK(f.evaluate(xi) == doctest::Approx(f.bilinear(xi, xi).real()).epsilon(1e-12));
    CHECK(f.first_difference_error(xi, 1e-6) < 1e-4);
    CHECK_THROWS(f.semigroup(-1.0));
    // non-symmetric input is symmetrized and the defect recorded
    CMatrix L = f.generator();
    L(0, 1) += cxd(0.0, 0.3);
    FormOperator g(f.space_ptr(), L, "test");
    CHECK(g.herm_defect() > 1e-3);
    CHECK(herm_residual(g.generator()) < 1e-14);
}

TEST_CASE("markov suite passes for the pauli commutator form") {
    FormOperator f = pauli_form();
    VerificationReport rep = run_markov_suite(f, 1, 100);
    for (const auto& c : rep.checks) {
        INFO(c.name, " worst=", c.worst);
        CHECK(c.pass);
    }
    CHECK(rep.find("contractivity") != nullptr);
}

TEST_CASE("negated generator fails with a wedge witness") {
    FormOperator f = pauli_form();
    FormOperator neg(f.space_ptr(), CMatrix(-f.generator()), "negated control");
    VerificationReport rep = run_markov_suite(neg, 1, 100);
    CHECK_FALSE(rep.all_pass());
    const CheckResult* wedge = rep.find("wedge_contraction");
    REQUIRE(wedge != nullptr);
    CHECK_FALSE(wedge->pass);
    CHECK_FALSE(wedge->details.is_null());  // witness serialized
    // the equivalence audit still holds: semigroup criteria fail too
    CHECK(rep.find("equivalence_audit")->pass);
}

TEST_CASE("choi matrix detects a non-CP positive map") {
    // transpose map on M2: positive but not completely positive; L = I - Theta
    // in the vec basis, where Theta(vec X) = vec(X^T) is the swap
    AlgebraDescriptor alg = AlgebraDescriptor::full(2);
    SpacePtr sp = StandardSpace::gns(State::trace_state(alg));
    CMatrix swap = CMatrix::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CMatrix e = CMatrix::Zero(2, 2);
            e(i, j) = 1.0;
            swap.col(j * 2 + i) = vectorize(CMatrix(e.transpose()));
        }
    CMatrix L = CMatrix::Identity(4, 4) - swap;
    FormOperator f(sp, L, "transpose-penalizing control");
    CheckResult choi = check_choi_cp(f, {2.0});
    CHECK_FALSE(choi.pass);
    // yet the semigroup preserves positivity (Hermitian-spectrum calculus)
    CheckResult pp = check_positivity_preserving(f, {2.0}, 50, 3);
    CHECK(pp.pass);
}

TEST_CASE("first BD criterion is skipped for non-conservative forms") {
    AlgebraDescriptor alg = AlgebraDescriptor::full(2);
    auto [f, rep] = derivation_trace_form(alg, {Element(alg, {sigma(1)})},
                                          Element::identity(alg));
    CHECK(rep.killing_psd);
    CheckResult bd = check_first_bd(f, 10, 5);
    CHECK(bd.pass);
    CHECK(bd.details.contains("skipped"));
}

TEST_CASE("ampliation reproduces the generator on each matrix entry") {
    FormOperator f = pauli_form();
    FormOperator f2 = ampliation_form(f, 2);
    CHECK(f2.dim() == 16);
    // spectrum is four copies of the original
    RVector ev = f2.eig().eigenvalues;
    int zeros = 0, eights = 0;
    for (int i = 0; i < 16; ++i) {
        if (std::abs(ev[i]) < 1e-10) ++zeros;
        if (std::abs(ev[i] - 8.0) < 1e-10) ++eights;
    }
    CHECK(zeros == 4);
    CHECK(eights == 12);
    // complete Dirichlet property survives the ampliation
    VerificationReport rep = run_markov_suite(f2, 2, 40);
    for (const auto& c : rep.checks) {
        INFO(c.name, " worst=", c.worst);
        CHECK(c.pass);
    }
}

TEST_CASE("j-real check flags a complex-structure-breaking generator") {
    AlgebraDescriptor alg = AlgebraDescriptor::full(2);
    SpacePtr sp = StandardSpace::gns(State::trace_state(alg));
    // Hermitian PSD but J L J != L: it treats e21 and e12 differently
    CMatrix L = CMatrix::Zero(4, 4);
    L(1, 1) = 1.0;
    L(2, 2) = 2.0;
    FormOperator f(sp, L, "control");
    CHECK_FALSE(check_j_real(f).pass);
    CHECK(check_j_real(pauli_form()).pass);
}

TEST_CASE("coarse state: convergence of Phi_t to the product target") {
    FormOperator f = pauli_form();
    // x = y so the spectral-gap component of Phi_t is strictly positive and
    // the convergence is nontrivial
    Element x = Element::identity(f.space().alg) + 0.2 * Element(f.space().alg, {sigma(1)});
    Element y = x;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 6; ++k) {
        double t = std::pow(2.0, -k);
        CoarseState cs = coarse_state(f, t);
        CHECK(cs.psd_margin > -1e-12);
        double gap = std::abs(cs.phi(x, y) - cs.limit_target(x, y));
        CHECK(gap <= prev + 1e-14);
        prev = gap;
    }
    CHECK(prev < 1e-2);
    // non-conservative form refused
    AlgebraDescriptor alg = AlgebraDescriptor::full(2);
    auto [killed, rep] = derivation_trace_form(alg, {}, Element::identity(alg));
    (void)rep;
    CHECK_THROWS(coarse_state(killed, 0.5));
}

TEST_CASE("lifted semigroup is unital and state preserving for conservative forms") {
    FormOperator f = pauli_form();
    const auto& sp = f.space();
    Element one = Element::identity(sp.alg);
    for (double t : {0.1, 1.0}) {
        CHECK((f.lift_to_algebra(t, one) - one).hs_norm() < 1e-12);
        Rng rng(4);
        Element x = random_element(sp, rng);
        CHECK(std::abs(sp.omega(f.lift_to_algebra(t, x)) - sp.omega(x)) < 1e-12);
    }
}
