#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ncdf/spin.hpp"

using namespace ncdf;

TEST_CASE("hamiltonian: small-chain oracles") {
    // L=1: H = h sigma_3
    SpinChainSpec s1;
    s1.l_sites = 1;
    s1.field = 0.7;
    Element h1 = hamiltonian(s1);
    CHECK((h1.blocks[0] - 0.7 * detail::pauli(3)).norm() < 1e-14);

    // L=2, h=0, J(1)=1: singlet/triplet spectrum {-3, 1, 1, 1}
    SpinChainSpec s2;
    s2.l_sites = 2;
    s2.couplings = {1.0};
    Element h2 = hamiltonian(s2);
    CHECK(h2.is_hermitian(1e-14));
    RVector ev = herm_eig(h2.blocks[0]).eigenvalues;
    CHECK(ev[0] == doctest::Approx(-3.0));
    for (int i = 1; i < 4; ++i) CHECK(ev[i] == doctest::Approx(1.0));

    // periodic L=3 nearest-neighbor: each bond appears once (3 bonds)
    SpinChainSpec s3;
    s3.l_sites = 3;
    s3.couplings = {1.0};
    s3.boundary = Boundary::periodic;
    Element h3 = hamiltonian(s3);
    // trace of H^2 = sum over bonds of Tr((sum_i s_i s_i)^2) = bonds * 3 * dim
    CHECK((h3 * h3).trace().real() == doctest::Approx(3 * 3 * 8));
    CHECK_THROWS(hamiltonian(SpinChainSpec{11, {}, 0.0, Boundary::open_chain, 1.0}));
}

TEST_CASE("kms state and audit") {
    SpinChainSpec spec;
    spec.l_sites = 2;
    spec.couplings = {0.6};
    spec.field = 0.4;
    for (double beta : {0.2, 1.0}) {
        KmsAudit audit = kms_audit(spec, beta, 15, 7);
        CHECK(audit.kms_residual < 1e-10);
        CHECK(audit.flow_relation_residual < 1e-10);
    }
    // beta -> 0: rho -> I / 2^L
    State tiny = kms_state(spec, 1e-13);
    CHECK((tiny.rho.blocks[0] - CMatrix::Identity(4, 4) / 4.0).norm() < 1e-12);
    CHECK_THROWS(kms_state(spec, 0.0));
}

TEST_CASE("gauss-legendre quadrature") {
    Quadrature q = gauss_legendre(16, 1.0);
    double s = q.weights.sum();
    CHECK(s == doctest::Approx(2.0).epsilon(1e-13));
    // integrates polynomials up to degree 31 exactly: try x^8
    double v = 0.0;
    for (int i = 0; i < 16; ++i) v += q.weights[i] * std::pow(q.nodes[i], 8);
    CHECK(v == doctest::Approx(2.0 / 9.0).epsilon(1e-13));
    CHECK_THROWS(gauss_legendre(4, 1.0));
}

TEST_CASE("park form: conservativity, quadrature convergence, markovianity") {
    SpinChainSpec spec;
    spec.l_sites = 2;
    spec.couplings = {0.25};
    spec.field = 0.25;
    double beta = 1.0;
    FormOperator f = park_form(spec, beta, {0, 1});
    const auto& sp = f.space();
    // kernel contains xi_omega essentially exactly
    CHECK((f.generator() * sp.vec(sp.xi_omega())).norm() < 1e-12);
    CHECK(f.evaluate(sp.xi_omega()) < 1e-12);

    // Richardson: doubling Q converges geometrically until the rounding floor
    ParkOptions o64, o128, o256, o512;
    o64.nodes = 64;
    o128.nodes = 128;
    o256.nodes = 256;
    o512.nodes = 512;
    CMatrix l64 = park_form(spec, beta, {0, 1}, o64).generator();
    CMatrix l128 = park_form(spec, beta, {0, 1}, o128).generator();
    CMatrix l256 = park_form(spec, beta, {0, 1}, o256).generator();
    CMatrix l512 = park_form(spec, beta, {0, 1}, o512).generator();
    double d1 = (l128 - l64).norm(), d2 = (l256 - l128).norm(), d3 = (l512 - l256).norm();
    CHECK(d1 / d2 > 10.0);
    // at the default node count a further doubling is below 1e-10
    CHECK(d3 < 1e-10);

    // full Markovianity battery
    VerificationReport mk = run_markov_suite(f, 29, 40);
    for (const auto& c : mk.checks) {
        INFO(c.name, " worst=", c.worst);
        CHECK(c.pass);
    }

    // tail refusal for too-small truncation window mentions a suggested T
    ParkOptions tiny;
    tiny.truncation = 0.5;
    CHECK_THROWS_WITH_AS(park_form(spec, beta, {0, 1}, tiny),
                         doctest::Contains("use T >="), std::invalid_argument);
}

TEST_CASE("park form: beta -> 0 reduces to half the commutator form") {
    SpinChainSpec spec;
    spec.l_sites = 2;
    spec.couplings = {0.3};
    spec.field = 0.2;
    FormOperator ref = park_trace_limit_reference(spec, {0, 1});
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {1e-1, 1e-2, 1e-3, 1e-4}) {
        CMatrix lp = park_form(spec, beta, {0, 1}).generator();
        double gap = (lp - 0.5 * ref.generator()).norm();
        // O(beta) rate: each decade shrinks the gap about tenfold
        CHECK(gap < prev * 0.2);
        prev = gap;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("ergodicity: full family ergodic, sigma_z restriction is not") {
    SpinChainSpec spec;
    spec.l_sites = 1;
    spec.field = 0.5;
    FormOperator full = park_form(spec, 1.0, {0});
    ErgodicityReport r1 = ergodicity_check(full);
    CHECK(r1.kernel_dim == 1);
    CHECK(r1.ergodic);

    ParkOptions zonly;
    zonly.pauli_indices = {0, 3};
    FormOperator restricted = park_form(spec, 1.0, {0}, zonly);
    ErgodicityReport r2 = ergodicity_check(restricted);
    CHECK(r2.kernel_dim > 1);
    CHECK_FALSE(r2.ergodic);

    // L=2 full form ergodic
    SpinChainSpec s2;
    s2.l_sites = 2;
    s2.couplings = {0.4};
    s2.field = 0.3;
    ErgodicityReport r3 = ergodicity_check(park_form(s2, 1.0, {0, 1}));
    CHECK(r3.kernel_dim == 1);
}

TEST_CASE("interaction norm diagnostics") {
    SpinChainSpec h_only;
    h_only.l_sites = 3;
    h_only.field = 0.7;
    PhiNormReport r = phi_norm(h_only, 1.0);
    CHECK(r.value == doctest::Approx(4.0 * 0.7));

    SpinChainSpec nn;
    nn.l_sites = 3;
    nn.couplings = {0.5};
    PhiNormReport r2 = phi_norm(nn, 1.0);
    // middle site has two neighbors: 2 * (2 * 16 * e * 3 * 0.5)
    CHECK(r2.value == doctest::Approx(2.0 * 2.0 * 16.0 * std::exp(1.0) * 3.0 * 0.5));
    // threshold decreases as lambda -> 0 (numerator wins near 0)
    CHECK(phi_norm(nn, 0.1).beta_threshold < phi_norm(nn, 1.0).beta_threshold);
    CHECK_THROWS(phi_norm(nn, 0.0));
}
