#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ncdf/standard_form.hpp"
#include "ncdf/rng.hpp"

using namespace ncdf;

namespace {

SpacePtr random_space(const AlgebraDescriptor& alg, Rng& rng) {
    std::vector<CMatrix> blocks;
    double total = 0.0;
    for (int n : alg.block_dims) {
        blocks.push_back(rng.density(n));
        total += blocks.back().trace().real();
    }
    for (auto& b : blocks) b /= total;
    return StandardSpace::gns(State::from_density(Element(alg, blocks)));
}

Element random_elem(const AlgebraDescriptor& alg, Rng& rng) {
    std::vector<CMatrix> b;
    for (int n : alg.block_dims) b.push_back(rng.ginibre(n));
    return Element(alg, std::move(b));
}

}  // namespace

TEST_CASE("inner product, J antilinearity, cyclic vector") {
    Rng rng(101);
    AlgebraDescriptor alg({2, 3});
    SpacePtr sp = random_space(alg, rng);
    StdVector xi = StdVector::from_element(random_elem(alg, rng));
    StdVector eta = StdVector::from_element(random_elem(alg, rng));
    // <xi,eta> conjugate symmetric, J is an antilinear isometry with J^2 = 1
    CHECK(std::abs(xi.inner(eta) - std::conj(eta.inner(xi))) < 1e-13);
    CHECK(std::abs(xi.conj_J().norm() - xi.norm()) < 1e-13);
    CHECK((xi.conj_J().conj_J() - xi).norm() < 1e-14);
    cxd s(0.3, -0.8);
    CHECK(((s * xi).conj_J() - std::conj(s) * xi.conj_J()).norm() < 1e-13);
    // omega(x) = <xi_omega, x xi_omega>
    Element x = random_elem(alg, rng);
    CHECK(std::abs(sp->omega(x) - sp->xi_omega().inner(sp->left(x, sp->xi_omega()))) < 1e-13);
    CHECK(std::abs(sp->xi_omega().norm() - 1.0) < 1e-12);
}

TEST_CASE("gns rejects non-faithful states") {
    AlgebraDescriptor alg({2});
    CMatrix r(2, 2);
    r << 1, 0, 0, 0;
    State st{alg, Element(alg, {r}), false};
    CHECK_THROWS(StandardSpace::gns(st));
}

TEST_CASE("left and right actions commute and match J conjugation") {
    Rng rng(102);
    AlgebraDescriptor alg({2, 2});
    SpacePtr sp = random_space(alg, rng);
    Element x = random_elem(alg, rng), y = random_elem(alg, rng);
    StdVector xi = StdVector::from_element(random_elem(alg, rng));
    CHECK((sp->left(x, sp->right(xi, y)) - sp->right(sp->left(x, xi), y)).norm() < 1e-12);
    // right action is J x* J
    StdVector via_j = sp->left(x.adjoint(), xi.conj_J()).conj_J();
    CHECK((via_j - sp->right(xi, x)).norm() < 1e-12);
}

TEST_CASE("modular operator: group law, S-identity, KMS") {
    Rng rng(103);
    for (int n = 2; n <= 4; ++n) {
        AlgebraDescriptor alg({n});
        SpacePtr sp = random_space(alg, rng);
        Element x = random_elem(alg, rng);
        StdVector xi = StdVector::from_element(random_elem(alg, rng));
        // Delta^{z1} Delta^{z2} = Delta^{z1+z2}
        cxd z1(0.3, 0.4), z2(-0.2, 1.1);
        StdVector lhs = sp->modular_power(z1, sp->modular_power(z2, xi));
        StdVector rhs = sp->modular_power(z1 + z2, xi);
        CHECK((lhs - rhs).norm() < 1e-10 * std::max(1.0, rhs.norm()));
        // S = J Delta^{1/2}: J Delta^{1/2}(x xi_omega) = x* xi_omega
        StdVector sx = sp->modular_power(0.5, sp->left(x, sp->xi_omega())).conj_J();
        CHECK((sx - sp->left(x.adjoint(), sp->xi_omega())).norm() < 1e-10);
        // KMS at the modular flow
        Element a = random_elem(alg, rng), b = random_elem(alg, rng);
        CHECK(sp->kms_residual(a, b) < 1e-10 * a.hs_norm() * b.hs_norm() * 100);
        // flow is an automorphism: sigma_t(xy) = sigma_t(x) sigma_t(y)
        Element fx = sp->modular_flow(0.7, x), fa = sp->modular_flow(0.7, a);
        CHECK((sp->modular_flow(0.7, x * a) - fx * fa).hs_norm() < 1e-11);
    }
}

TEST_CASE("matrix-unit flow for diagonal density") {
    for (int n = 2; n <= 4; ++n) {
        AlgebraDescriptor alg({n});
        CMatrix r = CMatrix::Zero(n, n);
        double z = 0.0;
        for (int i = 0; i < n; ++i) z += (i + 1);
        for (int i = 0; i < n; ++i) r(i, i) = double(i + 1) / z;
        SpacePtr sp = StandardSpace::gns(State::from_density(Element(alg, {r})));
        double t = 0.83;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                CMatrix e = CMatrix::Zero(n, n);
                e(j, k) = 1.0;
                Element flowed = sp->modular_flow(t, Element(alg, {e}));
                cxd expect = std::pow(r(j, j).real() / r(k, k).real(), cxd(0, t));
                CHECK(std::abs(flowed.blocks[0](j, k) - expect) < 1e-12);
            }
    }
}

TEST_CASE("cone geometry: split, wedge, diagonal oracle, non-expansive") {
    Rng rng(104);
    AlgebraDescriptor alg({2, 3});
    SpacePtr sp = random_space(alg, rng);
    for (int s = 0; s < 50; ++s) {
        std::vector<CMatrix> b;
        for (int n : alg.block_dims) b.push_back(3.0 * rng.hermitian(n));
        StdVector xi(alg, std::move(b));
        auto [p, m] = sp->positive_parts(xi);
        CHECK(std::abs(p.inner(m)) < 1e-12);
        CHECK((p - m - xi).norm() < 1e-12);
        for (const auto& blk : p.blocks) CHECK(herm_eig(blk).eigenvalues.minCoeff() > -1e-13);
        // wedge idempotence
        StdVector w = sp->wedge(xi);
        CHECK((sp->wedge(w) - w).norm() < 1e-12);
        // non-expansive (projection onto a convex set)
        std::vector<CMatrix> b2;
        for (int n : alg.block_dims) b2.push_back(3.0 * rng.hermitian(n));
        StdVector eta(alg, std::move(b2));
        CHECK((sp->wedge(xi) - sp->wedge(eta)).norm() <= (xi - eta).norm() + 1e-12);
    }
    // explicit split
    CMatrix d(2, 2), z3 = CMatrix::Zero(3, 3);
    d << 3, 0, 0, -2;
    auto [dp, dm] = sp->positive_parts(StdVector(alg, {d, z3}));
    CHECK(dp.blocks[0](0, 0).real() == doctest::Approx(3.0));
    CHECK(dm.blocks[0](1, 1).real() == doctest::Approx(2.0));
    // wedge rejects non-J-real input
    std::vector<CMatrix> nb;
    for (int n : alg.block_dims) nb.push_back(rng.ginibre(n));
    CHECK_THROWS(sp->wedge(StdVector(alg, nb)));
}

TEST_CASE("commutative diagonal wedge equals entrywise min") {
    Rng rng(105);
    AlgebraDescriptor alg(std::vector<int>(5, 1));
    SpacePtr sp = random_space(alg, rng);
    std::vector<CMatrix> b;
    for (int i = 0; i < 5; ++i) b.push_back(CMatrix::Constant(1, 1, 3.0 * rng.normal()));
    StdVector xi(alg, b);
    StdVector w = sp->wedge(xi);
    for (int i = 0; i < 5; ++i) {
        double expect = std::min(b[i](0, 0).real(), sp->xi_omega().blocks[i](0, 0).real());
        CHECK(std::abs(w.blocks[i](0, 0).real() - expect) < 1e-12);
    }
}

TEST_CASE("symmetric embedding and its order properties") {
    Rng rng(106);
    AlgebraDescriptor alg({3});
    SpacePtr sp = random_space(alg, rng);
    Element x = random_elem(alg, rng);
    CHECK((sp->embed_inverse(sp->embed_i(x)) - x).hs_norm() < 1e-11);
    // i_omega maps positive elements into the cone and 1 to xi_omega
    Element psd = x.adjoint() * x;
    StdVector img = sp->embed_i(psd);
    for (const auto& blk : img.blocks) CHECK(herm_eig(blk).eigenvalues.minCoeff() > -1e-13);
    CHECK((sp->embed_i(Element::identity(alg)) - sp->xi_omega()).norm() < 1e-12);
}

TEST_CASE("vec basis: round trip, action superoperators, functional J") {
    Rng rng(107);
    AlgebraDescriptor alg({2, 3});
    SpacePtr sp = random_space(alg, rng);
    StdVector xi = StdVector::from_element(random_elem(alg, rng));
    CHECK((sp->unvec(sp->vec(xi)) - xi).norm() < 1e-14);
    Element x = random_elem(alg, rng);
    CHECK((sp->vec(sp->left(x, xi)) - sp->left_super(x) * sp->vec(xi)).norm() < 1e-12);
    CHECK((sp->vec(sp->right(xi, x)) - sp->right_super(x) * sp->vec(xi)).norm() < 1e-12);
    CHECK((sp->apply_J(sp->vec(xi)) - sp->vec(xi.conj_J())).norm() < 1e-14);
}
