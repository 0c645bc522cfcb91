#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ncdf/algebra.hpp"
#include "ncdf/rng.hpp"

using namespace ncdf;

TEST_CASE("descriptor dimensions") {
    AlgebraDescriptor a({2, 3});
    CHECK(a.blocks() == 2);
    CHECK(a.l2_dim() == 13);
    CHECK(a.embed_dim() == 5);
    CHECK_THROWS(AlgebraDescriptor({}));
    CHECK_THROWS(AlgebraDescriptor({2, 0}));
}

TEST_CASE("element algebra and embedding round trip") {
    AlgebraDescriptor a({2, 3});
    Rng rng(3);
    Element x(a, {rng.ginibre(2), rng.ginibre(3)});
    Element y(a, {rng.ginibre(2), rng.ginibre(3)});
    // *-algebra identities
    CHECK(((x * y).adjoint() - y.adjoint() * x.adjoint()).hs_norm() < 1e-13);
    CHECK(std::abs((x * y).trace() - (y * x).trace()) < 1e-13);
    // embed is an isomorphism onto the block diagonal
    CMatrix big = (x * y).embed();
    CHECK((big - x.embed() * y.embed()).norm() < 1e-13);
    Element back = Element::from_embed(a, big);
    CHECK((back - x * y).hs_norm() < 1e-13);
    // C*-norm of a direct sum is the max over blocks
    Element d(a, {2.0 * CMatrix::Identity(2, 2), 7.0 * CMatrix::Identity(3, 3)});
    CHECK(d.op_norm() == doctest::Approx(7.0));
    CHECK_THROWS(x * Element::identity(AlgebraDescriptor::full(2)));
}

TEST_CASE("positivity test with diagnostics") {
    AlgebraDescriptor a({2});
    CMatrix p(2, 2), n(2, 2);
    p << 3, 0, 0, 2;
    n << 3, 0, 0, -2;
    std::string why;
    CHECK(is_positive(Element(a, {p}), 1e-10));
    CHECK_FALSE(is_positive(Element(a, {n}), 1e-10, &why));
    CHECK(why.find("negative eigenvalue") != std::string::npos);
    CMatrix nh(2, 2);
    nh << 1, 1, 0, 1;
    CHECK_FALSE(is_positive(Element(a, {nh}), 1e-10, &why));
    CHECK(why.find("Hermitian") != std::string::npos);
}

TEST_CASE("states: trace, density validation, faithfulness floors") {
    AlgebraDescriptor a({2, 2});
    State tr = State::trace_state(a);
    CHECK(tr.is_trace);
    CHECK(std::abs(tr.rho.trace().real() - 1.0) < 1e-14);

    // non-unit trace rejected
    Element bad = Element::identity(a);
    CHECK_THROWS(State::from_density(bad));

    // rank-deficient density rejected under both floors
    CMatrix r1(2, 2), r2(2, 2);
    r1 << 1, 0, 0, 0;
    r2 << 0, 0, 0, 0;
    CHECK_THROWS(State::from_density(Element(a, {r1, r2})));

    // a tiny-but-positive eigenvalue passes only with the positive floor
    CMatrix s1(2, 2), s2(2, 2);
    double eps = 1e-13;
    s1 << 0.5, 0, 0, 0.5 - 2 * eps;
    s2 << eps, 0, 0, eps;
    CHECK_THROWS(State::from_density(Element(a, {s1, s2}), State::Floor::strict_ratio));
    CHECK_NOTHROW(State::from_density(Element(a, {s1, s2}), State::Floor::positive));
}

TEST_CASE("gibbs state matches the exponential formula") {
    Rng rng(17);
    CMatrix h = 3.0 * rng.hermitian(3);
    Element H = Element::wrap(h);
    double beta = 1.7;
    State g = gibbs_state(H, beta);
    CMatrix expm = mat_fn(h, [&](double x) { return std::exp(-beta * x); });
    expm /= expm.trace().real();
    CHECK((g.rho.blocks[0] - expm).norm() < 1e-12);
    CHECK_FALSE(g.is_trace);
    // beta -> 0 recovers the trace state
    State g0 = gibbs_state(H, 1e-14);
    CHECK((g0.rho.blocks[0] - CMatrix::Identity(3, 3) / 3.0).norm() < 1e-12);
}

TEST_CASE("ampliation layout and state") {
    AlgebraDescriptor a({2});
    Rng rng(5);
    Element x(a, {rng.ginibre(2)});
    Element big = ampliate(x, 3);
    CHECK(big.alg.block_dims == std::vector<int>{6});
    CHECK((big.blocks[0] - kron(x.blocks[0], CMatrix::Identity(3, 3))).norm() < 1e-14);
    // ampliation is multiplicative
    Element y(a, {rng.ginibre(2)});
    CHECK((ampliate(x * y, 3) - ampliate(x, 3) * ampliate(y, 3)).hs_norm() < 1e-13);
    State st = ampliate_state(State::trace_state(a), 3);
    CHECK(std::abs(st.rho.trace().real() - 1.0) < 1e-14);
}

TEST_CASE("group tables") {
    GroupTable z4 = GroupTable::cyclic(4);
    CHECK(z4.e == 0);
    CHECK(z4.inv[1] == 3);
    CHECK(z4.is_abelian());
    // symmetric group S3, table generated by composing permutations
    std::vector<std::array<int, 3>> perms = {{0, 1, 2}, {1, 0, 2}, {2, 1, 0},
                                             {0, 2, 1}, {1, 2, 0}, {2, 0, 1}};
    auto find = [&](const std::array<int, 3>& p) {
        for (int i = 0; i < 6; ++i)
            if (perms[i] == p) return i;
        return -1;
    };
    std::vector<std::vector<int>> s3(6, std::vector<int>(6));
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
            std::array<int, 3> c;
            for (int x = 0; x < 3; ++x) c[x] = perms[a][perms[b][x]];
            s3[a][b] = find(c);
        }
    GroupTable g(6, s3);
    CHECK_FALSE(g.is_abelian());
    // broken table rejected
    std::vector<std::vector<int>> bad = {{0, 1}, {1, 1}};
    CHECK_THROWS(GroupTable(2, bad));
}
