#pragma once

// Finite Heisenberg spin chains: Hamiltonians with open or periodic boundary,
// Gibbs states with a KMS audit, smeared-modular-flow Dirichlet forms built by
// Gauss-Legendre quadrature of the 1/cosh(2 pi t) kernel, interaction-norm
// diagnostics, and kernel-dimension ergodicity checks.

#include "ncdf/builders.hpp"

namespace ncdf {

// --- chain specification ------------------------------------------------------

enum class Boundary { open_chain, periodic };

struct SpinChainSpec {
    int l_sites = 1;
    std::vector<double> couplings;  // J(d) for d = 1..R
    double field = 0.0;             // h
    Boundary boundary = Boundary::open_chain;
    double lambda_decay = 1.0;

    int range() const { return static_cast<int>(couplings.size()); }

    double coupling(int d) const {
        if (boundary == Boundary::periodic) d = std::min(d, l_sites - d);
        return (d >= 1 && d <= range()) ? couplings[d - 1] : 0.0;
    }

    void validate() const {
        if (l_sites < 1) throw std::invalid_argument("SpinChainSpec: L >= 1");
        if (l_sites > 10) throw std::invalid_argument("SpinChainSpec: L <= 10 memory cap");
        if (!(lambda_decay > 0)) throw std::invalid_argument("SpinChainSpec: lambda_decay > 0");
    }
};

namespace detail {

// sigma_j at a given site of an L-site chain (j in 0..3, 0 = identity).
inline CMatrix site_pauli(int l_sites, int site, int j) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (int s = 0; s < l_sites; ++s) out = kron(out, s == site ? pauli(j) : pauli(0));
    return out;
}

}  // namespace detail

// H = sum_x h sigma_3^x + sum_{x<y} J(x-y) sum_i sigma_i^x sigma_i^y.
inline Element hamiltonian(const SpinChainSpec& spec) {
    spec.validate();
    const int L = spec.l_sites;
    const int dim = 1 << L;
    CMatrix H = CMatrix::Zero(dim, dim);
    for (int x = 0; x < L; ++x) H += spec.field * detail::site_pauli(L, x, 3);
    for (int x = 0; x < L; ++x)
        for (int y = x + 1; y < L; ++y) {
            double j = spec.coupling(y - x);
            if (j == 0.0) continue;
            for (int i = 1; i <= 3; ++i)
                H += j * detail::site_pauli(L, x, i) * detail::site_pauli(L, y, i);
        }
    return Element(AlgebraDescriptor::full(dim), {H});
}

// --- Gibbs state with KMS audit -----------------------------------------------

struct KmsAudit {
    double kms_residual = 0.0;        // |omega(a alpha_{i beta}(b)) - omega(b a)|, worst case
    double flow_relation_residual = 0.0;  // sigma^omega_t vs alpha_{-beta t} on a t grid
    int samples = 0;

    nlohmann::json to_json() const {
        return {{"kms_residual", kms_residual},
                {"flow_relation_residual", flow_relation_residual},
                {"samples", samples}};
    }
};

inline State kms_state(const SpinChainSpec& spec, double beta) {
    if (!(beta > 0)) throw std::invalid_argument("kms_state: beta > 0");
    return gibbs_state(hamiltonian(spec), beta);
}

// Verifies the dynamical KMS identity omega(a alpha_{i beta}(b)) = omega(ba)
// for alpha_t(x) = e^{itH} x e^{-itH}, and the relation sigma^omega_t =
// alpha_{-beta t} between the modular flow of the Gibbs state and the
// Heisenberg dynamics.
inline KmsAudit kms_audit(const SpinChainSpec& spec, double beta, int n_samples = 20,
                          std::uint64_t seed = 41) {
    Element H = hamiltonian(spec);
    State st = kms_state(spec, beta);
    SpacePtr sp = StandardSpace::gns(st);
    const int dim = H.blocks[0].rows();
    const CMatrix& Hm = H.blocks[0];
    HermEig eh = herm_eig(Hm);
    auto alpha = [&](cxd t, const CMatrix& x) {
        CVector dp(dim), dm(dim);
        for (int i = 0; i < dim; ++i) {
            dp[i] = std::exp(cxd(0, 1) * t * eh.eigenvalues[i]);
            dm[i] = std::exp(cxd(0, -1) * t * eh.eigenvalues[i]);
        }
        CMatrix u = eh.eigenvectors * dp.asDiagonal() * eh.eigenvectors.adjoint();
        CMatrix v = eh.eigenvectors * dm.asDiagonal() * eh.eigenvectors.adjoint();
        return CMatrix(u * x * v);
    };
    KmsAudit audit;
    audit.samples = n_samples;
    Rng rng(seed);
    for (int s = 0; s < n_samples; ++s) {
        Element a(st.alg, {rng.hermitian(dim)});
        Element b(st.alg, {rng.hermitian(dim)});
        Element ab(st.alg, {CMatrix(a.blocks[0] * alpha(cxd(0, beta), b.blocks[0]))});
        double res = std::abs(sp->omega(ab) - sp->omega(b * a));
        audit.kms_residual = std::max(audit.kms_residual, res);
    }
    for (double t : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
        Element a(st.alg, {rng.hermitian(dim)});
        Element lhs = sp->modular_flow(t, a);
        CMatrix rhs = alpha(-beta * t, a.blocks[0]);
        double res = (lhs.blocks[0] - rhs).norm() / std::max(1.0, rhs.norm());
        audit.flow_relation_residual = std::max(audit.flow_relation_residual, res);
    }
    return audit;
}

// --- Gauss-Legendre nodes (Golub-Welsch) --------------------------------------

struct Quadrature {
    RVector nodes;    // on [-T, T]
    RVector weights;
};

inline Quadrature gauss_legendre(int q, double half_width) {
    if (q < 8) throw std::invalid_argument("gauss_legendre: Q >= 8");
    RMatrix jac = RMatrix::Zero(q, q);
    for (int k = 1; k < q; ++k) {
        double b = k / std::sqrt(4.0 * k * k - 1.0);
        jac(k - 1, k) = b;
        jac(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(jac);
    Quadrature out;
    out.nodes = half_width * es.eigenvalues();
    out.weights.resize(q);
    for (int i = 0; i < q; ++i) {
        double f = es.eigenvectors()(0, i);
        out.weights[i] = 2.0 * f * f * half_width;
    }
    return out;
}

// --- Park's smeared modular-flow form ----------------------------------------

struct ParkOptions {
    double truncation = 3.0;   // T
    // The kernel 1/cosh(2 pi t) has poles at +-i/4; relative to [-3,3] the
    // Gauss-Legendre rate is only about e^{-0.166 Q}, so 256 nodes are needed
    // to reach the rounding floor (64 would leave ~1e-4 quadrature error).
    int nodes = 256;           // Q
    std::vector<int> pauli_indices = {0, 1, 2, 3};
};

// E[xi] = sum_{x,j} int ||(sigma_{t-i/4}(a) - j(sigma_{t-i/4}(a))) xi||^2
// f0(t) dt with f0(t) = 1/cosh(2 pi t), a = sigma_j at site x. In matrix
// terms B(t) = rho^{1/4+it} a rho^{-1/4-it} and the integrand superoperator
// is M(t) = Left(B(t)) - Right(B(t)*). Each M(t) annihilates xi_omega
// (B(t) rho^{1/2} = rho^{1/2} B(t)* for Hermitian a), so the form is
// conservative by construction. Summation order is node-major for
// determinism.
inline FormOperator park_form(const SpinChainSpec& spec, double beta,
                              const std::vector<int>& site_list,
                              const ParkOptions& opt = ParkOptions(),
                              const TolerancePolicy& tols = default_tols()) {
    spec.validate();
    if (!(opt.truncation > 0)) throw std::invalid_argument("park_form: T > 0");
    State st = kms_state(spec, beta);
    SpacePtr sp = StandardSpace::gns(st);
    const int dim = 1 << spec.l_sites;
    const int D = sp->l2_dim();

    // truncation error: the omitted integrand is bounded by f0(t) sup||M||^2,
    // and sup||M||^2 also sets the scale of L itself (||L|| is of order
    // int f0 ||M||^2 = sup||M||^2 / 2), so the relative truncation error is
    // controlled by the f0 tail mass int_{|t|>T} f0 <= 2 e^{-2 pi T}/pi
    double tail = (2.0 / M_PI) * std::exp(-2.0 * M_PI * opt.truncation);
    if (tail > tols.tol_prop) {
        double suggested = std::log(2.0 / (M_PI * tols.tol_prop)) / (2.0 * M_PI);
        std::ostringstream msg;
        msg << "park_form: quadrature tail bound " << tail << " exceeds tolerance; use T >= "
            << suggested;
        throw std::invalid_argument(msg.str());
    }

    Quadrature quad = gauss_legendre(opt.nodes, opt.truncation);
    auto f0 = [](double t) { return 1.0 / std::cosh(2.0 * M_PI * t); };

    std::vector<CMatrix> paulis;
    std::vector<int> psites;
    for (int x : site_list) {
        if (x < 0 || x >= spec.l_sites) throw std::invalid_argument("park_form: site out of range");
        for (int j : opt.pauli_indices) {
            paulis.push_back(detail::site_pauli(spec.l_sites, x, j));
            psites.push_back(x);
        }
    }

    CMatrix L = CMatrix::Zero(D, D);
    for (int i = 0; i < opt.nodes; ++i) {
        double t = quad.nodes[i];
        double w = quad.weights[i] * f0(t);
        std::vector<CMatrix> p = sp->rho_power(cxd(0.25, t));
        std::vector<CMatrix> q = sp->rho_power(cxd(-0.25, -t));
        for (const auto& a : paulis) {
            CMatrix B = p[0] * a * q[0];
            CMatrix M = left_mult_op(B) - right_mult_op(B.adjoint());
            L += w * (M.adjoint() * M);
        }
    }
    (void)dim;
    std::ostringstream prov;
    prov << "park_form L=" << spec.l_sites << " beta=" << beta << " T=" << opt.truncation
         << " Q=" << opt.nodes;
    return FormOperator(sp, L, prov.str());
}

// --- ergodicity ---------------------------------------------------------------

struct ErgodicityReport {
    int kernel_dim = 0;
    bool ergodic = false;

    nlohmann::json to_json() const {
        return {{"kernel_dim", kernel_dim}, {"ergodic", ergodic}};
    }
};

// Dimension of ker L; ergodic iff the kernel is spanned by xi_omega alone.
inline ErgodicityReport ergodicity_check(const FormOperator& form,
                                         const TolerancePolicy& tols = default_tols()) {
    const RVector& ev = form.eig().eigenvalues;
    double scale = std::max(1.0, form.scale());
    ErgodicityReport rep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) <= 1e3 * tols.tol_eig * scale) ++rep.kernel_dim;
    rep.ergodic = rep.kernel_dim == 1;
    return rep;
}

// --- interaction norm ---------------------------------------------------------

struct PhiNormReport {
    double value = 0.0;
    double beta_threshold = 0.0;  // lambda / ||Phi||_lambda

    nlohmann::json to_json() const {
        return {{"phi_norm", value}, {"beta_threshold", beta_threshold}};
    }
};

// ||Phi||_lambda = sup_x sum_{X ni x} |X| 4^{|X|} e^{lambda D(X)} ||Phi_X||
// over the finite chain: singletons contribute 4|h|, a pair at distance d
// contributes 2 * 16 * e^{lambda d} * 3|J(d)| (||sum_i sigma_i sigma_i|| = 3).
inline PhiNormReport phi_norm(const SpinChainSpec& spec, double lambda) {
    spec.validate();
    if (!(lambda > 0)) throw std::invalid_argument("phi_norm: lambda > 0");
    PhiNormReport rep;
    for (int x = 0; x < spec.l_sites; ++x) {
        double s = std::abs(spec.field) > 0 ? 4.0 * std::abs(spec.field) : 0.0;
        for (int y = 0; y < spec.l_sites; ++y) {
            if (y == x) continue;
            double j = spec.coupling(std::abs(y - x));
            if (j == 0.0) continue;
            int d = std::abs(y - x);
            if (spec.boundary == Boundary::periodic) d = std::min(d, spec.l_sites - d);
            s += 2.0 * 16.0 * std::exp(lambda * d) * 3.0 * std::abs(j);
        }
        rep.value = std::max(rep.value, s);
    }
    rep.beta_threshold = rep.value > 0 ? lambda / rep.value
                                       : std::numeric_limits<double>::infinity();
    return rep;
}

// Elementary commutator reference for the beta -> 0 limit of the Park form:
// sum over the same (x, j) family of ad* ad over the trace state.
inline FormOperator park_trace_limit_reference(const SpinChainSpec& spec,
                                               const std::vector<int>& site_list,
                                               const std::vector<int>& pauli_indices = {0, 1, 2,
                                                                                        3}) {
    spec.validate();
    const int dim = 1 << spec.l_sites;
    AlgebraDescriptor alg = AlgebraDescriptor::full(dim);
    std::vector<Element> fam;
    for (int x : site_list)
        for (int j : pauli_indices)
            fam.push_back(Element(alg, {detail::site_pauli(spec.l_sites, x, j)}));
    return elementary_trace_form(alg, fam);
}

}  // namespace ncdf
