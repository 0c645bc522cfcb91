#pragma once

// Spectral analytics: spectra with stable multiplicities, the Poincare gap,
// growth counts, heat traces with certified tails, the exact Chebyshev
// spectral data of the free orthogonal quantum groups, and the unitary-orbit
// identities behind the property-(Gamma) <-> Poincare-inequality argument.

#include "ncdf/forms.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace ncdf {

using bigint = boost::multiprecision::cpp_int;
using bigrat = boost::multiprecision::cpp_rational;

// --- spectra with multiplicities ---------------------------------------------

struct SpectralReport {
    std::vector<double> eigenvalues;   // distinct, ascending
    std::vector<int> multiplicities;   // same length, sums to D
    int dim = 0;

    nlohmann::json to_json() const {
        return {{"eigenvalues", eigenvalues}, {"multiplicities", multiplicities}, {"dim", dim}};
    }
};

// Degeneracy grouping tolerance, separate from tol_eig so that integer
// multiplicities stay stable under rounding noise.
constexpr double tol_spec = 1e-9;

inline SpectralReport spectrum(const FormOperator& form,
                               const TolerancePolicy& tols = default_tols()) {
    const RVector& ev = form.eig().eigenvalues;
    double scale = std::max(1.0, std::abs(ev[ev.size() - 1]));
    if (ev[0] < -tols.tol_psd * scale)
        throw std::runtime_error("spectrum: generator has a negative eigenvalue beyond tolerance");
    SpectralReport rep;
    rep.dim = static_cast<int>(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (!rep.eigenvalues.empty() && ev[i] - rep.eigenvalues.back() <= tol_spec * scale) {
            ++rep.multiplicities.back();
        } else {
            rep.eigenvalues.push_back(ev[i]);
            rep.multiplicities.push_back(1);
        }
    }
    return rep;
}

// --- Poincare gap -------------------------------------------------------------

struct PoincareResult {
    double gap = 0.0;
    bool passes = false;
};

// Smallest eigenvalue of L on the orthogonal complement of xi_omega. Requires
// a conservative form (xi_omega in the kernel).
inline PoincareResult poincare_gap(const FormOperator& form, double threshold = 0.0,
                                   const TolerancePolicy& tols = default_tols()) {
    const StandardSpace& sp = form.space();
    CVector v = sp.vec(sp.xi_omega());
    v /= v.norm();
    double scale = std::max(1.0, form.scale());
    if ((form.generator() * v).norm() > tols.tol_prop * scale)
        throw std::invalid_argument("poincare_gap: form is not conservative");
    const int D = form.dim();
    CMatrix P = CMatrix::Identity(D, D) - v * v.adjoint();
    double lmax = form.eig().eigenvalues.maxCoeff();
    // shift the xi_omega direction above the spectrum so the complement's
    // bottom eigenvalue is the global minimum
    CMatrix shifted = P * form.generator() * P + (lmax + 1.0) * (v * v.adjoint());
    PoincareResult r;
    r.gap = herm_eig(shifted).eigenvalues.minCoeff();
    r.passes = r.gap >= threshold - tols.tol_prop * scale;
    return r;
}

// --- growth counts ------------------------------------------------------------

struct GrowthReport {
    std::vector<double> beta;    // beta_n = # eigenvalues in [0, n], n = 0..n_max
    std::vector<double> roots;   // beta_n^{1/n} (n >= 1)
    double tail_fit = 0.0;       // least-squares slope of log beta_n vs n on the top half

    nlohmann::json to_json() const {
        return {{"beta", beta}, {"roots", roots}, {"tail_fit_exp_rate", tail_fit}};
    }
};

namespace detail {

inline void finish_growth(GrowthReport& g) {
    for (size_t n = 1; n < g.beta.size(); ++n)
        g.roots.push_back(std::pow(g.beta[n], 1.0 / double(n)));
    // slope of log beta over the top half of the range: crude exponential-rate
    // fit, reported as data, never as a limsup claim
    size_t lo = g.beta.size() / 2, cnt = g.beta.size() - lo;
    if (cnt >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t n = lo; n < g.beta.size(); ++n) {
            double x = double(n), y = std::log(std::max(1.0, g.beta[n]));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        double den = cnt * sxx - sx * sx;
        g.tail_fit = den > 0 ? (cnt * sxy - sx * sy) / den : 0.0;
    }
}

// log of a huge positive integer via its top bits.
inline double log_big(const bigint& v) {
    if (v <= 0) throw std::invalid_argument("log_big: positive input required");
    unsigned bits = boost::multiprecision::msb(v) + 1;
    if (bits <= 960) return std::log(v.convert_to<double>());
    bigint top = v >> (bits - 52);
    return std::log(top.convert_to<double>()) + double(bits - 52) * std::log(2.0);
}

}  // namespace detail

inline GrowthReport growth(const SpectralReport& rep, int n_max) {
    GrowthReport g;
    for (int n = 0; n <= n_max; ++n) {
        double count = 0;
        for (size_t k = 0; k < rep.eigenvalues.size(); ++k)
            if (rep.eigenvalues[k] <= double(n) + tol_spec) count += rep.multiplicities[k];
        g.beta.push_back(count);
    }
    detail::finish_growth(g);
    return g;
}

// --- exact Chebyshev spectral data -------------------------------------------

// lambda_n = U'_n(N)/U_n(N), m_n = U_n(N)^2 for the dilated Chebyshev
// polynomials U_n(x) = x U_{n-1} - U_{n-2}, exact integer/rational arithmetic.
struct ChebySpec {
    int N = 2;
    std::vector<bigint> U;
    std::vector<bigint> Uprime;
    std::vector<bigrat> lambda;
    std::vector<bigint> m;

    int n_max() const { return static_cast<int>(U.size()) - 1; }
};

inline ChebySpec chebyshev(int N, int n_max) {
    if (N < 2) throw std::invalid_argument("chebyshev: N >= 2");
    if (n_max < 1) throw std::invalid_argument("chebyshev: n_max >= 1");
    ChebySpec cs;
    cs.N = N;
    cs.U = {1, bigint(N)};
    cs.Uprime = {0, 1};
    for (int n = 2; n <= n_max; ++n) {
        cs.U.push_back(N * cs.U[n - 1] - cs.U[n - 2]);
        cs.Uprime.push_back(cs.U[n - 1] + N * cs.Uprime[n - 1] - cs.Uprime[n - 2]);
    }
    for (int n = 0; n <= n_max; ++n) {
        cs.lambda.push_back(bigrat(cs.Uprime[n], cs.U[n]));
        cs.m.push_back(cs.U[n] * cs.U[n]);
    }
    return cs;
}

inline std::string rational_string(const bigrat& r) {
    return boost::multiprecision::numerator(r).str() + "/" +
           boost::multiprecision::denominator(r).str();
}

inline GrowthReport growth(const ChebySpec& cs, int n_max) {
    GrowthReport g;
    for (int n = 0; n <= n_max; ++n) {
        bigint count = 0;
        for (int k = 0; k <= cs.n_max(); ++k)
            if (cs.lambda[k] <= n) count += cs.m[k];
        g.beta.push_back(count == 0 ? 0.0
                                    : (count < (bigint(1) << 900)
                                           ? count.convert_to<double>()
                                           : std::exp(detail::log_big(count))));
    }
    detail::finish_growth(g);
    return g;
}

// --- heat traces --------------------------------------------------------------

struct HeatTracePoint {
    double t = 0.0;
    double value = 0.0;        // exact sum (forms) or partial sum (ChebySpec)
    double tail_bound = 0.0;   // certified bound on the omitted tail, if any
    std::string verdict;       // "exact" | "certified_convergent" | "not_certified"
    bool terms_diverging = false;

    nlohmann::json to_json() const {
        return {{"t", t}, {"value", value}, {"tail_bound", tail_bound},
                {"verdict", verdict}, {"terms_diverging", terms_diverging}};
    }
};

inline std::vector<HeatTracePoint> heat_trace(const FormOperator& form,
                                              const std::vector<double>& t_grid) {
    const SpectralReport rep = spectrum(form);
    std::vector<HeatTracePoint> out;
    for (double t : t_grid) {
        if (!(t > 0)) throw std::invalid_argument("heat_trace: t > 0 required");
        HeatTracePoint p;
        p.t = t;
        for (size_t k = 0; k < rep.eigenvalues.size(); ++k)
            p.value += rep.multiplicities[k] * std::exp(-t * rep.eigenvalues[k]);
        p.verdict = "exact";
        out.push_back(p);
    }
    return out;
}

// Partial sums of sum m_k e^{-t lambda_k} up to k_max, with a rigorous tail
// bound. For N = 2 the eigenvalues are exactly k(k+2)/6 and the term ratio is
// explicit; for N >= 3 we use m_k <= N^{2k} together with the linear lower
// bound lambda_k >= (k + 1 - coth u)/(2 sinh u), u = arccosh(N/2), which
// follows from the hyperbolic closed form of U_k(N). When the geometric ratio
// is not < 1 the point is reported as not certified (and flagged when the
// bounding terms grow).
inline std::vector<HeatTracePoint> heat_trace(const ChebySpec& cs,
                                              const std::vector<double>& t_grid,
                                              int k_max) {
    if (k_max > cs.n_max()) throw std::invalid_argument("heat_trace: k_max beyond ChebySpec");
    // audit the analytic ingredients on the computed range
    for (int k = 1; k <= cs.n_max(); ++k)
        if (!(cs.lambda[k] > cs.lambda[k - 1]))
            throw std::runtime_error("heat_trace: lambda not strictly increasing");
    std::vector<HeatTracePoint> out;
    for (double t : t_grid) {
        if (!(t > 0)) throw std::invalid_argument("heat_trace: t > 0 required");
        HeatTracePoint p;
        p.t = t;
        for (int k = 0; k <= k_max; ++k)
            p.value += cs.m[k].convert_to<double>() *
                       std::exp(-t * cs.lambda[k].convert_to<double>());
        if (cs.N == 2) {
            // terms (k+1)^2 e^{-t k(k+2)/6}; ratio decreasing in k
            auto term = [&](double k) { return (k + 1) * (k + 1) * std::exp(-t * k * (k + 2) / 6.0); };
            double K = double(k_max);
            double r = std::pow((K + 3) / (K + 2), 2.0) * std::exp(-t * (2 * K + 5) / 6.0);
            if (r < 1.0) {
                p.tail_bound = term(K + 1) / (1.0 - r);
                p.verdict = "certified_convergent";
            } else {
                p.verdict = "not_certified";
            }
        } else {
            double u = std::acosh(double(cs.N) / 2.0);
            double a = 1.0 / (2.0 * std::sinh(u));
            double cothu = std::cosh(u) / std::sinh(u);
            auto bound = [&](double k) {
                return std::exp(2.0 * k * std::log(double(cs.N)) - t * a * (k + 1 - cothu));
            };
            double r = double(cs.N) * double(cs.N) * std::exp(-t * a);
            if (r < 1.0) {
                p.tail_bound = bound(double(k_max) + 1) / (1.0 - r);
                p.verdict = "certified_convergent";
            } else {
                p.verdict = "not_certified";
                p.terms_diverging = r > 1.0;
            }
        }
        out.push_back(p);
    }
    return out;
}

// --- unitary-orbit (property Gamma) identities --------------------------------

struct GammaReport {
    double unitarity_residual = 0.0;    // (i)  u_pm are unitary
    double splitting_residual = 0.0;    // (ii) E[u_pm] = E[y] + E[sqrt(1-y^2)]
    double contraction_margin = 0.0;    // (iii) E[sqrt(1-y^2)] - E[y], should be <= 0
    bool contraction_holds = false;
    double epsilon_hat = 0.0;           // sampled unitary-orbit infimum
    double chain_lhs = 0.0;             // ||y xi - tau(y) xi||^2
    double chain_rhs = 0.0;             // 8 E[y xi] / epsilon_hat
    bool chain_holds = false;

    nlohmann::json to_json() const {
        return {{"unitarity_residual", unitarity_residual},
                {"splitting_residual", splitting_residual},
                {"contraction_margin", contraction_margin},
                {"contraction_holds", contraction_holds},
                {"epsilon_hat", epsilon_hat},
                {"chain_lhs", chain_lhs},
                {"chain_rhs", chain_rhs},
                {"chain_holds", chain_holds}};
    }
};

// For a conservative trace form and Hermitian y with ||y||_op <= 1/sqrt(2):
// u_pm = y +- i sqrt(1 - y^2) are unitary, the form splits additively over
// the real/imaginary parts, the square-root functional calculus contracts the
// form (|phi'| <= 1 on that ball), and the factor-8 chain
// ||y xi - tau(y) xi||^2 <= 8 E[y xi]/eps holds with eps the unitary-orbit
// infimum of E[u xi]/||u xi - tau(u) xi||^2 (sampled Haar unitaries plus the
// derived u_pm themselves, which is what makes the sampled bound sound).
inline GammaReport gamma_identities(const FormOperator& form, const Element& y,
                                    std::uint64_t seed = 37, int n_unitaries = 1000,
                                    const TolerancePolicy& tols = default_tols()) {
    const StandardSpace& sp = form.space();
    if (!sp.state.is_trace)
        throw std::invalid_argument("gamma_identities: trace-state forms only");
    if (!y.is_hermitian(1e-10))
        throw std::invalid_argument("gamma_identities: y must be Hermitian");
    if (y.op_norm() > 1.0 / std::sqrt(2.0) + 1e-12)
        throw std::invalid_argument("gamma_identities: need ||y|| <= 1/sqrt(2)");

    GammaReport rep;
    auto sqrt_comp = [](const Element& x) {
        std::vector<CMatrix> out;
        for (const auto& blk : x.blocks)
            out.push_back(mat_fn(blk, [](double s) { return std::sqrt(std::max(0.0, 1.0 - s * s)); }));
        return Element(x.alg, std::move(out));
    };
    Element s = sqrt_comp(y);
    Element up = y + cxd(0, 1) * s;
    Element um = y + cxd(0, -1) * s;
    Element id = Element::identity(y.alg);
    rep.unitarity_residual = std::max((up.adjoint() * up - id).op_norm(),
                                      (um.adjoint() * um - id).op_norm());

    auto energy = [&](const Element& x) {
        return form.evaluate(sp.left(x, sp.xi_omega()));
    };
    double ey = energy(y), es = energy(s);
    double scale = std::max(1.0, std::max(ey, es));
    rep.splitting_residual =
        std::max(std::abs(energy(up) - ey - es), std::abs(energy(um) - ey - es)) / scale;
    rep.contraction_margin = (es - ey) / scale;
    rep.contraction_holds = es <= ey + tols.tol_prop * scale;

    // sampled unitary-orbit infimum of E[u xi]/||u xi - tau(u) xi||^2
    auto ratio = [&](const Element& u) -> double {
        StdVector v = sp.left(u, sp.xi_omega());
        cxd mean = sp.xi_omega().inner(v);
        double dev = (v - mean * sp.xi_omega()).inner(v - mean * sp.xi_omega()).real();
        if (dev < 1e-14) return std::numeric_limits<double>::infinity();
        return form.evaluate(v) / dev;
    };
    Rng rng(seed);
    double eps = std::min(ratio(up), ratio(um));
    for (int i = 0; i < n_unitaries; ++i) {
        std::vector<CMatrix> blks;
        for (int n : y.alg.block_dims) blks.push_back(rng.haar_unitary(n));
        eps = std::min(eps, ratio(Element(y.alg, std::move(blks))));
    }
    rep.epsilon_hat = eps;
    StdVector yxi = sp.left(y, sp.xi_omega());
    cxd mean = sp.xi_omega().inner(yxi);
    StdVector dev = yxi - mean * sp.xi_omega();
    rep.chain_lhs = dev.inner(dev).real();
    rep.chain_rhs = std::isfinite(eps) && eps > 0 ? 8.0 * ey / eps
                                                  : std::numeric_limits<double>::infinity();
    rep.chain_holds = rep.chain_lhs <= rep.chain_rhs + tols.tol_prop * std::max(1.0, rep.chain_lhs);
    return rep;
}

}  // namespace ncdf
