#pragma once

// Finite-dimensional *-algebras as direct sums of full matrix blocks,
// their elements, positivity, faithful states, ampliations, and finite
// group multiplication tables.

#include "ncdf/numeric.hpp"

#include <numeric>
#include <utility>
#include <vector>

namespace ncdf {

struct AlgebraDescriptor {
    std::vector<int> block_dims;

    explicit AlgebraDescriptor(std::vector<int> dims) : block_dims(std::move(dims)) {
        if (block_dims.empty())
            throw std::invalid_argument("AlgebraDescriptor: need at least one block");
        for (int n : block_dims)
            if (n < 1) throw std::invalid_argument("AlgebraDescriptor: block dims must be >= 1");
    }

    static AlgebraDescriptor full(int n) { return AlgebraDescriptor({n}); }

    int blocks() const { return static_cast<int>(block_dims.size()); }
    // Dimension of L^2: sum of n_k^2.
    int l2_dim() const {
        int d = 0;
        for (int n : block_dims) d += n * n;
        return d;
    }
    // Dimension of the block-diagonal embedding M_N, N = sum of n_k.
    int embed_dim() const { return std::accumulate(block_dims.begin(), block_dims.end(), 0); }

    bool operator==(const AlgebraDescriptor& o) const { return block_dims == o.block_dims; }
    bool operator!=(const AlgebraDescriptor& o) const { return !(*this == o); }
};

struct Element {
    AlgebraDescriptor alg;
    std::vector<CMatrix> blocks;

    Element(AlgebraDescriptor a, std::vector<CMatrix> b) : alg(std::move(a)), blocks(std::move(b)) {
        if (static_cast<int>(blocks.size()) != alg.blocks())
            throw std::invalid_argument("Element: block count mismatch");
        for (int k = 0; k < alg.blocks(); ++k) {
            if (blocks[k].rows() != alg.block_dims[k] || blocks[k].cols() != alg.block_dims[k])
                throw std::invalid_argument("Element: block shape mismatch");
            require_finite(blocks[k], "Element");
        }
    }

    static Element zero(const AlgebraDescriptor& a) {
        std::vector<CMatrix> b;
        for (int n : a.block_dims) b.push_back(CMatrix::Zero(n, n));
        return Element(a, std::move(b));
    }

    static Element identity(const AlgebraDescriptor& a) {
        std::vector<CMatrix> b;
        for (int n : a.block_dims) b.push_back(CMatrix::Identity(n, n));
        return Element(a, std::move(b));
    }

    // Single-block convenience.
    static Element wrap(const CMatrix& m) {
        require_square(m, "Element::wrap");
        return Element(AlgebraDescriptor::full(static_cast<int>(m.rows())), {m});
    }

    Element adjoint() const {
        std::vector<CMatrix> b;
        for (const auto& m : blocks) b.push_back(m.adjoint());
        return Element(alg, std::move(b));
    }

    cxd trace() const {
        cxd t = 0.0;
        for (const auto& m : blocks) t += m.trace();
        return t;
    }

    // Max block operator norm (the C*-norm of the direct sum).
    double op_norm() const {
        double n = 0.0;
        for (const auto& m : blocks) n = std::max(n, ncdf::op_norm(m));
        return n;
    }

    double hs_norm() const {
        double s = 0.0;
        for (const auto& m : blocks) s += m.squaredNorm();
        return std::sqrt(s);
    }

    bool is_hermitian(double tol) const {
        for (const auto& m : blocks)
            if (herm_residual(m) > tol * std::max(1.0, m.norm())) return false;
        return true;
    }

    CMatrix embed() const {
        int n = alg.embed_dim();
        CMatrix out = CMatrix::Zero(n, n);
        int off = 0;
        for (const auto& m : blocks) {
            out.block(off, off, m.rows(), m.cols()) = m;
            off += static_cast<int>(m.rows());
        }
        return out;
    }

    static Element from_embed(const AlgebraDescriptor& a, const CMatrix& big) {
        if (big.rows() != a.embed_dim() || big.cols() != a.embed_dim())
            throw std::invalid_argument("Element::from_embed: dimension mismatch");
        std::vector<CMatrix> b;
        int off = 0;
        for (int n : a.block_dims) {
            b.push_back(big.block(off, off, n, n));
            off += n;
        }
        return Element(a, std::move(b));
    }
};

inline void require_same_algebra(const Element& a, const Element& b, const char* who) {
    if (a.alg != b.alg) throw std::invalid_argument(std::string(who) + ": algebra mismatch");
}

inline Element mul(const Element& a, const Element& b) {
    require_same_algebra(a, b, "mul");
    std::vector<CMatrix> out;
    for (size_t k = 0; k < a.blocks.size(); ++k) out.push_back(a.blocks[k] * b.blocks[k]);
    return Element(a.alg, std::move(out));
}

inline Element operator*(const Element& a, const Element& b) { return mul(a, b); }

inline Element operator+(const Element& a, const Element& b) {
    require_same_algebra(a, b, "add");
    std::vector<CMatrix> out;
    for (size_t k = 0; k < a.blocks.size(); ++k) out.push_back(a.blocks[k] + b.blocks[k]);
    return Element(a.alg, std::move(out));
}

inline Element operator-(const Element& a, const Element& b) {
    require_same_algebra(a, b, "sub");
    std::vector<CMatrix> out;
    for (size_t k = 0; k < a.blocks.size(); ++k) out.push_back(a.blocks[k] - b.blocks[k]);
    return Element(a.alg, std::move(out));
}

inline Element operator*(cxd s, const Element& a) {
    std::vector<CMatrix> out;
    for (const auto& m : a.blocks) out.push_back(s * m);
    return Element(a.alg, std::move(out));
}

inline Element adjoint(const Element& a) { return a.adjoint(); }

inline Element identity(const AlgebraDescriptor& a) { return Element::identity(a); }

// True iff a is Hermitian within tol and every block eigenvalue >= -tol * ||a||.
// Optionally reports why it said no.
inline bool is_positive(const Element& a, double tol, std::string* diag = nullptr) {
    double scale = std::max(1.0, a.hs_norm());
    for (const auto& m : a.blocks) {
        if (herm_residual(m) > tol * scale) {
            if (diag) *diag = "not Hermitian within tolerance";
            return false;
        }
    }
    for (const auto& m : a.blocks) {
        HermEig e = herm_eig(m);
        if (e.eigenvalues.size() && e.eigenvalues.minCoeff() < -tol * scale) {
            if (diag) *diag = "negative eigenvalue " + std::to_string(e.eigenvalues.minCoeff());
            return false;
        }
    }
    return true;
}

struct State {
    AlgebraDescriptor alg;
    Element rho;
    bool is_trace;

    // Faithfulness policy for validation: user-supplied densities must keep
    // lambda_min > tol_psd * lambda_max; internally built Gibbs states are
    // faithful by construction and only need strict positivity (a beta = 5
    // Gibbs state legitimately has spectrum ratio far below tol_psd).
    enum class Floor { strict_ratio, positive };

    static State trace_state(const AlgebraDescriptor& a) {
        Element r = Element::identity(a);
        double d = static_cast<double>(a.embed_dim());
        return State{a, (1.0 / d) * r, true};
    }

    static State from_density(Element r, Floor floor = Floor::strict_ratio,
                              const TolerancePolicy& tols = default_tols()) {
        double tr = r.trace().real();
        if (std::abs(r.trace().imag()) > tols.tol_eig || std::abs(tr - 1.0) > 1e-8)
            throw std::invalid_argument("State: density must have unit trace");
        double lmin = std::numeric_limits<double>::infinity(), lmax = 0.0;
        for (const auto& m : r.blocks) {
            if (herm_residual(m) > tols.tol_eig * std::max(1.0, m.norm()))
                throw std::invalid_argument("State: density not Hermitian");
            HermEig e = herm_eig(m);
            lmin = std::min(lmin, e.eigenvalues.minCoeff());
            lmax = std::max(lmax, e.eigenvalues.maxCoeff());
        }
        double needed = (floor == Floor::strict_ratio) ? tols.tol_psd * lmax : 0.0;
        if (!(lmin > needed))
            throw std::invalid_argument("State: density not faithful (eigenvalue floor violated)");
        bool tracial = true;
        int n = r.alg.embed_dim();
        for (const auto& m : r.blocks)
            if ((m - CMatrix::Identity(m.rows(), m.cols()) / double(n)).norm() > 1e-13 * n)
                tracial = false;
        return State{r.alg, std::move(r), tracial};
    }
};

// rho = e^{-beta H} / Tr(e^{-beta H}) blockwise; H is shifted by its minimum
// eigenvalue first so the exponential cannot overflow.
inline State gibbs_state(const Element& h, double beta) {
    if (!h.is_hermitian(1e-10)) throw std::invalid_argument("gibbs_state: H must be Hermitian");
    double shift = std::numeric_limits<double>::infinity();
    for (const auto& m : h.blocks) shift = std::min(shift, herm_eig(m).eigenvalues.minCoeff());
    std::vector<CMatrix> out;
    double z = 0.0;
    for (const auto& m : h.blocks) {
        CMatrix e = mat_fn(m, [&](double x) { return std::exp(-beta * (x - shift)); });
        z += e.trace().real();
        out.push_back(std::move(e));
    }
    for (auto& m : out) m /= z;
    return State::from_density(Element(h.alg, std::move(out)), State::Floor::positive);
}

inline AlgebraDescriptor ampliate(const AlgebraDescriptor& a, int n) {
    if (n < 1) throw std::invalid_argument("ampliate: n must be >= 1");
    std::vector<int> dims;
    for (int d : a.block_dims) dims.push_back(d * n);
    return AlgebraDescriptor(dims);
}

// a tensor I_n blockwise; block layout is (original index) x (copy index),
// i.e. kron(block, I_n).
inline Element ampliate(const Element& a, int n) {
    AlgebraDescriptor big = ampliate(a.alg, n);
    std::vector<CMatrix> out;
    for (const auto& m : a.blocks) out.push_back(kron(m, CMatrix::Identity(n, n)));
    return Element(big, std::move(out));
}

// rho tensor (I_n / n): the state omega x tau_n on A tensor M_n.
inline State ampliate_state(const State& s, int n) {
    Element r = (1.0 / double(n)) * ampliate(s.rho, n);
    return State{ampliate(s.alg, n), std::move(r), s.is_trace};
}

struct GroupTable {
    int n = 0;
    std::vector<std::vector<int>> mul;  // mul[s][t] = s*t
    std::vector<int> inv;
    int e = 0;

    GroupTable(int order, std::vector<std::vector<int>> table) : n(order), mul(std::move(table)) {
        validate();
    }

    static GroupTable cyclic(int N) {
        if (N < 1) throw std::invalid_argument("GroupTable::cyclic: N >= 1");
        std::vector<std::vector<int>> t(N, std::vector<int>(N));
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) t[a][b] = (a + b) % N;
        return GroupTable(N, std::move(t));
    }

    bool is_abelian() const {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < a; ++b)
                if (mul[a][b] != mul[b][a]) return false;
        return true;
    }

private:
    void validate() {
        if (n < 1 || static_cast<int>(mul.size()) != n)
            throw std::invalid_argument("GroupTable: bad table size");
        for (const auto& row : mul) {
            if (static_cast<int>(row.size()) != n)
                throw std::invalid_argument("GroupTable: bad row size");
            for (int v : row)
                if (v < 0 || v >= n) throw std::invalid_argument("GroupTable: entry out of range");
        }
        // identity
        int id = -1;
        for (int a = 0; a < n; ++a) {
            bool ok = true;
            for (int b = 0; b < n; ++b) ok = ok && mul[a][b] == b && mul[b][a] == b;
            if (ok) { id = a; break; }
        }
        if (id < 0) throw std::invalid_argument("GroupTable: no identity element");
        e = id;
        // inverses
        inv.assign(n, -1);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b)
                if (mul[a][b] == e && mul[b][a] == e) { inv[a] = b; break; }
            if (inv[a] < 0) throw std::invalid_argument("GroupTable: missing inverse");
        }
        // associativity
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    if (mul[mul[a][b]][c] != mul[a][mul[b][c]])
                        throw std::invalid_argument("GroupTable: not associative");
    }
};

}  // namespace ncdf
