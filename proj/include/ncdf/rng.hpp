#pragma once

// Deterministic sampling used by the property checks. Everything funnels
// through one mt19937_64 so that a run is reproducible from a single seed.

#include "ncdf/numeric.hpp"

#include <random>

namespace ncdf {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }
    std::uint64_t next_seed() { return gen_(); }

    cxd cnormal() { return cxd(normal(), normal()) / std::sqrt(2.0); }

    CMatrix ginibre(int n) {
        CMatrix g(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) g(i, j) = cnormal();
        return g;
    }

    // GUE-distributed Hermitian matrix, unit Frobenius norm.
    CMatrix hermitian(int n) {
        CMatrix g = ginibre(n);
        CMatrix h = 0.5 * (g + g.adjoint());
        double nrm = h.norm();
        if (nrm > 0) h /= nrm;
        return h;
    }

    // Haar unitary via QR of a Ginibre matrix with phase correction.
    CMatrix haar_unitary(int n) {
        CMatrix g = ginibre(n);
        Eigen::HouseholderQR<CMatrix> qr(g);
        CMatrix q = qr.householderQ();
        CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int j = 0; j < n; ++j) {
            cxd d = r(j, j);
            cxd ph = (std::abs(d) > 0) ? d / std::abs(d) : cxd(1.0, 0.0);
            q.col(j) *= ph;
        }
        return q;
    }

    // Faithful density matrix: Wishart plus a floor keeping the spectrum
    // ratio well above tol_psd.
    CMatrix density(int n, double floor = 1e-3) {
        CMatrix g = ginibre(n);
        CMatrix w = g * g.adjoint();
        w += floor * w.trace().real() * CMatrix::Identity(n, n);
        w /= w.trace().real();
        return w;
    }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace ncdf
