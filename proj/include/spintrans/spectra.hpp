// spectra.hpp — Bare and dressed spectra of the single-excitation sector
//
// The bare spectrum diagonalizes the hopping matrix h alone. Coupling every
// site to its bath with a common effective strength G block-diagonalizes the
// 2N-dimensional (chain + effective bath spin) problem into N independent
// 2x2 blocks; the dressed spectrum carries the resulting eigenvalues
// E_k^n = (eps_k + (-1)^n Delta_k)/2 with Delta_k = sqrt(4 G^2 + eps_k^2),
// together with the per-mode overlap factors needed for transfer amplitudes.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spintrans/model.hpp"

namespace spintrans::spectra {

// ------------------------------ bare spectrum -------------------------------

struct SpectralData {
    Eigen::VectorXd eigenvalues;    // ascending
    Eigen::MatrixXcd eigenvectors;  // row k = eigenvector of eigenvalues[k]

    int n() const noexcept { return static_cast<int>(eigenvalues.size()); }

    double norm_bound() const noexcept {
        return eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    }
};

// Dense Hermitian eigendecomposition with a reproducible convention:
// eigenvalues ascending, each eigenvector's first nonzero component made
// real and positive.
inline SpectralData eigendecompose(const Eigen::MatrixXcd& h, double hermitian_rel_tol = 1e-12) {
    if (h.rows() == 0 || h.rows() != h.cols()) {
        throw std::invalid_argument("eigendecompose: matrix must be square and non-empty");
    }
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > hermitian_rel_tol * scale) {
        throw std::invalid_argument("eigendecompose: matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigendecompose: eigensolver failed");
    }
    SpectralData spec;
    spec.eigenvalues = solver.eigenvalues();
    spec.eigenvectors = solver.eigenvectors().transpose();
    for (Eigen::Index k = 0; k < spec.eigenvectors.rows(); ++k) {
        for (Eigen::Index l = 0; l < spec.eigenvectors.cols(); ++l) {
            const std::complex<double> v = spec.eigenvectors(k, l);
            if (std::abs(v) > 1e-12) {
                spec.eigenvectors.row(k) *= std::conj(v) / std::abs(v);
                break;
            }
        }
    }
    return spec;
}

inline SpectralData eigendecompose(const model::ChainSpec& chain) {
    return eigendecompose(chain.hopping());
}

// Couplings J_l = sqrt(l (N - l)), which give perfect bare transfer; with
// rescale_to set they are scaled uniformly so that sum_l J_l = rescale_to.
inline std::vector<double> engineered_couplings(int n_sites,
                                                std::optional<double> rescale_to = {}) {
    if (n_sites < 2) {
        throw std::invalid_argument("engineered_couplings: need at least 2 sites");
    }
    std::vector<double> j(n_sites - 1);
    double sum = 0.0;
    for (int l = 1; l < n_sites; ++l) {
        j[l - 1] = std::sqrt(static_cast<double>(l) * static_cast<double>(n_sites - l));
        sum += j[l - 1];
    }
    if (rescale_to) {
        const double factor = *rescale_to / sum;
        for (double& x : j) x *= factor;
    }
    return j;
}

// ----------------------------- dressed spectrum -----------------------------

// Per bare mode k and branch n in {0,1}:
//   energies(k,n)      E_k^n = (eps_k + (-1)^n Delta_k)/2
//   norms(k,n)         c_kn  = sqrt(((-1)^n Delta_k - 2G)^2 + eps_k^2)
//   chain_factor(k,n)  u_kn with <l,0|E_k^n> = u_kn a_kl
//   bath_factor(k,n)   v_kn with <0,l|E_k^n> = v_kn a_kl
// For |eps_k| below the degeneracy tolerance the n = 0 normalization
// vanishes; the dressed pair is then the analytic limit with energies +-G
// and chain weights a_kl/sqrt(2).
struct DressedSpectrum {
    SpectralData base;
    double g_eff = 0.0;
    Eigen::VectorXd delta;
    Eigen::MatrixX2d energies;
    Eigen::MatrixX2d norms;
    Eigen::MatrixX2d chain_factor;
    Eigen::MatrixX2d bath_factor;
    std::vector<char> degenerate;

    int n() const noexcept { return base.n(); }
};

inline DressedSpectrum dress(const SpectralData& spec, double g_eff,
                             double eps_rel_tol = 1e-12) {
    if (!(g_eff >= 0.0)) {
        throw std::invalid_argument("dress: effective coupling must be >= 0");
    }
    const int n = spec.n();
    DressedSpectrum d;
    d.base = spec;
    d.g_eff = g_eff;
    d.delta.resize(n);
    d.energies.resize(n, 2);
    d.norms.resize(n, 2);
    d.chain_factor.resize(n, 2);
    d.bath_factor.resize(n, 2);
    d.degenerate.assign(n, 0);

    const double eps_tol = eps_rel_tol * std::max(1.0, spec.norm_bound());
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    for (int k = 0; k < n; ++k) {
        const double eps = spec.eigenvalues(k);
        const double delta = std::hypot(2.0 * g_eff, eps);
        d.delta(k) = delta;
        d.energies(k, 0) = 0.5 * (eps + delta);
        d.energies(k, 1) = 0.5 * (eps - delta);

        // x_n = (-1)^n Delta - 2G; the n = 0 value is computed as
        // eps^2/(Delta + 2G), which avoids the cancellation in Delta - 2G.
        const double xsum = delta + 2.0 * g_eff;
        const double x0 = (xsum > 0.0) ? eps * eps / xsum : 0.0;
        const double x1 = -xsum;
        d.norms(k, 0) = std::hypot(x0, eps);
        d.norms(k, 1) = std::hypot(x1, eps);

        if (std::abs(eps) <= eps_tol) {
            d.degenerate[k] = 1;
            d.chain_factor(k, 0) = inv_sqrt2;
            d.chain_factor(k, 1) = inv_sqrt2;
            d.bath_factor(k, 0) = -inv_sqrt2;
            d.bath_factor(k, 1) = inv_sqrt2;
            continue;
        }
        d.chain_factor(k, 0) = (x0 + eps) / (std::sqrt(2.0) * d.norms(k, 0));
        d.chain_factor(k, 1) = (x1 + eps) / (std::sqrt(2.0) * d.norms(k, 1));
        d.bath_factor(k, 0) = (x0 - eps) / (std::sqrt(2.0) * d.norms(k, 0));
        d.bath_factor(k, 1) = (x1 - eps) / (std::sqrt(2.0) * d.norms(k, 1));
    }
    return d;
}

}  // namespace spintrans::spectra
