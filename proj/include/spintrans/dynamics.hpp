// dynamics.hpp — Transfer functions on a time grid and peak location
//
// All amplitudes are matrix elements of exp(-iHt) between single-excitation
// basis states, assembled from a precomputed spectrum; no time stepping is
// involved. Summation order over modes is fixed so results are reproducible
// bit for bit.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "spintrans/spectra.hpp"

namespace spintrans::dynamics {

enum class FormulaTag { bare, exact, strong_approx, weak_corrected, oracle };

inline const char* to_string(FormulaTag tag) {
    switch (tag) {
        case FormulaTag::bare: return "bare";
        case FormulaTag::exact: return "exact";
        case FormulaTag::strong_approx: return "strong_approx";
        case FormulaTag::weak_corrected: return "weak_corrected";
        case FormulaTag::oracle: return "oracle";
    }
    return "unknown";
}

inline std::optional<FormulaTag> formula_from_string(const std::string& s) {
    if (s == "bare") return FormulaTag::bare;
    if (s == "exact") return FormulaTag::exact;
    if (s == "strong_approx") return FormulaTag::strong_approx;
    if (s == "weak_corrected") return FormulaTag::weak_corrected;
    if (s == "oracle") return FormulaTag::oracle;
    return std::nullopt;
}

struct TransferSeries {
    Eigen::VectorXd times;
    Eigen::VectorXcd amplitudes;
    int source_site = 1;  // 1-based
    int target_site = 1;
    FormulaTag tag = FormulaTag::bare;
    double g_eff = 0.0;
    std::uint64_t chain_hash = 0;

    int size() const noexcept { return static_cast<int>(times.size()); }
};

// ------------------------------- time grids ---------------------------------

// Resolves both the bath modulation cos(Gt) and the fastest chain mode.
inline double default_dt(double g_eff, double h_norm) {
    return 0.05 / std::max({1.0, g_eff, h_norm});
}

inline Eigen::VectorXd time_grid(double t_max, double dt) {
    if (!(t_max > 0.0) || !(dt > 0.0)) {
        throw std::invalid_argument("time_grid: t_max and dt must be > 0");
    }
    const double steps = std::ceil(t_max / dt - 1e-12);
    if (steps > 5e7) throw std::invalid_argument("time_grid: more than 5e7 points");
    const int n = std::max(1, static_cast<int>(steps));
    const double step = t_max / n;
    Eigen::VectorXd times(n + 1);
    for (int i = 0; i <= n; ++i) times(i) = step * i;
    return times;
}

inline Eigen::VectorXd default_time_grid(double t_max, double g_eff,
                                         const spectra::SpectralData& spec) {
    return time_grid(t_max, default_dt(g_eff, spec.norm_bound()));
}

// ----------------------------- transfer kernels -----------------------------

namespace detail {

inline void check_site(int site, int n, const char* what) {
    if (site < 1 || site > n) throw std::out_of_range(std::string(what) + ": site out of range");
}

// f(t_i) = sum_j coeff_j exp(-i energy_j t_i), evaluated in index order.
inline Eigen::VectorXcd phase_sum(const Eigen::VectorXd& energies,
                                  const Eigen::VectorXcd& coeff,
                                  const Eigen::VectorXd& times) {
    Eigen::VectorXcd out(times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        std::complex<double> sum = 0.0;
        const double t = times(i);
        for (Eigen::Index j = 0; j < energies.size(); ++j) {
            sum += coeff(j) * std::polar(1.0, -energies(j) * t);
        }
        out(i) = sum;
    }
    return out;
}

}  // namespace detail

// Bare transfer f0(t) = sum_k exp(-i eps_k t) a_k,to conj(a_k,from).
inline TransferSeries bare_transfer(const spectra::SpectralData& spec, int source_site,
                                    int target_site, const Eigen::VectorXd& times,
                                    std::uint64_t chain_hash = 0) {
    const int n = spec.n();
    detail::check_site(source_site, n, "bare_transfer");
    detail::check_site(target_site, n, "bare_transfer");
    Eigen::VectorXcd coeff(n);
    for (int k = 0; k < n; ++k) {
        coeff(k) = spec.eigenvectors(k, target_site - 1) *
                   std::conj(spec.eigenvectors(k, source_site - 1));
    }
    TransferSeries series;
    series.times = times;
    series.amplitudes = detail::phase_sum(spec.eigenvalues, coeff, times);
    series.source_site = source_site;
    series.target_site = target_site;
    series.tag = FormulaTag::bare;
    series.g_eff = 0.0;
    series.chain_hash = chain_hash;
    return series;
}

inline TransferSeries bare_transfer(const model::ChainSpec& chain, int source_site,
                                    int target_site, const Eigen::VectorXd& times) {
    return bare_transfer(spectra::eigendecompose(chain), source_site, target_site, times,
                         chain.hash());
}

// Exact transfer for a homogeneous bath: the double sum over bare modes k
// and dressed branches n, each contributing weight u_kn^2 at phase E_k^n.
inline TransferSeries exact_transfer(const spectra::DressedSpectrum& dressed, int source_site,
                                     int target_site, const Eigen::VectorXd& times,
                                     std::uint64_t chain_hash = 0) {
    const int n = dressed.n();
    detail::check_site(source_site, n, "exact_transfer");
    detail::check_site(target_site, n, "exact_transfer");
    Eigen::VectorXd energies(2 * n);
    Eigen::VectorXcd coeff(2 * n);
    for (int k = 0; k < n; ++k) {
        const std::complex<double> overlap =
            dressed.base.eigenvectors(k, target_site - 1) *
            std::conj(dressed.base.eigenvectors(k, source_site - 1));
        for (int branch = 0; branch < 2; ++branch) {
            const double u = dressed.chain_factor(k, branch);
            energies(2 * k + branch) = dressed.energies(k, branch);
            coeff(2 * k + branch) = u * u * overlap;
        }
    }
    TransferSeries series;
    series.times = times;
    series.amplitudes = detail::phase_sum(energies, coeff, times);
    series.source_site = source_site;
    series.target_site = target_site;
    series.tag = FormulaTag::exact;
    series.g_eff = dressed.g_eff;
    series.chain_hash = chain_hash;
    return series;
}

// Amplitude <0,l| exp(-iHt) |source,0> onto the effective bath spin of site
// l, within the same 2N-dimensional reduction. target_site holds l.
inline TransferSeries exact_bath_transfer(const spectra::DressedSpectrum& dressed,
                                          int source_site, int bath_site,
                                          const Eigen::VectorXd& times,
                                          std::uint64_t chain_hash = 0) {
    const int n = dressed.n();
    detail::check_site(source_site, n, "exact_bath_transfer");
    detail::check_site(bath_site, n, "exact_bath_transfer");
    Eigen::VectorXd energies(2 * n);
    Eigen::VectorXcd coeff(2 * n);
    for (int k = 0; k < n; ++k) {
        const std::complex<double> overlap =
            dressed.base.eigenvectors(k, bath_site - 1) *
            std::conj(dressed.base.eigenvectors(k, source_site - 1));
        for (int branch = 0; branch < 2; ++branch) {
            energies(2 * k + branch) = dressed.energies(k, branch);
            coeff(2 * k + branch) =
                dressed.bath_factor(k, branch) * dressed.chain_factor(k, branch) * overlap;
        }
    }
    TransferSeries series;
    series.times = times;
    series.amplitudes = detail::phase_sum(energies, coeff, times);
    series.source_site = source_site;
    series.target_site = bath_site;
    series.tag = FormulaTag::exact;
    series.g_eff = dressed.g_eff;
    series.chain_hash = chain_hash;
    return series;
}

// Leading G^2 modification of the bare transfer. The per-mode bracket
// exp(-i eps t)(-1/eps^2 - it/eps) + 1/eps^2 has the finite limit -t^2/2 as
// eps -> 0, used below the absolute tolerance where its direct evaluation
// loses precision.
inline std::complex<double> weak_correction(const spectra::SpectralData& spec, int source_site,
                                            int target_site, double t, double g_eff,
                                            double eps_tol = 1e-8) {
    const int n = spec.n();
    detail::check_site(source_site, n, "weak_correction");
    detail::check_site(target_site, n, "weak_correction");
    std::complex<double> sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double eps = spec.eigenvalues(k);
        const std::complex<double> overlap = spec.eigenvectors(k, target_site - 1) *
                                             std::conj(spec.eigenvectors(k, source_site - 1));
        std::complex<double> bracket;
        if (std::abs(eps) <= eps_tol) {
            bracket = -0.5 * t * t;
        } else {
            const double inv2 = 1.0 / (eps * eps);
            bracket = std::polar(1.0, -eps * t) *
                          std::complex<double>(-inv2, -t / eps) +
                      inv2;
        }
        sum += overlap * bracket;
    }
    return g_eff * g_eff * sum;
}

inline TransferSeries weak_corrected_transfer(const spectra::SpectralData& spec, int source_site,
                                              int target_site, const Eigen::VectorXd& times,
                                              double g_eff, std::uint64_t chain_hash = 0) {
    TransferSeries series = bare_transfer(spec, source_site, target_site, times, chain_hash);
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        series.amplitudes(i) += weak_correction(spec, source_site, target_site, times(i), g_eff);
    }
    series.tag = FormulaTag::weak_corrected;
    series.g_eff = g_eff;
    return series;
}

// Strong-coupling law f(t) ~= cos(Gt) f0(t/2). The input series must hold the
// bare transfer sampled at the half times t/2; the output is on the grid t.
inline TransferSeries strong_coupling_approx(const TransferSeries& bare_at_half_times,
                                             double g_eff) {
    if (bare_at_half_times.tag != FormulaTag::bare) {
        throw std::invalid_argument("strong_coupling_approx: input must be a bare series");
    }
    if (!(g_eff > 0.0)) {
        throw std::invalid_argument("strong_coupling_approx: effective coupling must be > 0");
    }
    TransferSeries series = bare_at_half_times;
    series.times = 2.0 * bare_at_half_times.times;
    for (Eigen::Index i = 0; i < series.times.size(); ++i) {
        series.amplitudes(i) *= std::cos(g_eff * series.times(i));
    }
    series.tag = FormulaTag::strong_approx;
    series.g_eff = g_eff;
    return series;
}

inline TransferSeries strong_coupling_approx(const spectra::SpectralData& spec, int source_site,
                                             int target_site, const Eigen::VectorXd& times,
                                             double g_eff, std::uint64_t chain_hash = 0) {
    const Eigen::VectorXd half = 0.5 * times;
    return strong_coupling_approx(
        bare_transfer(spec, source_site, target_site, half, chain_hash), g_eff);
}

// --------------------------------- peaks ------------------------------------

struct Peak {
    double time = 0.0;
    double magnitude = 0.0;
};

namespace detail {

// Vertex of the quadratic through three samples of |f|; falls back to the
// middle sample when the data is not locally concave.
inline Peak refine_quadratic(double t0, double y0, double t1, double y1, double t2, double y2) {
    const double s1 = (y1 - y0) / (t1 - t0);
    const double s2 = ((y2 - y1) / (t2 - t1) - s1) / (t2 - t0);
    if (!(s2 < 0.0)) return Peak{t1, y1};
    double t_star = 0.5 * (t0 + t1) - 0.5 * s1 / s2;
    t_star = std::min(std::max(t_star, t0), t2);
    const double y_star = y0 + s1 * (t_star - t0) + s2 * (t_star - t0) * (t_star - t1);
    return Peak{t_star, y_star};
}

}  // namespace detail

// First local maximum of |f| above the floor (which skips numerical ripple),
// refined by quadratic interpolation on the surrounding grid points.
inline std::optional<Peak> first_peak(const TransferSeries& series, double floor = 0.05) {
    const int n = series.size();
    if (n < 3) throw std::invalid_argument("first_peak: need at least 3 points");
    for (int i = 1; i + 1 < n; ++i) {
        const double y0 = std::abs(series.amplitudes(i - 1));
        const double y1 = std::abs(series.amplitudes(i));
        const double y2 = std::abs(series.amplitudes(i + 1));
        if (y1 >= y0 && y1 >= y2 && (y1 > y0 || y1 > y2) && y1 > floor) {
            return detail::refine_quadratic(series.times(i - 1), y0, series.times(i), y1,
                                            series.times(i + 1), y2);
        }
    }
    return std::nullopt;
}

inline Peak global_peak(const TransferSeries& series) {
    const int n = series.size();
    if (n == 0) throw std::invalid_argument("global_peak: empty series");
    int best = 0;
    double best_mag = std::abs(series.amplitudes(0));
    for (int i = 1; i < n; ++i) {
        const double mag = std::abs(series.amplitudes(i));
        if (mag > best_mag) {
            best = i;
            best_mag = mag;
        }
    }
    if (best == 0 || best + 1 >= n) return Peak{series.times(best), best_mag};
    return detail::refine_quadratic(series.times(best - 1), std::abs(series.amplitudes(best - 1)),
                                    series.times(best), best_mag, series.times(best + 1),
                                    std::abs(series.amplitudes(best + 1)));
}

}  // namespace spintrans::dynamics
