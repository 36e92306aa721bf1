// model.hpp — Chain and bath specifications for bath-coupled spin networks
//
// A chain is either a list of nearest-neighbor couplings J_l (tridiagonal
// hopping with off-diagonal elements -J_l) or a general Hermitian hopping
// matrix acting on the single-excitation basis. Baths are per-site coupling
// lists g_k, which enter the chain dynamics only through the effective
// couplings G_l = sqrt(sum_k g_k^2).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spintrans::model {

// ------------------------------- hashing ------------------------------------

// FNV-1a, used to fingerprint chain specs in serialized output.
inline std::uint64_t hash_bytes(const void* data, std::size_t len,
                                std::uint64_t seed = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t hash_double(double x, std::uint64_t seed) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof(bits));
    return hash_bytes(&bits, sizeof(bits), seed);
}

// ------------------------------- ChainSpec ----------------------------------

class ChainSpec {
public:
    // Chain of couplings.size()+1 sites with nearest-neighbor couplings J_l.
    static ChainSpec nearest_neighbor(std::vector<double> couplings) {
        ChainSpec spec;
        spec.n_sites_ = static_cast<int>(couplings.size()) + 1;
        for (double j : couplings) {
            if (!std::isfinite(j)) {
                throw std::invalid_argument("ChainSpec: couplings must be finite");
            }
        }
        std::uint64_t h = hash_bytes("nn", 2);
        for (double j : couplings) h = hash_double(j, h);
        spec.hash_ = h;
        spec.couplings_ = std::move(couplings);
        return spec;
    }

    static ChainSpec uniform(int n_sites, double coupling = 1.0) {
        if (n_sites < 1) {
            throw std::invalid_argument("ChainSpec: n_sites must be >= 1");
        }
        return nearest_neighbor(std::vector<double>(n_sites - 1, coupling));
    }

    // General excitation-conserving case: an arbitrary Hermitian hopping matrix.
    static ChainSpec general(Eigen::MatrixXcd hopping, double hermitian_rel_tol = 1e-12) {
        if (hopping.rows() == 0 || hopping.rows() != hopping.cols()) {
            throw std::invalid_argument("ChainSpec: hopping matrix must be square and non-empty");
        }
        const double scale = std::max(1.0, hopping.cwiseAbs().maxCoeff());
        const double dev = (hopping - hopping.adjoint()).cwiseAbs().maxCoeff();
        if (dev > hermitian_rel_tol * scale) {
            throw std::invalid_argument("ChainSpec: hopping matrix is not Hermitian");
        }
        ChainSpec spec;
        spec.n_sites_ = static_cast<int>(hopping.rows());
        std::uint64_t h = hash_bytes("gen", 3);
        for (Eigen::Index c = 0; c < hopping.cols(); ++c) {
            for (Eigen::Index r = 0; r < hopping.rows(); ++r) {
                h = hash_double(hopping(r, c).real(), h);
                h = hash_double(hopping(r, c).imag(), h);
            }
        }
        spec.hash_ = h;
        spec.hopping_ = std::move(hopping);
        return spec;
    }

    int n_sites() const noexcept { return n_sites_; }
    bool nearest_neighbor_form() const noexcept { return couplings_.has_value(); }

    const std::vector<double>& couplings() const {
        if (!couplings_) {
            throw std::logic_error("ChainSpec: general spec has no coupling list");
        }
        return *couplings_;
    }

    // Single-excitation hopping matrix: tridiagonal with elements -J_l for
    // nearest-neighbor specs, the stored matrix otherwise.
    Eigen::MatrixXcd hopping() const {
        if (hopping_) return *hopping_;
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n_sites_, n_sites_);
        for (int l = 0; l + 1 < n_sites_; ++l) {
            h(l, l + 1) = -(*couplings_)[l];
            h(l + 1, l) = -(*couplings_)[l];
        }
        return h;
    }

    std::uint64_t hash() const noexcept { return hash_; }

private:
    ChainSpec() = default;

    int n_sites_ = 0;
    std::optional<std::vector<double>> couplings_;
    std::optional<Eigen::MatrixXcd> hopping_;
    std::uint64_t hash_ = 0;
};

inline Eigen::MatrixXcd hopping_matrix(const ChainSpec& chain) { return chain.hopping(); }

// -------------------------------- BathSpec ----------------------------------

class BathSpec {
public:
    static BathSpec none(int n_sites) {
        if (n_sites < 1) throw std::invalid_argument("BathSpec: n_sites must be >= 1");
        BathSpec bath;
        bath.per_site_.resize(n_sites);
        return bath;
    }

    // Entry l lists the couplings g_k of the M_l bath spins attached to site l.
    static BathSpec from_couplings(std::vector<std::vector<double>> per_site) {
        if (per_site.empty()) throw std::invalid_argument("BathSpec: n_sites must be >= 1");
        for (const auto& site : per_site) {
            for (double g : site) {
                if (!std::isfinite(g)) {
                    throw std::invalid_argument("BathSpec: couplings must be finite");
                }
            }
        }
        BathSpec bath;
        bath.per_site_ = std::move(per_site);
        return bath;
    }

    // Shorthand when only the effective couplings matter: one bath spin per
    // site carrying the full G_l (an empty bath where G_l = 0).
    static BathSpec from_effective(const std::vector<double>& g_eff) {
        if (g_eff.empty()) throw std::invalid_argument("BathSpec: n_sites must be >= 1");
        std::vector<std::vector<double>> per_site;
        per_site.reserve(g_eff.size());
        for (double g : g_eff) {
            if (!(g >= 0.0)) {
                throw std::invalid_argument("BathSpec: effective couplings must be >= 0");
            }
            if (g == 0.0) {
                per_site.emplace_back();
            } else {
                per_site.push_back({g});
            }
        }
        return from_couplings(std::move(per_site));
    }

    int n_sites() const noexcept { return static_cast<int>(per_site_.size()); }
    const std::vector<std::vector<double>>& per_site() const noexcept { return per_site_; }

    int total_bath_spins() const noexcept {
        int total = 0;
        for (const auto& site : per_site_) total += static_cast<int>(site.size());
        return total;
    }

private:
    BathSpec() = default;
    std::vector<std::vector<double>> per_site_;
};

// G_l = sqrt(sum_k g_k^2); 0 for an empty bath. `site` is 1-based.
inline double effective_bath_coupling(const BathSpec& bath, int site) {
    if (site < 1 || site > bath.n_sites()) {
        throw std::out_of_range("effective_bath_coupling: site out of range");
    }
    double sum = 0.0;
    for (double g : bath.per_site()[site - 1]) sum += g * g;
    return std::sqrt(sum);
}

inline std::vector<double> effective_couplings(const BathSpec& bath) {
    std::vector<double> g(bath.n_sites());
    for (int l = 1; l <= bath.n_sites(); ++l) g[l - 1] = effective_bath_coupling(bath, l);
    return g;
}

inline double mean_effective_coupling(const BathSpec& bath) {
    const auto g = effective_couplings(bath);
    if (std::all_of(g.begin(), g.end(), [&](double x) { return x == g.front(); })) {
        return g.front();
    }
    double sum = 0.0;
    for (double x : g) sum += x;
    return sum / static_cast<double>(g.size());
}

struct HomogeneousBath {
    double g_eff = 0.0;
};

class HeterogeneousBathError : public std::runtime_error {
public:
    HeterogeneousBathError(double spread, double mean)
        : std::runtime_error("bath is heterogeneous: max |G_l - mean| = " +
                             std::to_string(spread) + " around mean " + std::to_string(mean)),
          spread_(spread),
          mean_(mean) {}

    double spread() const noexcept { return spread_; }
    double mean() const noexcept { return mean_; }

private:
    double spread_ = 0.0;
    double mean_ = 0.0;
};

// Collapses a bath to a single G when the per-site G_l agree to rel_tol.
// The tight default keeps the analytic transfer formula in its exact regime;
// callers wanting the approximate mean-G treatment catch the error and use
// mean_effective_coupling instead.
inline HomogeneousBath homogenize(const BathSpec& bath, double rel_tol = 1e-9) {
    const double mean = mean_effective_coupling(bath);
    double spread = 0.0;
    for (int l = 1; l <= bath.n_sites(); ++l) {
        spread = std::max(spread, std::abs(effective_bath_coupling(bath, l) - mean));
    }
    if (spread > rel_tol * mean) {
        throw HeterogeneousBathError(spread, mean);
    }
    return HomogeneousBath{mean};
}

}  // namespace spintrans::model
