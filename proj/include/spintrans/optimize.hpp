// optimize.hpp — Derivative-free search over nearest-neighbor couplings
//
// The objective (a transfer peak magnitude over a finite horizon) is a max
// over an oscillatory series, so gradients are useless; the search runs
// Nelder-Mead simplex iterations from several seeded random starts inside the
// coupling box, followed by a coordinate-wise polish of the best point.
// Everything is evaluated in a fixed order, so a given seed always produces
// the same result.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "spintrans/dynamics.hpp"
#include "spintrans/model.hpp"
#include "spintrans/spectra.hpp"

namespace spintrans::optimize {

enum class ObjectiveKind { first_peak, global_peak };

struct SearchProblem {
    int n_sites = 2;
    double g_eff = 0.0;
    double time_horizon = 30.0;
    double lower_bound = 0.05;
    double upper_bound = 2.0;
    ObjectiveKind objective = ObjectiveKind::global_peak;
    std::uint64_t seed = 0;
    int budget = 5000;  // max objective evaluations across the whole search
    int restarts = 10;
    double dt = 0.0;  // 0 = derive from G and the hopping norm

    void validate() const {
        if (n_sites < 2) throw std::invalid_argument("SearchProblem: need at least 2 sites");
        if (!(g_eff >= 0.0)) throw std::invalid_argument("SearchProblem: g_eff must be >= 0");
        if (!(time_horizon > 0.0)) {
            throw std::invalid_argument("SearchProblem: time_horizon must be > 0");
        }
        if (!(lower_bound >= 0.0) || !(upper_bound > lower_bound)) {
            throw std::invalid_argument("SearchProblem: bounds must satisfy 0 <= lo < hi");
        }
        if (budget < 1) throw std::invalid_argument("SearchProblem: budget must be >= 1");
        if (restarts < 1) throw std::invalid_argument("SearchProblem: restarts must be >= 1");
        if (!(dt >= 0.0)) throw std::invalid_argument("SearchProblem: dt must be >= 0");
    }
};

// Peak magnitude of |f_{N,1}| over [0, T] for the chain built from the given
// couplings, with the problem's bath (exact formula) or without one (bare).
inline double objective_at_g(const std::vector<double>& couplings, const SearchProblem& problem,
                             double g_eff) {
    problem.validate();
    if (static_cast<int>(couplings.size()) != problem.n_sites - 1) {
        throw std::invalid_argument("objective: expected n_sites - 1 couplings");
    }
    for (double j : couplings) {
        if (j < problem.lower_bound - 1e-12 || j > problem.upper_bound + 1e-12) {
            throw std::domain_error("objective: coupling outside bounds");
        }
    }
    const auto chain = model::ChainSpec::nearest_neighbor(couplings);
    const auto spec = spectra::eigendecompose(chain);
    const double dt =
        problem.dt > 0.0 ? problem.dt : dynamics::default_dt(g_eff, spec.norm_bound());
    const auto times = dynamics::time_grid(problem.time_horizon, dt);
    const auto series =
        g_eff > 0.0
            ? dynamics::exact_transfer(spectra::dress(spec, g_eff), 1, problem.n_sites, times,
                                       chain.hash())
            : dynamics::bare_transfer(spec, 1, problem.n_sites, times, chain.hash());
    if (problem.objective == ObjectiveKind::first_peak) {
        const auto peak = dynamics::first_peak(series);
        return peak ? peak->magnitude : 0.0;
    }
    return dynamics::global_peak(series).magnitude;
}

inline double objective(const std::vector<double>& couplings, const SearchProblem& problem) {
    return objective_at_g(couplings, problem, problem.g_eff);
}

struct RestartBest {
    std::vector<double> couplings;
    double value = 0.0;
};

struct SearchResult {
    std::vector<double> best_couplings;
    double objective_with_bath = 0.0;     // at the problem's g_eff
    double objective_without_bath = 0.0;  // same couplings, G = 0
    long evaluations = 0;
    std::vector<double> incumbent_trace;  // best-so-far value at each improvement
    std::vector<RestartBest> restart_bests;
};

namespace detail {

struct Evaluator {
    explicit Evaluator(const SearchProblem& p) : problem(p) {}

    const SearchProblem& problem;
    long used = 0;
    std::vector<double> best_x;
    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;

    bool exhausted() const { return used >= problem.budget; }

    // Assumes x already clamped into the bounds box.
    double operator()(const std::vector<double>& x) {
        const double value = objective_at_g(x, problem, problem.g_eff);
        ++used;
        if (value > best_value) {
            best_value = value;
            best_x = x;
            trace.push_back(value);
        }
        return value;
    }
};

inline void clamp_into_box(std::vector<double>& x, double lo, double hi) {
    for (double& v : x) v = std::min(std::max(v, lo), hi);
}

// One Nelder-Mead run (minimizing -objective) from the given start point.
// Returns the best point seen by this run.
inline RestartBest nelder_mead(Evaluator& eval, std::vector<double> start, long local_budget) {
    const SearchProblem& p = eval.problem;
    const int dim = static_cast<int>(start.size());
    const double range = p.upper_bound - p.lower_bound;
    const long budget_mark = eval.used + local_budget;
    const auto out_of_budget = [&] { return eval.exhausted() || eval.used >= budget_mark; };

    RestartBest local;
    local.value = -std::numeric_limits<double>::infinity();
    const auto probe = [&](const std::vector<double>& x) {
        const double v = eval(x);
        if (v > local.value) {
            local.value = v;
            local.couplings = x;
        }
        return -v;
    };

    std::vector<std::vector<double>> vertex(dim + 1, start);
    std::vector<double> value(dim + 1);
    for (int i = 0; i < dim && !out_of_budget(); ++i) {
        double step = 0.1 * range;
        if (vertex[i + 1][i] + step > p.upper_bound) step = -step;
        vertex[i + 1][i] += step;
    }
    for (int i = 0; i <= dim; ++i) {
        if (out_of_budget()) return local;
        value[i] = probe(vertex[i]);
    }

    std::vector<int> order(dim + 1);
    while (!out_of_budget()) {
        for (int i = 0; i <= dim; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return value[a] < value[b] || (value[a] == value[b] && a < b);
        });
        const int best = order[0];
        const int second_worst = order[dim - 1];
        const int worst = order[dim];

        double value_spread = 0.0;
        double vertex_spread = 0.0;
        for (int i = 0; i <= dim; ++i) {
            value_spread = std::max(value_spread, std::abs(value[i] - value[best]));
            for (int d = 0; d < dim; ++d) {
                vertex_spread = std::max(vertex_spread, std::abs(vertex[i][d] - vertex[best][d]));
            }
        }
        if (value_spread < 1e-12 && vertex_spread < 1e-10) break;

        std::vector<double> centroid(dim, 0.0);
        for (int i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (int d = 0; d < dim; ++d) centroid[d] += vertex[i][d];
        }
        for (double& c : centroid) c /= dim;

        const auto blend = [&](double coef) {
            std::vector<double> x(dim);
            for (int d = 0; d < dim; ++d) x[d] = centroid[d] + coef * (centroid[d] - vertex[worst][d]);
            clamp_into_box(x, p.lower_bound, p.upper_bound);
            return x;
        };

        const auto reflected = blend(1.0);
        const double f_reflected = probe(reflected);
        if (out_of_budget()) break;

        if (f_reflected < value[best]) {
            const auto expanded = blend(2.0);
            const double f_expanded = probe(expanded);
            if (f_expanded < f_reflected) {
                vertex[worst] = expanded;
                value[worst] = f_expanded;
            } else {
                vertex[worst] = reflected;
                value[worst] = f_reflected;
            }
        } else if (f_reflected < value[second_worst]) {
            vertex[worst] = reflected;
            value[worst] = f_reflected;
        } else {
            const bool outside = f_reflected < value[worst];
            const auto contracted = blend(outside ? 0.5 : -0.5);
            const double f_contracted = probe(contracted);
            if (out_of_budget()) break;
            if (f_contracted < (outside ? f_reflected : value[worst])) {
                vertex[worst] = contracted;
                value[worst] = f_contracted;
            } else {
                for (int i = 0; i <= dim; ++i) {  // shrink toward the best vertex
                    if (i == best) continue;
                    for (int d = 0; d < dim; ++d) {
                        vertex[i][d] = vertex[best][d] + 0.5 * (vertex[i][d] - vertex[best][d]);
                    }
                    if (out_of_budget()) break;
                    value[i] = probe(vertex[i]);
                }
            }
        }
    }
    return local;
}

// Axis-aligned pattern refinement of the incumbent with a shrinking step.
inline void coordinate_polish(Evaluator& eval) {
    const SearchProblem& p = eval.problem;
    if (eval.best_x.empty()) return;
    const double range = p.upper_bound - p.lower_bound;
    double step = 0.05 * range;
    while (step > 1e-4 * range && !eval.exhausted()) {
        bool improved = false;
        for (std::size_t d = 0; d < eval.best_x.size() && !eval.exhausted(); ++d) {
            for (double sign : {1.0, -1.0}) {
                if (eval.exhausted()) break;
                std::vector<double> x = eval.best_x;
                x[d] = std::min(std::max(x[d] + sign * step, p.lower_bound), p.upper_bound);
                if (x[d] == eval.best_x[d]) continue;
                const double before = eval.best_value;
                eval(x);
                if (eval.best_value > before) {
                    improved = true;
                    break;  // best_x moved; re-anchor on the new incumbent
                }
            }
        }
        if (!improved) step *= 0.5;
    }
}

}  // namespace detail

inline SearchResult search(const SearchProblem& problem) {
    problem.validate();
    const int dim = problem.n_sites - 1;

    // All start points are drawn up front so the restart loop itself never
    // touches the generator.
    std::mt19937_64 rng(problem.seed);
    std::uniform_real_distribution<double> draw(problem.lower_bound, problem.upper_bound);
    std::vector<std::vector<double>> starts(problem.restarts, std::vector<double>(dim));
    for (auto& start : starts) {
        for (double& x : start) x = draw(rng);
    }

    detail::Evaluator eval(problem);
    const long polish_reserve = std::min<long>(problem.budget / 5, 20L * dim);
    const long per_restart = std::max<long>(1, (problem.budget - polish_reserve) / problem.restarts);

    SearchResult result;
    for (int r = 0; r < problem.restarts && !eval.exhausted(); ++r) {
        result.restart_bests.push_back(detail::nelder_mead(eval, starts[r], per_restart));
    }
    detail::coordinate_polish(eval);

    result.best_couplings = eval.best_x;
    result.objective_with_bath = eval.best_value;
    result.objective_without_bath = objective_at_g(eval.best_x, problem, 0.0);
    result.evaluations = eval.used;
    result.incumbent_trace = std::move(eval.trace);
    return result;
}

}  // namespace spintrans::optimize
