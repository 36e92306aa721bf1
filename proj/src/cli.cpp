#include "spintrans/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "spintrans/dynamics.hpp"
#include "spintrans/model.hpp"
#include "spintrans/optimize.hpp"
#include "spintrans/oracle.hpp"
#include "spintrans/spectra.hpp"
#include "spintrans/version.hpp"

namespace spintrans::cli {

namespace {

using config::compact;
using config::join_compact;
using config::KeyValues;
using config::RunConfig;
using config::sci;

std::string hex64(std::uint64_t value) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

// Metadata block: `# key=value` lines ahead of the CSV payload, enough to
// re-run the command that produced the file.
class Metadata {
public:
    void add(std::string key, std::string value) {
        items_.emplace_back(std::move(key), std::move(value));
    }
    void add(std::string key, double value) { add(std::move(key), compact(value)); }
    void add(std::string key, long value) { add(std::move(key), std::to_string(value)); }

    void write(std::ostream& out) const {
        for (const auto& [key, value] : items_) out << "# " << key << "=" << value << "\n";
    }

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

KeyValues load_entries(const RunConfig& cfg) {
    KeyValues kv;
    if (!cfg.config_path.empty()) {
        kv = config::parse_key_values_file(cfg.config_path);
    }
    if (!cfg.bath_spec_path.empty()) {
        for (auto& entry : config::parse_key_values_file(cfg.bath_spec_path).entries) {
            kv.entries.push_back(std::move(entry));
        }
    }
    return kv;
}

model::ChainSpec resolve_chain(const RunConfig& cfg, const KeyValues& kv) {
    const int sources = (cfg.uniform_n > 0) + (cfg.engineered_n > 0) + !cfg.couplings.empty();
    if (sources > 1) {
        throw std::invalid_argument("choose one of --uniform, --engineered, --couplings");
    }
    if (cfg.uniform_n > 0) return model::ChainSpec::uniform(cfg.uniform_n);
    if (cfg.engineered_n > 0) {
        return model::ChainSpec::nearest_neighbor(spectra::engineered_couplings(cfg.engineered_n));
    }
    if (!cfg.couplings.empty()) return model::ChainSpec::nearest_neighbor(cfg.couplings);
    if (kv.has("n_sites") || kv.has("couplings")) return config::chain_from_entries(kv);
    throw std::invalid_argument("no chain specified (flags or config file)");
}

std::optional<model::BathSpec> resolve_bath(const RunConfig& cfg, const KeyValues& kv,
                                            int n_sites) {
    const bool has_site_keys = std::any_of(kv.entries.begin(), kv.entries.end(), [](const auto& e) {
        return e.first.rfind("bath.", 0) == 0;
    });
    if (!cfg.g_list.empty()) {
        if (cfg.g_list.size() == 1) {
            return model::BathSpec::from_effective(
                std::vector<double>(n_sites, cfg.g_list.front()));
        }
        throw std::invalid_argument("--g takes a single value here");
    }
    if (has_site_keys || kv.has("bath_eff")) return config::bath_from_entries(kv, n_sites);
    return std::nullopt;
}

struct BathRegime {
    double g = 0.0;
    bool approximate = false;  // heterogeneous G_l treated through the mean
    double spread = 0.0;
};

// Single effective G for formulas that need one. --g wins over bath files
// over config `g`; heterogeneous baths fall back to the mean with a note.
BathRegime resolve_g(const RunConfig& cfg, const KeyValues& kv, int n_sites) {
    BathRegime regime;
    if (!cfg.g_list.empty()) {
        if (cfg.g_list.size() != 1) throw std::invalid_argument("--g takes a single value here");
        regime.g = cfg.g_list.front();
        if (!(regime.g >= 0.0)) throw std::invalid_argument("--g must be >= 0");
        return regime;
    }
    if (const auto bath = resolve_bath(cfg, kv, n_sites)) {
        try {
            regime.g = model::homogenize(*bath).g_eff;
        } catch (const model::HeterogeneousBathError& err) {
            regime.g = err.mean();
            regime.approximate = true;
            regime.spread = err.spread();
        }
        return regime;
    }
    if (const auto g = kv.get("g")) {
        regime.g = config::parse_double(*g, "g");
        if (!(regime.g >= 0.0)) throw std::invalid_argument("g must be >= 0");
    }
    return regime;
}

double resolve_tmax(const RunConfig& cfg, const KeyValues& kv, double fallback) {
    if (cfg.t_max > 0.0) return cfg.t_max;
    if (const auto v = kv.get("tmax")) return config::parse_double(*v, "tmax");
    return fallback;
}

double resolve_dt(const RunConfig& cfg, const KeyValues& kv, double fallback) {
    if (cfg.dt > 0.0) return cfg.dt;
    if (const auto v = kv.get("dt")) return config::parse_double(*v, "dt");
    return fallback;
}

int resolve_site(int flag_value, const KeyValues& kv, const char* key, int fallback, int n_sites) {
    int site = fallback;
    if (const auto v = kv.get(key)) site = static_cast<int>(config::parse_long(*v, key));
    if (flag_value != 0) site = flag_value;
    if (site < 1 || site > n_sites) {
        throw std::invalid_argument(std::string(key) + " site out of range");
    }
    return site;
}

std::uint64_t resolve_seed(const RunConfig& cfg, const KeyValues& kv) {
    if (cfg.seed != 0) return cfg.seed;
    if (const auto v = kv.get("seed")) return config::parse_u64(*v, "seed");
    return 0;
}

void describe_chain(Metadata& meta, const model::ChainSpec& chain) {
    meta.add("n_sites", static_cast<long>(chain.n_sites()));
    if (chain.nearest_neighbor_form()) {
        meta.add("couplings", join_compact(chain.couplings()));
    } else {
        meta.add("couplings", "general-hermitian");
    }
    meta.add("chain_hash", hex64(chain.hash()));
}

void write_series_rows(std::ostream& out, const dynamics::TransferSeries& series) {
    out << "t,re,im,abs\n";
    for (int i = 0; i < series.size(); ++i) {
        const auto amp = series.amplitudes(i);
        out << sci(series.times(i)) << ',' << sci(amp.real()) << ',' << sci(amp.imag()) << ','
            << sci(std::abs(amp)) << "\n";
    }
}

// ------------------------------- transfer -----------------------------------

int run_transfer(const RunConfig& cfg, std::ostream& out) {
    const KeyValues kv = load_entries(cfg);
    const auto chain = resolve_chain(cfg, kv);
    const int n = chain.n_sites();
    const auto spec = spectra::eigendecompose(chain);
    const int from = resolve_site(cfg.from_site, kv, "from", 1, n);
    const int to = resolve_site(cfg.to_site, kv, "to", n, n);
    const BathRegime regime = resolve_g(cfg, kv, n);

    std::string formula = cfg.formula;
    if (formula.empty()) {
        if (const auto v = kv.get("formula")) formula = *v;
    }
    if (formula.empty()) formula = "exact";
    const auto tag = dynamics::formula_from_string(formula);
    if (!tag || *tag == dynamics::FormulaTag::oracle) {
        throw std::invalid_argument(
            "formula must be one of bare|exact|strong_approx|weak_corrected");
    }

    const double t_max = resolve_tmax(cfg, kv, 20.0);
    const double dt = resolve_dt(cfg, kv, dynamics::default_dt(regime.g, spec.norm_bound()));
    const auto times = dynamics::time_grid(t_max, dt);

    dynamics::TransferSeries series;
    switch (*tag) {
        case dynamics::FormulaTag::bare:
            series = dynamics::bare_transfer(spec, from, to, times, chain.hash());
            break;
        case dynamics::FormulaTag::exact:
            series = dynamics::exact_transfer(spectra::dress(spec, regime.g), from, to, times,
                                              chain.hash());
            break;
        case dynamics::FormulaTag::strong_approx:
            series = dynamics::strong_coupling_approx(spec, from, to, times, regime.g,
                                                      chain.hash());
            break;
        default:
            series = dynamics::weak_corrected_transfer(spec, from, to, times, regime.g,
                                                       chain.hash());
            break;
    }

    Metadata meta;
    meta.add("version", kVersion);
    meta.add("command", "transfer");
    describe_chain(meta, chain);
    meta.add("from", static_cast<long>(from));
    meta.add("to", static_cast<long>(to));
    meta.add("formula", formula);
    meta.add("g", regime.g);
    if (regime.approximate) {
        meta.add("bath_regime", "approximate-mean");
        meta.add("bath_spread", regime.spread);
    }
    meta.add("tmax", t_max);
    meta.add("dt", times(1) - times(0));
    meta.add("n_steps", static_cast<long>(times.size() - 1));
    meta.add("seed", std::to_string(resolve_seed(cfg, kv)));
    meta.add("min_abs_eps", spec.eigenvalues.cwiseAbs().minCoeff());
    if (series.size() >= 3) {
        if (const auto peak = dynamics::first_peak(series)) {
            meta.add("peak_time", peak->time);
            meta.add("peak_abs", peak->magnitude);
        }
    }
    meta.write(out);
    write_series_rows(out, series);
    return 0;
}

// --------------------------------- sweep ------------------------------------

int run_sweep(const RunConfig& cfg, std::ostream& out) {
    const KeyValues kv = load_entries(cfg);
    const auto chain = resolve_chain(cfg, kv);
    const int n = chain.n_sites();
    const auto spec = spectra::eigendecompose(chain);
    const int from = resolve_site(cfg.from_site, kv, "from", 1, n);
    const int to = resolve_site(cfg.to_site, kv, "to", n, n);

    std::vector<double> g_values = cfg.g_list;
    if (g_values.empty()) {
        if (const auto v = kv.get("g")) g_values = config::parse_list(*v, "g");
    }
    if (g_values.empty()) throw std::invalid_argument("sweep: need a non-empty G list");
    for (double g : g_values) {
        if (!(g >= 0.0)) throw std::invalid_argument("sweep: G values must be >= 0");
    }

    const double g_max = *std::max_element(g_values.begin(), g_values.end());
    const double t_max = resolve_tmax(cfg, kv, 20.0);
    const double dt = resolve_dt(cfg, kv, dynamics::default_dt(g_max, spec.norm_bound()));
    const auto times = dynamics::time_grid(t_max, dt);

    std::vector<dynamics::TransferSeries> exact;
    std::vector<Eigen::VectorXd> residual;
    for (double g : g_values) {
        exact.push_back(dynamics::exact_transfer(spectra::dress(spec, g), from, to, times,
                                                 chain.hash()));
        if (g > 0.0) {
            const auto strong =
                dynamics::strong_coupling_approx(spec, from, to, times, g, chain.hash());
            residual.push_back(
                (exact.back().amplitudes - strong.amplitudes).cwiseAbs());
        } else {
            residual.emplace_back();
        }
    }

    Metadata meta;
    meta.add("version", kVersion);
    meta.add("command", "sweep");
    describe_chain(meta, chain);
    meta.add("from", static_cast<long>(from));
    meta.add("to", static_cast<long>(to));
    for (std::size_t i = 0; i < g_values.size(); ++i) {
        meta.add("g_" + std::to_string(i), g_values[i]);
    }
    meta.add("tmax", t_max);
    meta.add("dt", times(1) - times(0));
    meta.add("n_steps", static_cast<long>(times.size() - 1));
    meta.add("seed", std::to_string(resolve_seed(cfg, kv)));
    meta.write(out);

    out << "t";
    for (std::size_t i = 0; i < g_values.size(); ++i) {
        out << ",abs_" << i;
        if (g_values[i] > 0.0) out << ",res_" << i;
    }
    out << "\n";
    for (Eigen::Index row = 0; row < times.size(); ++row) {
        out << sci(times(row));
        for (std::size_t i = 0; i < g_values.size(); ++i) {
            out << ',' << sci(std::abs(exact[i].amplitudes(row)));
            if (g_values[i] > 0.0) out << ',' << sci(residual[i](row));
        }
        out << "\n";
    }
    return 0;
}

// -------------------------------- spectrum ----------------------------------

int run_spectrum(const RunConfig& cfg, std::ostream& out) {
    const KeyValues kv = load_entries(cfg);
    const auto chain = resolve_chain(cfg, kv);
    const auto spec = spectra::eigendecompose(chain);
    const BathRegime regime = resolve_g(cfg, kv, chain.n_sites());
    const auto dressed = spectra::dress(spec, regime.g);

    Metadata meta;
    meta.add("version", kVersion);
    meta.add("command", "spectrum");
    describe_chain(meta, chain);
    meta.add("g", regime.g);
    if (regime.approximate) {
        meta.add("bath_regime", "approximate-mean");
        meta.add("bath_spread", regime.spread);
    }
    meta.add("min_abs_eps", spec.eigenvalues.cwiseAbs().minCoeff());
    meta.write(out);

    out << "k,eps,delta,E0,E1,c0,c1\n";
    for (int k = 0; k < spec.n(); ++k) {
        out << (k + 1) << ',' << sci(spec.eigenvalues(k)) << ',' << sci(dressed.delta(k)) << ','
            << sci(dressed.energies(k, 0)) << ',' << sci(dressed.energies(k, 1)) << ','
            << sci(dressed.norms(k, 0)) << ',' << sci(dressed.norms(k, 1)) << "\n";
    }
    return 0;
}

// --------------------------------- check ------------------------------------

struct CheckLine {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    double tol = 0.0;
};

int run_check(const RunConfig& cfg, std::ostream& out) {
    const KeyValues kv = load_entries(cfg);
    const auto chain = resolve_chain(cfg, kv);
    const int n = chain.n_sites();
    const auto spec = spectra::eigendecompose(chain);

    model::BathSpec bath = model::BathSpec::none(n);
    if (const auto resolved = resolve_bath(cfg, kv, n)) bath = *resolved;
    const auto g_per_site = model::effective_couplings(bath);
    const double g_scale = g_per_site.empty()
                               ? 0.0
                               : *std::max_element(g_per_site.begin(), g_per_site.end());

    const double t_max = resolve_tmax(cfg, kv, 20.0);
    const double dt = resolve_dt(cfg, kv, dynamics::default_dt(g_scale, spec.norm_bound()));
    const auto times = dynamics::time_grid(t_max, dt);
    const std::uint64_t seed = resolve_seed(cfg, kv);

    const auto full = oracle::build_full(chain, bath);  // may raise the dimension cap
    const oracle::FullPropagator prop(full);
    const auto reference = prop.transfer(1, n, times);

    Metadata meta;
    meta.add("version", kVersion);
    meta.add("command", "check");
    describe_chain(meta, chain);
    meta.add("bath_g", join_compact(g_per_site));
    meta.add("bath_dimension", static_cast<long>(full.dimension()));
    meta.add("tmax", t_max);
    meta.add("dt", times(1) - times(0));
    meta.add("seed", std::to_string(seed));
    meta.write(out);

    std::vector<CheckLine> lines;
    bool homogeneous = true;
    double mean_g = 0.0;
    double spread = 0.0;
    try {
        mean_g = model::homogenize(bath).g_eff;
    } catch (const model::HeterogeneousBathError& err) {
        homogeneous = false;
        mean_g = err.mean();
        spread = err.spread();
    }

    // 1. analytic formula vs brute force (exact only in the homogeneous regime)
    const auto analytic = dynamics::exact_transfer(spectra::dress(spec, mean_g), 1, n, times,
                                                   chain.hash());
    const double formula_gap = (analytic.amplitudes - reference.amplitudes).cwiseAbs().maxCoeff();
    if (homogeneous) {
        lines.push_back({"oracle_equivalence", formula_gap <= 1e-9, formula_gap, 1e-9});
        out << "regime: exact (homogeneous G)\n";
    } else {
        out << "regime: approximate (spread=" << short_num(spread)
            << ", mean_g=" << short_num(mean_g) << ", deviation=" << short_num(formula_gap)
            << ")\n";
    }

    // 2./3. unitarity over the full sector and contractivity on the chain block
    const int stride = std::max<int>(1, static_cast<int>(times.size() / 40));
    double unitarity_residual = 0.0;
    double contractivity_excess = 0.0;
    for (Eigen::Index i = 0; i < times.size(); i += stride) {
        const auto column = prop.column(1, times(i));
        unitarity_residual = std::max(unitarity_residual, std::abs(column.squaredNorm() - 1.0));
        contractivity_excess =
            std::max(contractivity_excess, column.head(n).squaredNorm() - 1.0);
    }
    lines.push_back({"unitarity", unitarity_residual <= 1e-9, unitarity_residual, 1e-9});
    lines.push_back({"contractivity", contractivity_excess <= 1e-9, contractivity_excess, 1e-9});

    // 4. chain amplitudes depend on the bath only through the G_l: rebuild a
    // different realization with the same targets and compare.
    if (bath.total_bath_spins() > 0) {
        std::vector<int> sizes(full.bath_sizes);
        for (std::size_t l = 0; l < sizes.size(); ++l) {
            if (g_per_site[l] > 0.0) sizes[l] += 1;
        }
        const auto second = oracle::random_bath(sizes, g_per_site, seed * 0x9e3779b97f4a7c15ull + 1);
        const auto reference2 =
            oracle::oracle_transfer(oracle::build_full(chain, second), 1, n, times);
        const double gap =
            (reference.amplitudes - reference2.amplitudes).cwiseAbs().maxCoeff();
        lines.push_back({"reduction_independence", gap <= 1e-9, gap, 1e-9});
    } else {
        const auto bare = dynamics::bare_transfer(spec, 1, n, times, chain.hash());
        const double gap = (reference.amplitudes - bare.amplitudes).cwiseAbs().maxCoeff();
        lines.push_back({"bare_equivalence", gap <= 1e-10, gap, 1e-10});
    }

    bool all_pass = true;
    for (const auto& line : lines) {
        all_pass = all_pass && line.pass;
        out << "check " << line.name << ": " << (line.pass ? "PASS" : "FAIL")
            << " residual=" << short_num(line.residual) << " tol=" << short_num(line.tol) << "\n";
    }
    out << "RESULT: " << (all_pass ? "PASS" : "FAIL") << "\n";
    return all_pass ? 0 : 2;
}

// -------------------------------- optimize ----------------------------------

int run_optimize(const RunConfig& cfg, std::ostream& out) {
    const KeyValues kv = load_entries(cfg);
    optimize::SearchProblem problem;
    problem.n_sites = cfg.opt_n;
    if (problem.n_sites == 0 && cfg.uniform_n > 0) problem.n_sites = cfg.uniform_n;
    if (problem.n_sites == 0) {
        if (const auto v = kv.get("n_sites")) {
            problem.n_sites = static_cast<int>(config::parse_long(*v, "n_sites"));
        }
    }
    if (problem.n_sites < 2) throw std::invalid_argument("optimize: need --n >= 2");

    if (!cfg.g_list.empty()) {
        if (cfg.g_list.size() != 1) throw std::invalid_argument("--g takes a single value here");
        problem.g_eff = cfg.g_list.front();
    } else if (const auto v = kv.get("g")) {
        problem.g_eff = config::parse_double(*v, "g");
    }
    problem.time_horizon = resolve_tmax(cfg, kv, 30.0);
    problem.dt = cfg.dt;
    problem.seed = resolve_seed(cfg, kv);
    problem.budget = cfg.budget;
    problem.restarts = cfg.restarts;
    std::string objective = cfg.objective;
    if (objective.empty()) {
        if (const auto v = kv.get("objective")) objective = *v;
    }
    if (objective.empty()) objective = "global_peak";
    if (objective == "first_peak") {
        problem.objective = optimize::ObjectiveKind::first_peak;
    } else if (objective == "global_peak") {
        problem.objective = optimize::ObjectiveKind::global_peak;
    } else {
        throw std::invalid_argument("objective must be first_peak or global_peak");
    }
    problem.validate();

    const auto result = optimize::search(problem);

    Metadata meta;
    meta.add("version", kVersion);
    meta.add("command", "optimize");
    meta.add("n_sites", static_cast<long>(problem.n_sites));
    meta.add("g", problem.g_eff);
    meta.add("time_horizon", problem.time_horizon);
    meta.add("bounds", compact(problem.lower_bound) + "," + compact(problem.upper_bound));
    meta.add("objective", objective);
    meta.add("seed", std::to_string(problem.seed));
    meta.add("budget", static_cast<long>(problem.budget));
    meta.add("restarts", static_cast<long>(problem.restarts));
    meta.add("best_couplings", join_compact(result.best_couplings));
    meta.add("objective_with_bath", result.objective_with_bath);
    meta.add("objective_without_bath", result.objective_without_bath);
    meta.add("improved",
             result.objective_with_bath > result.objective_without_bath ? "true" : "false");
    meta.add("evaluations", result.evaluations);
    meta.add("improvements", static_cast<long>(result.incumbent_trace.size()));
    meta.write(out);

    const auto chain = model::ChainSpec::nearest_neighbor(result.best_couplings);
    const auto spec = spectra::eigendecompose(chain);
    const double dt = problem.dt > 0.0
                          ? problem.dt
                          : dynamics::default_dt(problem.g_eff, spec.norm_bound());
    const auto times = dynamics::time_grid(problem.time_horizon, dt);
    const auto series =
        problem.g_eff > 0.0
            ? dynamics::exact_transfer(spectra::dress(spec, problem.g_eff), 1, problem.n_sites,
                                       times, chain.hash())
            : dynamics::bare_transfer(spec, 1, problem.n_sites, times, chain.hash());
    write_series_rows(out, series);
    return 0;
}

}  // namespace

int run(const config::RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    try {
        if (cfg.command == "transfer") return run_transfer(cfg, out);
        if (cfg.command == "sweep") return run_sweep(cfg, out);
        if (cfg.command == "spectrum") return run_spectrum(cfg, out);
        if (cfg.command == "check") return run_check(cfg, out);
        if (cfg.command == "optimize") return run_optimize(cfg, out);
        diag << "error: unknown command '" << cfg.command << "'\n";
        return 1;
    } catch (const oracle::DimensionCapError& err) {
        diag << "error: " << err.what() << "\n";
        return 3;
    } catch (const std::exception& err) {
        diag << "error: " << err.what() << "\n";
        return 1;
    }
}

}  // namespace spintrans::cli
