#include "cqed/runner/experiment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cqed/atom_reservoir.hpp"
#include "cqed/entanglement.hpp"
#include "cqed/liouville.hpp"
#include "cqed/purcell_reservoir.hpp"
#include "cqed/runner/csv.hpp"
#include "cqed/unraveller.hpp"
#include "cqed/version.hpp"

namespace cqed::runner {

namespace {

using Results = std::vector<std::pair<std::string, std::string>>;

struct Table {
    std::vector<double> times;
    std::vector<Series> series;
    Results results;

    void put(const std::string& key, double value) { results.emplace_back(key, format_number(value)); }
    void put(const std::string& key, const std::string& value) { results.emplace_back(key, value); }
    void put_hygiene(const Hygiene& h) {
        put("trace_error", h.trace_error);
        put("hermiticity_error", h.hermiticity_error);
        put("min_eigenvalue", h.min_eigenvalue);
        put("hygiene_ok", h.ok() ? "true" : "false");
    }
};

void guard_top(double top, double t) {
    if (top > scheme_a::kTopPopulationLimit) {
        std::ostringstream os;
        os << "top Fock population " << top << " at t = " << t << "; increase the truncation";
        throw TruncationError(os.str());
    }
}

DensityMatrix pure(const HilbertLayout& layout, std::size_t index) {
    return DensityMatrix::from_pure(StateVector::basis(layout, {index}));
}

Table run_master(const ExperimentConfig& cfg) {
    const auto& r = cfg.rates;
    const bool qubit = r.system == "qubit";
    const LindbladModel model = qubit ? scheme_b::effective_model(r.gamma_minus, r.gamma_plus)
                                      : scheme_a::thermal_field_model(r.gamma_minus, r.gamma_plus, r.n_trunc);
    Table tab;
    tab.times = uniform_grid(cfg.grid.t_final, cfg.grid.dt * static_cast<double>(cfg.grid.sample_every));
    const auto states = integrate(model, pure(model.layout(), r.initial), tab.times, cfg.grid.dt);

    Hygiene worst;
    std::vector<double> main_obs, top;
    std::vector<cplx> coherence;
    for (std::size_t k = 0; k < states.size(); ++k) {
        worst.absorb(states[k].hygiene());
        if (qubit) {
            main_obs.push_back(states[k].entries()(level::e, level::e).real());
            coherence.push_back(states[k].entries()(level::g, level::e));
        } else {
            main_obs.push_back(expectation(states[k], number_op(r.n_trunc)).real());
            top.push_back(top_level_population(states[k], 0));
            guard_top(top.back(), tab.times[k]);
        }
    }
    if (qubit) {
        tab.series = {{"p_e", main_obs}, {"rho_ge", coherence}};
    } else {
        tab.series = {{"n_mean", main_obs}, {"top_population", top}};
    }
    tab.put_hygiene(worst);
    return tab;
}

Table run_trajectories(const ExperimentConfig& cfg) {
    const auto& r = cfg.rates;
    const bool qubit = r.system == "qubit";
    const OperatorMatrix lower = qubit ? sigma_minus() : annihilation_op(r.n_trunc);
    const OperatorMatrix raise = qubit ? sigma_plus() : creation_op(r.n_trunc);
    ChannelSet cs = build_jump_channels({{r.gamma_minus, lower}, {r.gamma_plus, raise}}, cfg.grid.dt);
    if (cfg.unravelling.u) {
        cs = mix_channels(cs, *cfg.unravelling.u);
    } else if (cfg.unravelling.preset == "balanced") {
        cs = mix_channels(cs, embed_jump_mixing(balanced_pair_mixing(cfg.unravelling.phase)));
    }
    const LindbladModel model = qubit ? scheme_b::effective_model(r.gamma_minus, r.gamma_plus)
                                      : scheme_a::thermal_field_model(r.gamma_minus, r.gamma_plus, r.n_trunc);

    EnsembleOptions opt;
    opt.trajectory.t_final = cfg.grid.t_final;
    opt.trajectory.sample_every = cfg.grid.sample_every;
    opt.trajectory.keep_outcomes = false;
    opt.n_traj = cfg.ensemble.n_traj;
    opt.master_seed = cfg.ensemble.master_seed;
    opt.threads = cfg.ensemble.threads;
    opt.keep_records = false;
    const auto psi0 = StateVector::basis(cs.layout(), {r.initial});
    const EnsembleResult ens = ensemble_average(psi0, cs, opt);
    const auto master = integrate(model, DensityMatrix::from_pure(psi0), ens.times, cfg.grid.dt);

    const OperatorMatrix obs = qubit ? transition_op(2, level::e, level::e) : number_op(r.n_trunc);
    Table tab;
    tab.times = ens.times;
    std::vector<double> avg, me, dist;
    Hygiene worst;
    double max_dist = 0.0;
    for (std::size_t k = 0; k < ens.times.size(); ++k) {
        worst.absorb(master[k].hygiene());
        if (!qubit) guard_top(top_level_population(ens.average[k], 0), ens.times[k]);
        avg.push_back(expectation(ens.average[k], obs).real());
        me.push_back(expectation(master[k], obs).real());
        dist.push_back(trace_distance(ens.average[k], master[k]));
        max_dist = std::max(max_dist, dist.back());
    }
    const std::string name = qubit ? "p_e" : "n_mean";
    tab.series = {{name, avg}, {name + "_master", me}, {"trace_distance", dist}};
    tab.put("max_trace_distance", max_dist);
    tab.put("completeness_residual", cs.completeness_residual());
    tab.put_hygiene(worst);
    return tab;
}

Table run_scheme_a(const ExperimentConfig& cfg) {
    const auto& a = cfg.scheme_a;
    const auto& p = a.params;
    const Matrix rot = a.rotation == "pi_half_gi" ? scheme_a::pi_half_gi_rotation(a.phase)
                                                  : Matrix(Matrix::Identity(3, 3));
    const auto n_atoms = static_cast<std::size_t>(std::llround(cfg.grid.t_final * p.r));
    const HilbertLayout field = HilbertLayout::single(p.n_trunc);
    const auto traced = scheme_a::run_traced(p, rot, pure(field, a.initial_fock), n_atoms, cfg.grid.sample_every);
    const OperatorMatrix n_op = number_op(p.n_trunc);

    Table tab;
    tab.times = traced.times;
    std::vector<double> n_traced, top;
    Hygiene worst;
    for (const auto& rho : traced.states) {
        worst.absorb(rho.hygiene());
        n_traced.push_back(expectation(rho, n_op).real());
        top.push_back(top_level_population(rho, 0));
    }
    if (a.mode == "monitored") {
        EnsembleOptions opt;
        opt.trajectory.t_final = static_cast<double>(n_atoms) / p.r;
        opt.trajectory.sample_every = cfg.grid.sample_every;
        opt.trajectory.keep_outcomes = false;
        opt.n_traj = cfg.ensemble.n_traj;
        opt.master_seed = cfg.ensemble.master_seed;
        opt.threads = cfg.ensemble.threads;
        opt.keep_records = false;
        const auto ens = ensemble_average(StateVector::basis(field, {a.initial_fock}),
                                          scheme_a::detection_channels(p, rot), opt);
        std::vector<double> n_avg, dist;
        double max_dist = 0.0;
        for (std::size_t k = 0; k < traced.states.size(); ++k) {
            n_avg.push_back(expectation(ens.average[k], n_op).real());
            dist.push_back(trace_distance(ens.average[k], traced.states[k]));
            max_dist = std::max(max_dist, dist.back());
        }
        tab.series = {{"n_mean", n_avg}, {"n_mean_traced", n_traced}, {"trace_distance", dist}};
        tab.put("max_trace_distance", max_dist);
    } else {
        tab.series = {{"n_mean", n_traced}, {"top_population", top}};
    }

    const auto rates = scheme_a::engineered_rates(p);
    tab.put("gamma_plus", rates.gamma_plus);
    tab.put("gamma_minus", rates.gamma_minus);
    tab.put("steady_occupation", rates.steady_occupation());
    tab.put("n_atoms", static_cast<double>(n_atoms));
    if (a.rotation == "pi_half_gi") {
        const auto kraus = scheme_a::detection_kraus(p, rot);
        const auto fit_g = scheme_a::fit_quadrature(kraus[level::g]);
        const auto fit_i = scheme_a::fit_quadrature(kraus[level::i]);
        tab.put("jump_g_phase", fit_g.phase);
        tab.put("jump_g_residual", fit_g.residual);
        tab.put("jump_i_phase", fit_i.phase);
        tab.put("jump_i_residual", fit_i.residual);
    }
    tab.put("max_top_population", traced.max_top_population);
    tab.put_hygiene(worst);
    return tab;
}

Table run_scheme_b(const ExperimentConfig& cfg) {
    const auto& b = cfg.scheme_b;
    const std::size_t lvl = b.initial == "g" ? level::g : b.initial == "i" ? level::i : level::e;
    Table tab;
    tab.times = uniform_grid(cfg.grid.t_final, cfg.grid.dt * static_cast<double>(cfg.grid.sample_every));
    const auto cmp = scheme_b::reduced_compare(b.params, pure(HilbertLayout::single(3), lvl), tab.times, cfg.grid.dt);
    std::vector<double> pe_eff;
    for (const auto& rho : cmp.effective) pe_eff.push_back(rho.entries()(level::e, level::e).real());
    tab.series = {{"p_e_full", cmp.excited_population},
                  {"p_i_full", cmp.i_population},
                  {"p_e_effective", pe_eff},
                  {"trace_distance", cmp.distance}};

    const auto rates = scheme_b::effective_rates(b.params);
    tab.put("gamma_minus", rates.gamma_minus);
    tab.put("gamma_plus", rates.gamma_plus);
    tab.put("gamma_ie", rates.gamma_ie);
    tab.put("max_trace_distance", cmp.max_distance);
    tab.put("max_i_population", cmp.max_i_population);
    tab.put("max_top_population", cmp.max_top_population);
    const auto warnings = b.params.hierarchy_warnings();
    for (std::size_t k = 0; k < warnings.size(); ++k) tab.put("hierarchy_warning_" + std::to_string(k + 1), warnings[k]);
    tab.put_hygiene(cmp.hygiene);
    return tab;
}

Table run_protection(const ExperimentConfig& cfg) {
    entanglement::ProtectionOptions opt;
    opt.gamma = cfg.protection.gamma;
    opt.t_final = cfg.grid.t_final;
    opt.dt = cfg.grid.dt;
    opt.sample_every = cfg.grid.sample_every;
    opt.n_traj = cfg.ensemble.n_traj;
    opt.seed = cfg.ensemble.master_seed;
    opt.master_step = cfg.protection.master_step;
    const auto res = entanglement::protection_run(opt);

    Table tab;
    tab.times = res.times;
    std::vector<double> lo(res.times.size(), 1.0), hi(res.times.size(), 0.0);
    for (const auto& traj : res.trajectory_concurrence)
        for (std::size_t k = 0; k < traj.size(); ++k) {
            lo[k] = std::min(lo[k], traj[k]);
            hi[k] = std::max(hi[k], traj[k]);
        }
    tab.series = {{"concurrence_master", res.master_concurrence},
                  {"concurrence_average_state", res.averaged_state_concurrence},
                  {"concurrence_min", lo},
                  {"concurrence_max", hi},
                  {"trace_distance", res.ensemble_distance}};
    tab.put("max_concurrence_deviation", res.max_concurrence_deviation);
    double max_dist = 0.0;
    for (double d : res.ensemble_distance) max_dist = std::max(max_dist, d);
    tab.put("max_trace_distance", max_dist);
    const auto below = res.master_time_below(cfg.protection.threshold);
    tab.put("master_time_below_threshold", below ? format_number(*below) : std::string("none"));
    tab.put_hygiene(res.master_hygiene);
    return tab;
}

std::string manifest_name(const std::string& csv) {
    const auto dot = csv.rfind('.');
    return (dot == std::string::npos || dot == 0 ? csv : csv.substr(0, dot)) + ".manifest.ini";
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    Table tab;
    switch (cfg.experiment) {
        case Experiment::master: tab = run_master(cfg); break;
        case Experiment::trajectories: tab = run_trajectories(cfg); break;
        case Experiment::scheme_a: tab = run_scheme_a(cfg); break;
        case Experiment::scheme_b: tab = run_scheme_b(cfg); break;
        case Experiment::protection: tab = run_protection(cfg); break;
    }

    RunOutput out;
    out.csv_name = cfg.output_file();
    out.csv = format_csv(tab.times, tab.series);
    out.manifest_name = manifest_name(out.csv_name);
    std::ostringstream m;
    m << echo_config(cfg) << "\n[manifest]\nversion = " << kVersion << "\nmaster_seed = " << cfg.ensemble.master_seed
      << "\ncsv = " << out.csv_name << "\n\n[results]\n";
    for (const auto& [k, v] : tab.results) m << k << " = " << v << "\n";
    out.manifest = m.str();
    return out;
}

void write_outputs(const RunOutput& out, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::vector<std::pair<fs::path, const std::string*>> files = {{dir / out.csv_name, &out.csv},
                                                                         {dir / out.manifest_name, &out.manifest}};
    std::vector<fs::path> temps;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [path, text] : files) {
        fs::path tmp = path;
        tmp += ".tmp";
        temps.push_back(tmp);
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << *text;
        f.close();
        if (!f) {
            cleanup();
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        }
    }
    for (std::size_t k = 0; k < files.size(); ++k) {
        std::error_code ec;
        fs::rename(temps[k], files[k].first, ec);
        if (ec) {
            cleanup();
            throw std::runtime_error("cannot write '" + files[k].first.string() + "': " + ec.message());
        }
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace cqed::runner
