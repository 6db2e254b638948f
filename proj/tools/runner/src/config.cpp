#include "cqed/runner/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cqed/entanglement.hpp"
#include "cqed/liouville.hpp"
#include "cqed/runner/csv.hpp"
#include "cqed/unraveller.hpp"

namespace cqed::runner {

namespace {

using Setter = std::function<void(const std::string&)>;
using Section = std::map<std::string, Setter>;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ConfigError(field + ": " + why);
}

double parse_real(const std::string& field, const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        fail(field, "expected a number, got '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(x)) fail(field, "expected a finite number, got '" + s + "'");
    return x;
}

std::uint64_t parse_unsigned(const std::string& field, const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        fail(field, "expected a non-negative integer, got '" + s + "'");
    }
    return v;
}

void one_of(const std::string& field, const std::string& value, std::initializer_list<const char*> allowed) {
    std::string list;
    for (const char* a : allowed) {
        if (value == a) return;
        list += list.empty() ? a : std::string(", ") + a;
    }
    fail(field, "must be one of {" + list + "}, got '" + value + "'");
}

// Runs `check`, relabelling library validation errors with the config field they came from.
template <class F>
void checked(const std::string& field, F&& check) {
    try {
        check();
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& e) {
        fail(field, e.what());
    }
}

void require_step(const std::string& field, const LindbladModel& model, double step) {
    const double limit = IntegrationOptions{}.stability_factor / model.generator_scale();
    if (step > limit) {
        std::ostringstream os;
        os << "step " << step << " exceeds " << limit << " for this model";
        fail(field, os.str());
    }
}

std::string real(double x) { return format_number(x); }

std::string matrix_text(const Matrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (!out.empty()) out += ' ';
            out += "(" + real(m(i, j).real()) + ", " + real(m(i, j).imag()) + ")";
        }
    return out;
}

LindbladModel rates_model(const RatesConfig& r) {
    if (r.system == "qubit") return scheme_b::effective_model(r.gamma_minus, r.gamma_plus);
    return scheme_a::thermal_field_model(r.gamma_minus, r.gamma_plus, r.n_trunc);
}

std::size_t rates_dim(const RatesConfig& r) { return r.system == "qubit" ? 2 : r.n_trunc; }

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::master: return "master";
        case Experiment::trajectories: return "trajectories";
        case Experiment::scheme_a: return "scheme_a";
        case Experiment::scheme_b: return "scheme_b";
        case Experiment::protection: return "protection";
    }
    return "?";
}

std::string ExperimentConfig::output_file() const {
    return output.file.empty() ? to_string(experiment) + ".csv" : output.file;
}

Matrix parse_complex_matrix(const std::string& text) {
    static const std::regex entry(R"(\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\))");
    std::vector<cplx> values;
    std::string rest;
    auto it = std::sregex_iterator(text.begin(), text.end(), entry);
    std::size_t last = 0;
    for (; it != std::sregex_iterator(); ++it) {
        rest += text.substr(last, static_cast<std::size_t>(it->position()) - last);
        last = static_cast<std::size_t>(it->position() + it->length());
        values.emplace_back(parse_real("matrix entry", (*it)[1]), parse_real("matrix entry", (*it)[2]));
    }
    rest += text.substr(last);
    if (rest.find_first_not_of(" \t\r\n,;") != std::string::npos) {
        throw ConfigError("matrix: unexpected text outside (re, im) pairs");
    }
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(values.size()))));
    if (values.empty() || static_cast<std::size_t>(n * n) != values.size()) {
        throw ConfigError("matrix: entry count " + std::to_string(values.size()) + " is not a square");
    }
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = values[static_cast<std::size_t>(i * n + j)];
    return m;
}

ExperimentConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config: " + e.message() + " at line " + std::to_string(e.line()));
    }

    ExperimentConfig cfg;
    std::map<std::string, Section> sections;
    auto add = [&](const std::string& sec, const std::string& key, auto&& apply) {
        const std::string field = "[" + sec + "] " + key;
        sections[sec][key] = [field, apply](const std::string& s) { apply(field, s); };
    };
    auto real_key = [&](const std::string& sec, const std::string& key, double& dst) {
        add(sec, key, [&dst](const std::string& f, const std::string& s) { dst = parse_real(f, s); });
    };
    auto opt_real_key = [&](const std::string& sec, const std::string& key, std::optional<double>& dst) {
        add(sec, key, [&dst](const std::string& f, const std::string& s) { dst = parse_real(f, s); });
    };
    auto size_key = [&](const std::string& sec, const std::string& key, std::size_t& dst) {
        add(sec, key, [&dst](const std::string& f, const std::string& s) {
            dst = static_cast<std::size_t>(parse_unsigned(f, s));
        });
    };
    auto text_key = [&](const std::string& sec, const std::string& key, std::string& dst) {
        add(sec, key, [&dst](const std::string&, const std::string& s) { dst = s; });
    };

    add("run", "experiment", [&cfg](const std::string& f, const std::string& s) {
        one_of(f, s, {"master", "trajectories", "scheme_a", "scheme_b", "protection"});
        for (auto e : {Experiment::master, Experiment::trajectories, Experiment::scheme_a, Experiment::scheme_b,
                       Experiment::protection})
            if (to_string(e) == s) cfg.experiment = e;
    });

    real_key("grid", "t_final", cfg.grid.t_final);
    real_key("grid", "dt", cfg.grid.dt);
    size_key("grid", "sample_every", cfg.grid.sample_every);

    size_key("ensemble", "n_traj", cfg.ensemble.n_traj);
    add("ensemble", "master_seed", [&cfg](const std::string& f, const std::string& s) {
        cfg.ensemble.master_seed = parse_unsigned(f, s);
    });
    add("ensemble", "threads", [&cfg](const std::string& f, const std::string& s) {
        cfg.ensemble.threads = static_cast<unsigned>(parse_unsigned(f, s));
    });

    text_key("output", "file", cfg.output.file);

    text_key("rates", "system", cfg.rates.system);
    real_key("rates", "gamma_minus", cfg.rates.gamma_minus);
    real_key("rates", "gamma_plus", cfg.rates.gamma_plus);
    size_key("rates", "n_trunc", cfg.rates.n_trunc);
    size_key("rates", "initial", cfg.rates.initial);

    text_key("unravelling", "preset", cfg.unravelling.preset);
    real_key("unravelling", "phase", cfg.unravelling.phase);
    add("unravelling", "u", [&cfg](const std::string& f, const std::string& s) {
        try {
            cfg.unravelling.u = parse_complex_matrix(s);
        } catch (const ConfigError& e) {
            fail(f, e.what());
        }
    });

    auto& a = cfg.scheme_a;
    real_key("scheme_a", "lambda1", a.params.lambda1);
    real_key("scheme_a", "lambda2", a.params.lambda2);
    real_key("scheme_a", "dt1", a.params.dt1);
    real_key("scheme_a", "dt2", a.params.dt2);
    real_key("scheme_a", "r", a.params.r);
    size_key("scheme_a", "n_trunc", a.params.n_trunc);
    opt_real_key("scheme_a", "r_e", a.params.r_e);
    opt_real_key("scheme_a", "r_g", a.params.r_g);
    opt_real_key("scheme_a", "n_bar", a.params.n_bar);
    text_key("scheme_a", "rotation", a.rotation);
    real_key("scheme_a", "phase", a.phase);
    text_key("scheme_a", "mode", a.mode);
    size_key("scheme_a", "initial_fock", a.initial_fock);

    auto& b = cfg.scheme_b;
    real_key("scheme_b", "kappa", b.params.kappa);
    real_key("scheme_b", "lambda_ge", b.params.lambda_ge);
    real_key("scheme_b", "lambda_ie", b.params.lambda_ie);
    real_key("scheme_b", "omega_drive", b.params.omega_drive);
    real_key("scheme_b", "gamma_nat", b.params.gamma_nat);
    real_key("scheme_b", "Gamma_nat", b.params.Gamma_nat);
    real_key("scheme_b", "delta_ge", b.params.delta_ge);
    size_key("scheme_b", "n_trunc_R", b.params.n_trunc_R);
    size_key("scheme_b", "n_trunc_L", b.params.n_trunc_L);
    real_key("scheme_b", "omega_e", b.params.omega_e);
    real_key("scheme_b", "omega_i", b.params.omega_i);
    real_key("scheme_b", "omega_R", b.params.omega_R);
    real_key("scheme_b", "omega_L", b.params.omega_L);
    text_key("scheme_b", "initial", b.initial);

    real_key("protection", "gamma", cfg.protection.gamma);
    real_key("protection", "master_step", cfg.protection.master_step);
    real_key("protection", "threshold", cfg.protection.threshold);

    for (const auto& [sec_name, sec] : tree) {
        if (sec_name == "manifest" || sec_name == "results") continue;
        if (sec.empty() && !sec.data().empty()) fail(sec_name, "key outside of any section");
        const auto found = sections.find(sec_name);
        if (found == sections.end()) fail("[" + sec_name + "]", "unknown section");
        for (const auto& [key, node] : sec) {
            const auto setter = found->second.find(key);
            if (setter == found->second.end()) fail("[" + sec_name + "] " + key, "unknown key");
            setter->second(node.data());
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& cfg) {
    const auto& g = cfg.grid;
    if (!(g.t_final > 0.0)) fail("[grid] t_final", "must be positive");
    if (g.sample_every == 0) fail("[grid] sample_every", "must be at least 1");
    const bool uses_dt = cfg.experiment != Experiment::scheme_a;
    if (uses_dt && !(g.dt > 0.0)) fail("[grid] dt", "must be positive");
    if (uses_dt && g.dt > g.t_final) fail("[grid] dt", "larger than t_final");

    const std::string file = cfg.output_file();
    if (file.find_first_of("/\\") != std::string::npos || file == "." || file == "..") {
        fail("[output] file", "must be a plain file name; use --out-dir for the directory");
    }

    const bool ensemble = cfg.experiment == Experiment::trajectories || cfg.experiment == Experiment::protection ||
                          (cfg.experiment == Experiment::scheme_a && cfg.scheme_a.mode == "monitored");
    if (ensemble && cfg.ensemble.n_traj == 0) fail("[ensemble] n_traj", "must be at least 1");

    switch (cfg.experiment) {
        case Experiment::master:
        case Experiment::trajectories: {
            const auto& r = cfg.rates;
            one_of("[rates] system", r.system, {"field", "qubit"});
            if (!(r.gamma_minus >= 0.0)) fail("[rates] gamma_minus", "must be non-negative");
            if (!(r.gamma_plus >= 0.0)) fail("[rates] gamma_plus", "must be non-negative");
            if (r.system == "field" && r.n_trunc < 2) fail("[rates] n_trunc", "must be at least 2");
            if (r.initial >= rates_dim(r)) fail("[rates] initial", "outside the truncated space");
            require_step("[grid] dt", rates_model(r), g.dt);
            if (cfg.experiment == Experiment::master) break;

            const auto& u = cfg.unravelling;
            one_of("[unravelling] preset", u.preset, {"none", "balanced"});
            if (u.u && u.preset != "none") fail("[unravelling] u", "cannot be combined with a preset");
            const OperatorMatrix lower = r.system == "qubit" ? sigma_minus() : annihilation_op(r.n_trunc);
            const OperatorMatrix raise = r.system == "qubit" ? sigma_plus() : creation_op(r.n_trunc);
            ChannelSet cs;
            checked("[grid] dt", [&] { cs = build_jump_channels({{r.gamma_minus, lower}, {r.gamma_plus, raise}}, g.dt); });
            if (u.u) checked("[unravelling] u", [&] { mix_channels(cs, *u.u); });
            break;
        }
        case Experiment::scheme_a: {
            const auto& a = cfg.scheme_a;
            checked("[scheme_a]", [&] { a.params.validate(); });
            one_of("[scheme_a] rotation", a.rotation, {"identity", "pi_half_gi"});
            one_of("[scheme_a] mode", a.mode, {"traced", "monitored"});
            if (a.initial_fock >= a.params.n_trunc) fail("[scheme_a] initial_fock", "outside the truncated space");
            break;
        }
        case Experiment::scheme_b: {
            const auto& b = cfg.scheme_b;
            checked("[scheme_b]", [&] { b.params.validate(); });
            one_of("[scheme_b] initial", b.initial, {"g", "e", "i"});
            require_step("[grid] dt", scheme_b::full_model(b.params), g.dt);
            break;
        }
        case Experiment::protection: {
            const auto& p = cfg.protection;
            if (!(p.gamma > 0.0)) fail("[protection] gamma", "must be positive");
            if (!(p.threshold > 0.0 && p.threshold <= 1.0)) fail("[protection] threshold", "must lie in (0, 1]");
            if (!(p.master_step > 0.0)) fail("[protection] master_step", "must be positive");
            checked("[grid] dt", [&] { entanglement::protection_channels(p.gamma, g.dt); });
            require_step("[protection] master_step", entanglement::local_bath_model(p.gamma), p.master_step);
            break;
        }
    }
}

std::string echo_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "[run]\nexperiment = " << to_string(cfg.experiment) << "\n\n";
    os << "[grid]\nt_final = " << real(cfg.grid.t_final) << "\n";
    if (cfg.experiment != Experiment::scheme_a) os << "dt = " << real(cfg.grid.dt) << "\n";
    os << "sample_every = " << cfg.grid.sample_every << "\n\n";
    os << "[ensemble]\nn_traj = " << cfg.ensemble.n_traj << "\nmaster_seed = " << cfg.ensemble.master_seed
       << "\nthreads = " << cfg.ensemble.threads << "\n\n";
    os << "[output]\nfile = " << cfg.output_file() << "\n\n";

    switch (cfg.experiment) {
        case Experiment::master:
        case Experiment::trajectories: {
            const auto& r = cfg.rates;
            os << "[rates]\nsystem = " << r.system << "\ngamma_minus = " << real(r.gamma_minus)
               << "\ngamma_plus = " << real(r.gamma_plus) << "\nn_trunc = " << r.n_trunc << "\ninitial = " << r.initial
               << "\n";
            if (cfg.experiment == Experiment::trajectories) {
                const auto& u = cfg.unravelling;
                os << "\n[unravelling]\npreset = " << u.preset << "\nphase = " << real(u.phase) << "\n";
                if (u.u) os << "u = " << matrix_text(*u.u) << "\n";
            }
            break;
        }
        case Experiment::scheme_a: {
            const auto& a = cfg.scheme_a;
            const auto& p = a.params;
            os << "[scheme_a]\nlambda1 = " << real(p.lambda1) << "\nlambda2 = " << real(p.lambda2)
               << "\ndt1 = " << real(p.dt1) << "\ndt2 = " << real(p.dt2) << "\nr = " << real(p.r)
               << "\nn_trunc = " << p.n_trunc << "\n";
            if (p.r_e) os << "r_e = " << real(*p.r_e) << "\n";
            if (p.r_g) os << "r_g = " << real(*p.r_g) << "\n";
            if (p.n_bar) os << "n_bar = " << real(*p.n_bar) << "\n";
            os << "rotation = " << a.rotation << "\nphase = " << real(a.phase) << "\nmode = " << a.mode
               << "\ninitial_fock = " << a.initial_fock << "\n";
            break;
        }
        case Experiment::scheme_b: {
            const auto& p = cfg.scheme_b.params;
            os << "[scheme_b]\nkappa = " << real(p.kappa) << "\nlambda_ge = " << real(p.lambda_ge)
               << "\nlambda_ie = " << real(p.lambda_ie) << "\nomega_drive = " << real(p.omega_drive)
               << "\ngamma_nat = " << real(p.gamma_nat) << "\nGamma_nat = " << real(p.Gamma_nat)
               << "\ndelta_ge = " << real(p.delta_ge) << "\nn_trunc_R = " << p.n_trunc_R
               << "\nn_trunc_L = " << p.n_trunc_L << "\nomega_e = " << real(p.omega_e)
               << "\nomega_i = " << real(p.omega_i) << "\nomega_R = " << real(p.omega_R)
               << "\nomega_L = " << real(p.omega_L) << "\ninitial = " << cfg.scheme_b.initial << "\n";
            break;
        }
        case Experiment::protection: {
            const auto& p = cfg.protection;
            os << "[protection]\ngamma = " << real(p.gamma) << "\nmaster_step = " << real(p.master_step)
               << "\nthreshold = " << real(p.threshold) << "\n";
            break;
        }
    }
    return os.str();
}

}  // namespace cqed::runner
