#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include <CLI11.hpp>

#include "vibro/contact.hpp"
#include "vibro/hybrid_sim.hpp"
#include "vibro/ident.hpp"
#include "vibro/signal_io.hpp"

namespace vibro::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::pair<const char*, double RunConfig::*>> kDoubleKeys = {
    {"k", &RunConfig::k},
    {"alpha", &RunConfig::alpha},
    {"n", &RunConfig::n},
    {"xc", &RunConfig::xc},
    {"b", &RunConfig::b},
    {"m2", &RunConfig::m2},
    {"v_platform", &RunConfig::v_platform},
    {"v2", &RunConfig::v2},
    {"gap", &RunConfig::gap},
    {"t_end", &RunConfig::t_end},
    {"sample_rate", &RunConfig::sample_rate},
    {"dt", &RunConfig::dt},
    {"tol_event", &RunConfig::tol_event},
    {"fc", &RunConfig::fc},
    {"noise", &RunConfig::noise},
    {"amplitude", &RunConfig::amplitude},
    {"freq", &RunConfig::freq},
    {"decay", &RunConfig::decay},
};

const std::vector<std::pair<const char*, int RunConfig::*>> kIntKeys = {
    {"event_cap", &RunConfig::event_cap},
    {"cycles", &RunConfig::cycles},
    {"samples_per_cycle", &RunConfig::samples_per_cycle},
    {"max_evals", &RunConfig::max_evals},
    {"starts", &RunConfig::starts},
    {"profile_grid", &RunConfig::profile_grid},
};

const std::vector<std::pair<const char*, std::string RunConfig::*>> kStringKeys = {
    {"command", &RunConfig::command},
    {"preset", &RunConfig::preset},
    {"scenario", &RunConfig::scenario},
    {"alphas", &RunConfig::alphas},
    {"input", &RunConfig::input},
    {"free", &RunConfig::free},
    {"bounds", &RunConfig::bounds},
    {"out", &RunConfig::out},
};

std::string flag_name(const char* key) {
    std::string f = std::string("--") + key;
    for (char& c : f) {
        if (c == '_') c = '-';
    }
    return f;
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " value '" + s + "'");
    }
}

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<std::string> provenance(const RunConfig& cfg) { return {"run_config " + cfg.to_json().dump()}; }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream open_text(const fs::path& path) {
    std::ofstream os(path, std::ios::out | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

void write_run_config(const RunConfig& cfg) {
    auto os = open_text(fs::path(cfg.out) / "run_config.json");
    os << cfg.to_json().dump(2) << '\n';
    if (!os) throw IoError("write to run_config.json failed");
}

Scenario build_scenario(const RunConfig& cfg) {
    const SystemParams params = cfg.params();
    Scenario sc;
    if (cfg.scenario == "idle-impulse") {
        sc = make_idle_impulse(params, std::abs(cfg.v2), cfg.gap, cfg.t_end);
    } else {
        sc = make_constant_drag(params, cfg.gap, cfg.t_end);
    }
    if (!(cfg.sample_rate > 0)) throw ConfigError("sample_rate must be positive");
    sc.dt = 1.0 / cfg.sample_rate;
    try {
        require_valid(sc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return sc;
}

IntegratorConfig build_integrator(const RunConfig& cfg) {
    IntegratorConfig ic;
    ic.dt = cfg.dt;
    ic.tol_event = cfg.tol_event;
    ic.max_events = cfg.event_cap;
    try {
        require_valid(ic);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return ic;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const Scenario sc = build_scenario(cfg);
    const IntegratorConfig ic = build_integrator(cfg);
    const Trajectory traj = simulate(sc, ic);

    ensure_dir(cfg.out);
    const auto comments = provenance(cfg);
    export_trajectory(traj, fs::path(cfg.out) / "trajectory.csv", comments);

    auto os = open_text(fs::path(cfg.out) / "events.txt");
    for (const auto& c : comments) os << "# " << c << '\n';
    for (const auto& e : traj.events) {
        os << to_string(e.kind) << " t=" << format_number(e.t_event)
           << " x2=" << format_number(e.state_at_event.x2) << " v2=" << format_number(e.state_at_event.v2);
        if (e.kind == EventKind::Impact) os << " v_in=" << format_number(e.v_in);
        os << '\n';
    }
    for (const auto& w : traj.warnings) os << "warning: " << w << '\n';
    if (!os) throw IoError("write to events.txt failed");

    if (cfg.noise > 0 && !traj.samples.empty()) {
        const MeasuredTrace m = synthesize_trace(sc, ic, cfg.noise, cfg.seed);
        write_columns(fs::path(cfg.out) / "measured.csv", {"t", "x1", "x2"}, {m.t, *m.x1, m.x2}, comments);
    }
    write_run_config(cfg);

    out << "samples=" << traj.samples.size() << " impacts=" << traj.count(EventKind::Impact)
        << " separations=" << traj.count(EventKind::Separation)
        << " stick=" << traj.count(EventKind::StickOnset) << " slip=" << traj.count(EventKind::SlipOnset);
    if (!traj.samples.empty()) out << " final_mode=" << to_string(traj.samples.back().state.mode);
    out << '\n';
    for (const auto& w : traj.warnings) out << "warning: " << w << '\n';
    return kOk;
}

int cmd_hysteresis(const RunConfig& cfg, std::ostream& out) {
    std::vector<double> alphas;
    for (const auto& s : split_list(cfg.alphas)) {
        const double a = parse_double(s, "alpha");
        if (a < 0) throw ConfigError("alpha values must be >= 0");
        alphas.push_back(a);
    }
    if (alphas.empty()) throw ConfigError("empty alpha list");

    Eigen::VectorXd profile;
    try {
        profile = decaying_cycle_profile(cfg.amplitude, cfg.freq, cfg.decay, cfg.cycles, cfg.samples_per_cycle);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const double dt = 1.0 / (cfg.freq * cfg.samples_per_cycle);

    ensure_dir(cfg.out);
    const auto comments = provenance(cfg);
    auto summary = open_text(fs::path(cfg.out) / "loop_energy.txt");
    for (const auto& c : comments) summary << "# " << c << '\n';
    summary << "alpha,loop_energy\n";
    for (double a : alphas) {
        SystemParams params = cfg.params();
        params.alpha = a;
        const auto trace = hysteresis_trace(profile, dt, params);
        const double energy = loop_energy(trace);
        export_hysteresis(trace, fs::path(cfg.out) / ("hysteresis_alpha_" + short_number(a) + ".csv"), comments);
        summary << format_number(a) << ',' << format_number(energy) << '\n';
        out << "alpha=" << short_number(a) << " loop_energy=" << format_number(energy) << " J\n";
    }
    if (!summary) throw IoError("write to loop_energy.txt failed");
    write_run_config(cfg);
    return kOk;
}

std::pair<double, double> default_bounds(FitParam which, const SystemParams& p) {
    switch (which) {
        case FitParam::K: return {p.k / 10.0, p.k * 10.0};
        case FitParam::Alpha: return {0.0, std::max(2.0, 4.0 * p.alpha)};
        case FitParam::Xc: return {p.x_c - kDefaultXcWindow, p.x_c + kDefaultXcWindow};
        case FitParam::B: return {p.b / 2.0, p.b * 2.0};
        case FitParam::N: return {1.0, 2.0};
    }
    return {0.0, 1.0};
}

std::vector<FreeParam> parse_free(const RunConfig& cfg, const SystemParams& p) {
    std::map<FitParam, std::pair<double, double>> explicit_bounds;
    for (const auto& item : split_list(cfg.bounds)) {
        const auto eq = item.find('=');
        const auto colon = item.find(':', eq == std::string::npos ? 0 : eq);
        if (eq == std::string::npos || colon == std::string::npos)
            throw ConfigError("malformed bounds entry '" + item + "', expected name=lower:upper");
        const auto which = fit_param_from_string(item.substr(0, eq));
        if (!which) throw ConfigError("unknown parameter in bounds: " + item.substr(0, eq));
        const double lo = parse_double(item.substr(eq + 1, colon - eq - 1), "bound");
        const double hi = parse_double(item.substr(colon + 1), "bound");
        if (!(lo < hi)) throw ConfigError("bounds of " + item.substr(0, eq) + " are not ordered");
        explicit_bounds[*which] = {lo, hi};
    }
    std::vector<FreeParam> free;
    for (const auto& name : split_list(cfg.free)) {
        const auto which = fit_param_from_string(name);
        if (!which) throw ConfigError("unknown free parameter: " + name);
        const auto it = explicit_bounds.find(*which);
        const auto [lo, hi] = it != explicit_bounds.end() ? it->second : default_bounds(*which, p);
        free.push_back({*which, lo, hi});
    }
    if (free.empty()) throw ConfigError("no free parameters given");
    return free;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
    if (cfg.input.empty()) throw ConfigError("fit requires --input");
    MeasuredTrace trace = load_csv(cfg.input);

    const Scenario sc = build_scenario(cfg);
    const IntegratorConfig ic = build_integrator(cfg);
    FitProblem problem{std::move(trace), sc, parse_free(cfg, sc.params), {}, ic};
    try {
        require_valid(problem);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    Eigen::VectorXd init(static_cast<Eigen::Index>(problem.free.size()));
    for (std::size_t j = 0; j < problem.free.size(); ++j) {
        const auto& fp = problem.free[j];
        init[static_cast<Eigen::Index>(j)] = std::clamp(get_param(sc.params, fp.which), fp.lower, fp.upper);
    }
    FitConfig fc;
    fc.max_evals = cfg.max_evals;
    fc.n_starts = cfg.starts;
    fc.seed = cfg.seed;
    if (fc.max_evals < 1 || fc.n_starts < 1) throw ConfigError("max_evals and starts must be positive");
    const FitResult r = fit(problem, init, fc);

    ensure_dir(cfg.out);
    const auto comments = provenance(cfg);
    export_trajectory(r.trace_hat, fs::path(cfg.out) / "fit_trajectory.csv", comments);

    auto os = open_text(fs::path(cfg.out) / "fit_report.txt");
    for (const auto& c : comments) os << "# " << c << '\n';
    os << "converged=" << (r.converged ? "true" : "false") << '\n';
    os << "rmse=" << format_number(r.rmse) << '\n';
    os << "objective=" << format_number(r.objective) << '\n';
    os << "n_evals=" << r.n_evals << '\n';
    for (std::size_t j = 0; j < problem.free.size(); ++j) {
        os << to_string(problem.free[j].which) << '=' << format_number(r.params_hat[static_cast<Eigen::Index>(j)])
           << '\n';
    }
    os << "unidentifiable=";
    if (r.unidentifiable.empty()) os << "none";
    for (std::size_t j = 0; j < r.unidentifiable.size(); ++j) os << (j ? "," : "") << to_string(r.unidentifiable[j]);
    os << '\n';
    if (!os) throw IoError("write to fit_report.txt failed");

    if (cfg.profile_grid > 1) {
        const FreeParam* kp = nullptr;
        const FreeParam* ap = nullptr;
        for (const auto& fp : problem.free) {
            if (fp.which == FitParam::K) kp = &fp;
            if (fp.which == FitParam::Alpha) ap = &fp;
        }
        if (!kp || !ap) throw ConfigError("profile_grid requires k and alpha among the free parameters");
        std::vector<double> kg, ag;
        for (int i = 0; i < cfg.profile_grid; ++i) {
            const double s = static_cast<double>(i) / (cfg.profile_grid - 1);
            kg.push_back(kp->lower + s * (kp->upper - kp->lower));
            ag.push_back(ap->lower + s * (ap->upper - ap->lower));
        }
        const Eigen::MatrixXd surface = profile_coupling(problem, kg, ag);
        const auto cells = static_cast<Eigen::Index>(kg.size() * ag.size());
        Eigen::VectorXd ck(cells), ca(cells), cv(cells);
        for (Eigen::Index c = 0; c < cells; ++c) {
            const Eigen::Index i = c / static_cast<Eigen::Index>(ag.size());
            const Eigen::Index j = c % static_cast<Eigen::Index>(ag.size());
            ck[c] = kg[static_cast<std::size_t>(i)];
            ca[c] = ag[static_cast<std::size_t>(j)];
            cv[c] = surface(i, j);
        }
        write_columns(fs::path(cfg.out) / "profile.csv", {"k", "alpha", "objective"}, {ck, ca, cv}, comments);
    }
    write_run_config(cfg);

    out << "converged=" << (r.converged ? "true" : "false") << " rmse=" << format_number(r.rmse)
        << " n_evals=" << r.n_evals;
    for (std::size_t j = 0; j < problem.free.size(); ++j)
        out << ' ' << to_string(problem.free[j].which) << '=' << format_number(r.params_hat[static_cast<Eigen::Index>(j)]);
    for (auto p : r.unidentifiable) out << "\nwarning: " << to_string(p) << " is unidentifiable from this trace";
    out << '\n';
    return kOk;
}

int cmd_process(const RunConfig& cfg, std::ostream& out) {
    if (cfg.input.empty()) throw ConfigError("process requires --input");
    const MeasuredTrace trace = load_csv(cfg.input);
    if (!(cfg.fc > 0) || !(cfg.fc < 0.5 * trace.fs))
        throw ConfigError("cutoff " + short_number(cfg.fc) + " Hz must lie in (0, " +
                          short_number(0.5 * trace.fs) + ") Hz");
    const Eigen::VectorXd v = estimate_velocity(trace.x2, trace.fs, cfg.fc);

    ensure_dir(cfg.out);
    write_columns(fs::path(cfg.out) / "velocity.csv", {"t", "x2", "v2"}, {trace.t, trace.x2, v}, provenance(cfg));
    write_run_config(cfg);
    out << "samples=" << trace.size() << " fs=" << short_number(trace.fs) << " fc=" << short_number(cfg.fc) << '\n';
    return kOk;
}

}  // namespace

json RunConfig::to_json() const {
    json j = json::object();
    for (const auto& [key, ptr] : kDoubleKeys) j[key] = this->*ptr;
    for (const auto& [key, ptr] : kIntKeys) j[key] = this->*ptr;
    for (const auto& [key, ptr] : kStringKeys) j[key] = this->*ptr;
    j["seed"] = seed;
    return j;
}

SystemParams RunConfig::params() const {
    auto p = preset_by_name(preset);
    if (!p) throw ConfigError("unknown preset: " + preset);
    p->k = k;
    p->alpha = alpha;
    p->n = n;
    p->x_c = xc;
    p->b = b;
    p->m2 = m2;
    p->v_platform = v_platform;
    const auto violations = validate(*p);
    if (!violations.empty()) {
        std::string msg = "invalid parameters:";
        for (const auto& v : violations) msg += " " + v.field + " " + v.message + ";";
        throw ConfigError(msg);
    }
    return *p;
}

RunConfig resolve(const std::string& command, const json& merged) {
    if (!merged.is_object()) throw ConfigError("configuration must be a flat JSON object");
    RunConfig rc;
    rc.command = command;
    if (merged.contains("command") && merged["command"] != command)
        throw ConfigError("config file was written for command '" + merged["command"].dump() + "'");

    rc.preset = merged.value("preset", rc.preset);
    rc.scenario = merged.value("scenario", rc.scenario);
    const auto preset = preset_by_name(rc.preset);
    if (!preset) throw ConfigError("unknown preset: " + rc.preset);
    if (rc.scenario != "idle-impulse" && rc.scenario != "constant-drag")
        throw ConfigError("unknown scenario: " + rc.scenario);

    rc.k = preset->k;
    rc.alpha = preset->alpha;
    rc.n = preset->n;
    rc.xc = preset->x_c;
    rc.b = preset->b;
    rc.m2 = preset->m2;
    rc.v_platform = preset->v_platform;
    const bool idle = rc.scenario == "idle-impulse";
    rc.gap = idle ? 5e-3 : 2e-3;
    rc.t_end = idle ? 0.4 : 5.0;

    for (const auto& [key, value] : merged.items()) {
        bool known = false;
        for (const auto& [name, ptr] : kDoubleKeys) {
            if (key != name) continue;
            if (!value.is_number()) throw ConfigError("'" + key + "' must be a number");
            rc.*ptr = value.get<double>();
            known = true;
        }
        for (const auto& [name, ptr] : kIntKeys) {
            if (key != name) continue;
            if (!value.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
            rc.*ptr = value.get<int>();
            known = true;
        }
        for (const auto& [name, ptr] : kStringKeys) {
            if (key != name) continue;
            if (!value.is_string()) throw ConfigError("'" + key + "' must be a string");
            if (key != "command") rc.*ptr = value.get<std::string>();
            known = true;
        }
        if (key == "seed") {
            if (!value.is_number_unsigned() && !value.is_number_integer())
                throw ConfigError("'seed' must be a non-negative integer");
            rc.seed = value.get<std::uint64_t>();
            known = true;
        }
        if (!known) throw ConfigError("unknown configuration key '" + key + "'");
    }
    return rc;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command == "simulate") return cmd_simulate(cfg, out);
        if (cfg.command == "hysteresis") return cmd_hysteresis(cfg, out);
        if (cfg.command == "fit") return cmd_fit(cfg, out);
        if (cfg.command == "process") return cmd_process(cfg, out);
        err << "error: unknown command '" << cfg.command << "'\n";
        return kConfigError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ChatteringError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const CsvError& e) {
        err << "input error: " << e.what() << '\n';
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Friction and vibro-impact simulator for an active-passive mechanical pair", "vibro"};
    app.require_subcommand(1);

    json flags = json::object();
    std::string config_path;
    std::map<std::string, std::string> help = {
        {"preset", "steel | aluminium"},
        {"scenario", "idle-impulse | constant-drag"},
        {"k", "contact stiffness [N/m^n]"},
        {"alpha", "restitution slope [s/m]"},
        {"n", "contact exponent"},
        {"xc", "impact position [m]"},
        {"b", "Coulomb friction force [N]"},
        {"v2", "idle-impulse launch speed toward the wall [m/s] (sign ignored)"},
        {"v_platform", "platform velocity [m/s]"},
        {"t_end", "simulated horizon [s]"},
        {"dt", "integrator base step [s]"},
        {"fc", "low-pass cutoff [Hz]"},
        {"seed", "random seed"},
        {"out", "output directory"},
        {"input", "input trace CSV (t,x2 or t,x1,x2)"},
        {"alphas", "comma-separated alpha list for hysteresis"},
        {"free", "comma-separated free parameters from k,alpha,xc,b,n"},
        {"bounds", "fit bounds, e.g. k=1000:100000,alpha=0:2"},
        {"noise", "std of Gaussian noise for measured.csv [m]"},
        {"gap", "initial distance in front of the wall [m]"},
        {"event_cap", "events allowed inside one integrator step"},
        {"m2", "passive body mass [kg]"},
        {"sample_rate", "export sample rate [Hz]"},
        {"tol_event", "event localization width [s]"},
        {"amplitude", "hysteresis profile amplitude [m]"},
        {"freq", "hysteresis profile frequency [Hz]"},
        {"decay", "hysteresis profile decay rate [1/s]"},
        {"cycles", "hysteresis profile cycles"},
        {"samples_per_cycle", "hysteresis profile samples per cycle"},
        {"max_evals", "fit objective evaluation budget"},
        {"starts", "fit multi-start count"},
        {"profile_grid", "k x alpha grid size for profile.csv (0 = off)"},
    };
    auto describe = [&](const char* key) {
        const auto it = help.find(key);
        return it == help.end() ? std::string{} : it->second;
    };

    auto add_options = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat JSON configuration file");
        for (const auto& [key, ptr] : kDoubleKeys) {
            const std::string k = key;
            sub->add_option_function<double>(flag_name(key), [&flags, k](const double& v) { flags[k] = v; },
                                             describe(key));
        }
        for (const auto& [key, ptr] : kIntKeys) {
            const std::string k = key;
            sub->add_option_function<int>(flag_name(key), [&flags, k](const int& v) { flags[k] = v; },
                                          describe(key));
        }
        for (const auto& [key, ptr] : kStringKeys) {
            if (std::string(key) == "command") continue;
            const std::string k = key;
            sub->add_option_function<std::string>(
                flag_name(key), [&flags, k](const std::string& v) { flags[k] = v; }, describe(key));
        }
        sub->add_option_function<std::uint64_t>("--seed", [&flags](const std::uint64_t& v) { flags["seed"] = v; },
                                                describe("seed"));
    };

    for (const char* name : {"simulate", "hysteresis", "fit", "process"}) {
        add_options(app.add_subcommand(name, std::string("run ") + name));
    }

    std::vector<std::string> storage = args;
    storage.insert(storage.begin(), "vibro");
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    std::string command;
    for (auto* sub : app.get_subcommands()) command = sub->get_name();

    json merged = json::object();
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) {
            err << "i/o error: cannot open config file " << config_path << '\n';
            return kIoError;
        }
        try {
            merged = json::parse(is);
        } catch (const json::parse_error& e) {
            err << "config error: " << e.what() << '\n';
            return kConfigError;
        }
    }
    if (!merged.is_object()) {
        err << "config error: configuration must be a flat JSON object\n";
        return kConfigError;
    }
    merged.update(flags);

    RunConfig rc;
    try {
        rc = resolve(command, merged);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    return run(rc, out, err);
}

}  // namespace vibro::cli
