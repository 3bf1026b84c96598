#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anoninf/anoninf.hpp"

using namespace anoninf;

namespace {

constexpr int exit_ok = 0, exit_invalid = 1, exit_mismatch = 2;

void emit(const Json& j, const std::string& out_path, bool to_stdout) {
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw ConstraintViolation("cannot write " + out_path);
        f << j.dump(2) << '\n';
    }
    if (to_stdout) std::cout << j.dump(2) << '\n';
}

std::string set_text(StateSet s) { return s.to_string(); }

std::string states_text(std::span<const StateSet> states, std::size_t limit = 12) {
    std::string out;
    for (std::size_t i = 0; i < states.size() && i < limit; ++i) out += (i ? " " : "") + set_text(states[i]);
    if (states.size() > limit) out += " ... (" + std::to_string(states.size()) + " states)";
    return out;
}

StateSet parse_state(const std::string& text, int n) {
    std::uint64_t bits = 0;
    try {
        std::size_t used = 0;
        bits = std::stoull(text, &used, 0);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw ConstraintViolation("initial state must be a bitmask integer, got '" + text + "'");
    }
    if (n < 64 && (bits >> n) != 0) throw ConstraintViolation("initial state has agents outside 0..n-1");
    return StateSet(bits);
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConstraintViolation("not a number: '" + item + "'");
        }
    }
    return out;
}

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

void print_model(const Model& m) {
    const auto& c = m.society;
    std::cout << "n=" << c.n << " n_c=" << c.n_c << " n_a=" << c.n_a << " n_m=" << c.n_m << " Z=(" << m.z.l_c << ","
              << m.z.r_c << "," << m.z.l_a << "," << m.z.r_a << ")\n";
}

int cmd_validate(const std::string& path) {
    const auto sc = load_scenario(path);
    std::cout << "valid: ";
    print_model(sc.model);
    return exit_ok;
}

int cmd_classify(const std::string& path, bool with_states, bool json) {
    const auto sc = load_scenario(path);
    const auto pred = predict(sc.model);
    if (json) {
        emit(to_json(pred, sc.model.society, with_states), "", true);
        return exit_ok;
    }
    print_model(sc.model);
    std::cout << "predicted classes:";
    for (auto id : pred.classes) std::cout << ' ' << id.to_string();
    std::cout << '\n';
    for (const auto& ce : pred.cases) {
        std::cout << (ce.fired ? "  [fired] " : ce.overridden ? "  [overridden] " : "  [ ] ") << ce.id.to_string()
                  << ' ' << describe(canonical_form(ce.id)) << '\n';
        for (const auto& x : ce.conditions)
            std::cout << "      " << (x.holds ? "true " : "false") << "  " << x.expr << "  [" << x.values << "]\n";
    }
    if (with_states)
        for (auto id : pred.classes) {
            const auto mat = materialize(canonical_form(id), sc.model.society);
            std::cout << id.to_string() << " period " << mat.signature.period << ':';
            for (const auto& b : mat.blocks) std::cout << "\n  block " << states_text(b);
            std::cout << '\n';
        }
    return exit_ok;
}

int cmd_enumerate(const std::string& path, const std::string& initial_text, bool json, int jobs) {
    (void)jobs;
    const auto sc = load_scenario(path);
    const PossibilityDigraph g(sc.model);
    const auto classes = absorbing_classes(g);
    const auto rules = sc.agent_rules();
    Json out{{"scenario", to_json(sc.model)}, {"classes", Json::array()}};
    for (const auto& cls : classes) {
        auto j = to_json(cls, sc.model.society);
        const auto pi = stationary_within(g, cls, rules);
        j["stationary"] = pi;
        out["classes"].push_back(j);
    }
    if (!initial_text.empty()) {
        const StateSet init = parse_state(initial_text, sc.model.society.n);
        out["initial"] = init.bits();
        out["absorption"] = absorption_probabilities(g, classes, rules, init);
    }
    if (json) {
        emit(out, "", true);
        return exit_ok;
    }
    print_model(sc.model);
    std::cout << classes.size() << " absorbing class" << (classes.size() == 1 ? "" : "es") << '\n';
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto& cls = classes[i];
        const auto match = match_canonical(cls.signature(), sc.model.society);
        std::cout << "class " << i << ": period " << cls.period << ", " << cls.states.size() << " states, canonical "
                  << (match.canonical ? match.canonical->to_string() : "none");
        for (std::size_t k = 1; k < match.all.size(); ++k) std::cout << '=' << match.all[k].to_string();
        std::cout << '\n';
        for (const auto& b : cls.blocks) std::cout << "  block " << states_text(b) << '\n';
    }
    if (out.contains("absorption")) {
        std::cout << "absorption from " << set_text(StateSet(out["initial"].get<std::uint64_t>())) << ':';
        for (double p : out["absorption"]) std::cout << ' ' << fmt_double(p);
        std::cout << '\n';
    }
    return exit_ok;
}

struct VerifyFlags {
    int n_min = 2, n_max = 4;
    bool mixed = false, degenerate = false, tables = false, symmetry = false, json = false;
    std::string allow, out;
    std::uint64_t seed = 0;
    double rate = 1.0;
    int jobs = 0;
};

int cmd_verify(const VerifyFlags& f) {
    SweepSpec spec;
    spec.n_min = f.n_min;
    spec.n_max = f.n_max;
    spec.mode = f.mixed ? SweepMode::mixed : f.degenerate ? SweepMode::degenerate : SweepMode::pure;
    spec.seed = f.seed;
    spec.rate = f.rate;
    spec.jobs = f.jobs;
    if (f.n_min < 1 || f.n_max > PossibilityDigraph::default_cap || f.n_min > f.n_max)
        throw ConstraintViolation("need 1 <= n-min <= n-max <= " + std::to_string(PossibilityDigraph::default_cap));
    if (!(f.rate > 0.0 && f.rate <= 1.0)) throw ConstraintViolation("rate must lie in (0,1]");
    if (!f.allow.empty()) {
        std::stringstream ss(f.allow);
        for (std::string id; std::getline(ss, id, ',');) {
            try {
                spec.allow.insert(parse_canonical_id(id));
            } catch (const std::exception&) {
                throw ConstraintViolation("unknown canonical id '" + id + "'");
            }
        }
    }
    Json report;
    std::size_t failures = 0;
    std::string summary;
    if (f.tables) {
        const auto r = verify_tables(spec);
        report = to_json(r);
        failures = r.disagreements.size();
        summary = std::to_string(r.scenarios) + " scenarios, " + std::to_string(r.cells_checked) + " cells, " +
                  std::to_string(failures) + " disagreements";
        if (!f.json)
            for (const auto& [cell, k] : r.by_cell) summary += "\n  " + cell + ": " + std::to_string(k);
    } else if (f.symmetry) {
        const auto r = verify_symmetry(spec);
        report = to_json(r);
        failures = r.violations.size();
        summary = std::to_string(r.scenarios) + " scenarios, " + std::to_string(r.pairs_checked) + " pairs, " +
                  std::to_string(failures) + " violations";
    } else {
        const auto r = verify_theorem(spec);
        report = to_json(r);
        failures = r.failures();
        summary = std::to_string(r.checked) + " scenarios (" + to_string(spec.mode) + ", n " + std::to_string(f.n_min) +
                  ".." + std::to_string(f.n_max) + "), " + std::to_string(r.classes_found) + " classes, max period " +
                  std::to_string(r.max_period) + ", " + std::to_string(r.failures()) + " mismatches";
        if (r.mismatches.size() != r.failures())
            summary += " (" + std::to_string(r.mismatches.size() - r.failures()) + " allow-listed)";
        for (const auto& [id, k] : r.spurious_by_case) summary += "\n  spurious " + id + ": " + std::to_string(k);
        for (const auto& [id, k] : r.missed_by_case) summary += "\n  missed " + id + ": " + std::to_string(k);
    }
    emit(report, f.out, f.json);
    if (!f.json) std::cout << summary << '\n';
    return failures ? exit_mismatch : exit_ok;
}

struct SimulateFlags {
    std::string scenario, mode = "agents", initial = "uniform", csv, out;
    std::uint64_t steps = 1000, runs = 1, seed = 0, trace_run = 0;
    bool per_run = false, json = false, stop_on_entry = false;
    int jobs = 0;
};

int cmd_simulate(const SimulateFlags& f) {
    const auto sc = load_scenario(f.scenario);
    const auto& m = sc.model;
    const auto& c = m.society;
    if (f.mode != "agents" && f.mode != "groups") throw ConstraintViolation("mode must be agents or groups");
    if (f.runs == 0) throw ConstraintViolation("runs must be positive");
    SimMode mode = f.mode == "groups" ? SimMode::groups : SimMode::agents;
    const bool uniform = f.initial == "uniform";
    std::optional<StateSet> initial;
    if (!uniform) initial = parse_state(f.initial, std::min(c.n, 64));

    // Classes: brute force while it is cheap, the closed form beyond that.
    std::vector<AbsorbingClass> classes;
    std::vector<GroupSignature> signatures;
    std::vector<std::string> class_names;
    bool exact = c.n <= PossibilityDigraph::default_cap;
    if (exact) {
        classes = absorbing_classes(PossibilityDigraph(m));
        for (const auto& cls : classes) {
            const auto match = match_canonical(cls.signature(), c);
            class_names.push_back(match.canonical ? match.canonical->to_string() : "unmatched");
            auto sig = GroupSignature::from_states(cls.states, c);
            if (!sig && mode == SimMode::groups) {
                std::cerr << "class " << class_names.back() << " is not determined by group counts; using agent mode\n";
                mode = SimMode::agents;
            }
            if (sig) signatures.push_back(*sig);
        }
    } else {
        for (auto id : predict(m).classes) {
            signatures.push_back(GroupSignature::symbolic(canonical_form(id)));
            class_names.push_back(id.to_string());
        }
        std::cerr << "n > " << PossibilityDigraph::default_cap << ": class membership uses the closed-form prediction\n";
    }
    if (mode == SimMode::agents && c.n > 64) throw ConstraintViolation("agent mode needs n <= 64; use --mode groups");
    if (mode == SimMode::agents && !exact) throw ConstraintViolation("agent mode needs n <= 16 for class detection");

    const auto rules = mode == SimMode::agents || sc.rules ? sc.agent_rules() : std::vector<AggregationRule>{};
    std::optional<GroupModel> gm;
    if (mode == SimMode::groups) gm = sc.rules ? GroupModel::from_rules(m, *sc.rules) : GroupModel::ramp(m, sc.alphas);

    RunOptions opt;
    opt.steps = f.steps;
    opt.stop_on_entry = f.stop_on_entry;
    const std::size_t known = mode == SimMode::agents ? classes.size() : signatures.size();
    const auto batch = run_batch(f.runs, known, f.seed, f.jobs, [&](Rng& rng) {
        if (mode == SimMode::agents) {
            const StateSet s0 = initial ? *initial : uniform_state(c.n, rng);
            return run_agents(m, rules, s0, opt, classes, rng);
        }
        const GroupState g0 = initial ? group_state_of(*gm, *initial) : uniform_group_state(*gm, rng);
        return run_groups(*gm, g0, opt, signatures, rng);
    });

    Json report{{"scenario", to_json(m)},
                {"mode", mode == SimMode::agents ? "agents" : "groups"},
                {"steps", f.steps},
                {"runs", f.runs},
                {"seed", f.seed},
                {"initial", f.initial},
                {"classes", class_names},
                {"absorbed", batch.absorbed},
                {"unabsorbed", batch.unabsorbed},
                {"left_class", batch.left_class},
                {"mean_hitting_time", batch.mean_hitting_time}};
    if (f.per_run) {
        Json runs = Json::array();
        for (const auto& r : batch.runs) runs.push_back(to_json(r, mode));
        report["per_run"] = runs;
    }
    if (!f.csv.empty()) {
        if (f.trace_run >= f.runs) throw ConstraintViolation("trace-run must be below runs");
        // replay the traced run with the trajectory recorder on; same substream, same path
        RunOptions trace = opt;
        trace.record_trajectory = true;
        Rng rng = substream(f.seed, f.trace_run);
        TrajectoryStats t;
        if (mode == SimMode::agents)
            t = run_agents(m, rules, initial ? *initial : uniform_state(c.n, rng), trace, classes, rng);
        else
            t = run_groups(*gm, initial ? group_state_of(*gm, *initial) : uniform_group_state(*gm, rng), trace,
                           signatures, rng);
        std::ofstream out(f.csv, std::ios::binary);
        if (!out) throw ConstraintViolation("cannot write " + f.csv);
        out << "step,k_c,k_a,k_m,s\n";
        for (const auto& row : t.trajectory)
            out << row.step << ',' << row.k_c << ',' << row.k_a << ',' << row.k_m << ',' << row.s << '\n';
    }
    emit(report, f.out, f.json);
    if (!f.json) {
        print_model(m);
        std::cout << f.runs << " runs of up to " << f.steps << " steps (" << report["mode"].get<std::string>()
                  << " mode, seed " << f.seed << ")\n";
        for (std::size_t i = 0; i < known; ++i)
            std::cout << "  " << class_names[i] << ": " << batch.absorbed[i] << " ("
                      << fmt_double(double(batch.absorbed[i]) / double(f.runs)) << ")\n";
        std::cout << "  unabsorbed: " << batch.unabsorbed << "\n  mean hitting time: "
                  << fmt_double(batch.mean_hitting_time) << '\n';
    }
    return exit_ok;
}

struct PhaseFlags {
    PhaseConfig cfg;
    std::string gamma = "inf", out;
    std::optional<double> l_c, r_c;
    int back_map_n = 0;
};

int cmd_phase(PhaseFlags f) {
    auto& cfg = f.cfg;
    if (f.gamma == "inf") cfg.gamma = std::numeric_limits<double>::infinity();
    else if (f.gamma == "min") cfg.gamma = 0.0;
    else {
        const auto v = parse_list(f.gamma);
        if (v.size() != 1 || !(v[0] >= 1.0)) throw ConstraintViolation("gamma must be inf, min, or a number >= 1");
        cfg.gamma = v[0];
    }
    if (cfg.situation == 2 && f.l_c) cfg.l_c = *f.l_c;
    if (cfg.situation == 3 && f.l_c) cfg.l_c3 = *f.l_c;
    if (cfg.situation == 3 && f.r_c) cfg.r_c3 = *f.r_c;
    if (cfg.situation == 2 && !(cfg.l_c >= 0.0 && cfg.l_c < 0.5)) throw ConstraintViolation("l_c must lie in [0, 1/2)");
    if (cfg.situation == 3 && !(cfg.l_c3 >= 0 && cfg.r_c3 >= 0 && cfg.l_c3 + cfg.r_c3 < 1))
        throw ConstraintViolation("need l_c, r_c >= 0 and l_c + r_c < 1");
    if (cfg.situation == 3 && !(cfg.eps > 0 && cfg.eps < 1)) throw ConstraintViolation("eps must lie in (0,1)");
    if (cfg.situation == 1 && !(cfg.l >= 0 && cfg.l < 1)) throw ConstraintViolation("l must lie in [0,1)");
    std::vector<PhaseRow> rows;
    try {
        rows = sweep_grid(cfg);
    } catch (const std::invalid_argument& e) {
        throw ConstraintViolation(e.what());
    }
    if (f.out.empty()) {
        write_csv(std::cout, rows);
    } else {
        std::ofstream out(f.out, std::ios::binary);
        if (!out) throw ConstraintViolation("cannot write " + f.out);
        write_csv(out, rows);
        std::cout << rows.size() << " grid points written to " << f.out << '\n';
    }
    if (f.back_map_n > 0) {
        const auto rep = back_map(rows, f.back_map_n);
        std::ostream& os = f.out.empty() ? std::cerr : std::cout;
        os << "back-mapping at n=" << f.back_map_n << ": " << rep.checked << " checked, " << rep.skipped_boundary
           << " near a boundary, " << rep.skipped_invalid << " invalid, " << rep.mismatches.size() << " mismatches\n";
        for (std::size_t i = 0; i < rep.mismatches.size() && i < 10; ++i) {
            const auto& e = rep.mismatches[i];
            os << "  " << e.row.axis1_name << '=' << fmt_double(e.row.axis1) << ' ' << e.row.axis2_name << '='
               << fmt_double(e.row.axis2) << ": continuum " << e.row.region.label() << ", finite cases";
            for (int k : e.finite_cases) os << ' ' << k;
            os << '\n';
        }
        if (!rep.mismatches.empty()) return exit_mismatch;
    }
    return exit_ok;
}

int cmd_owa(const std::string& weights, const std::string& rule) {
    if (weights.empty() == rule.empty()) throw ConstraintViolation("give exactly one of --weights or --rule");
    if (!weights.empty()) {
        OwaWeights w;
        try {
            w = OwaWeights::checked(parse_list(weights));
        } catch (const std::invalid_argument& e) {
            throw ConstraintViolation(e.what());
        }
        const auto r = rule_from_owa(w);
        std::cout << "rule:";
        for (double p : r.values()) std::cout << ' ' << fmt_double(p);
        std::cout << '\n';
        return exit_ok;
    }
    std::optional<AggregationRule> r;
    try {
        r.emplace(AgentKind::conformist, parse_list(rule));
    } catch (const std::invalid_argument& e) {
        throw ConstraintViolation(e.what());
    }
    const auto w = owa_from_rule(*r);
    std::cout << "weights:";
    for (double x : w.w) std::cout << ' ' << fmt_double(x);
    std::cout << '\n';
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anonymous-influence opinion dynamics: exact analysis, closed-form classes, simulation, phase grids"};
    app.require_subcommand(1);
    app.fallthrough();
    int jobs = 0;
    app.add_option("--jobs", jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    std::string scenario;
    auto* validate_cmd = app.add_subcommand("validate", "check a scenario file");
    validate_cmd->add_option("--scenario", scenario, "scenario JSON")->required();

    bool with_states = false, json = false;
    auto* classify_cmd = app.add_subcommand("classify", "closed-form prediction with condition traces");
    classify_cmd->add_option("--scenario", scenario, "scenario JSON")->required();
    classify_cmd->add_flag("--states", with_states, "list the states of each predicted class");
    classify_cmd->add_flag("--json", json, "JSON on stdout");

    std::string initial;
    auto* enumerate_cmd = app.add_subcommand("enumerate", "brute-force absorbing classes");
    enumerate_cmd->add_option("--scenario", scenario, "scenario JSON")->required();
    enumerate_cmd->add_option("--initial", initial, "initial state bitmask for absorption probabilities");
    enumerate_cmd->add_flag("--json", json, "JSON on stdout");

    VerifyFlags vf;
    auto* verify_cmd = app.add_subcommand("verify", "compare closed forms against brute force");
    verify_cmd->add_option("--n-min", vf.n_min, "smallest n");
    verify_cmd->add_option("--n-max", vf.n_max, "largest n");
    verify_cmd->add_flag("--mixed", vf.mixed, "societies with mixed agents");
    verify_cmd->add_flag("--degenerate", vf.degenerate, "single-kind societies");
    verify_cmd->add_flag("--tables", vf.tables, "sure-transition table cells instead of classes");
    verify_cmd->add_flag("--symmetry", vf.symmetry, "reversal symmetry of the possibility relation");
    verify_cmd->add_option("--allow", vf.allow, "comma-separated canonical ids whose mismatches are tolerated");
    verify_cmd->add_option("--seed", vf.seed, "subsampling seed");
    verify_cmd->add_option("--rate", vf.rate, "fraction of tuples to check");
    verify_cmd->add_option("--out", vf.out, "write the JSON report here");
    verify_cmd->add_flag("--json", vf.json, "JSON on stdout");

    SimulateFlags sf;
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo trajectories");
    simulate_cmd->add_option("--scenario", sf.scenario, "scenario JSON")->required();
    simulate_cmd->add_option("--steps", sf.steps, "steps per run");
    simulate_cmd->add_option("--runs", sf.runs, "number of runs");
    simulate_cmd->add_option("--seed", sf.seed, "64-bit seed");
    simulate_cmd->add_option("--mode", sf.mode, "agents or groups");
    simulate_cmd->add_option("--initial", sf.initial, "uniform or a state bitmask");
    simulate_cmd->add_flag("--stop-on-entry", sf.stop_on_entry, "end each run when it enters a class");
    simulate_cmd->add_option("--csv", sf.csv, "trajectory CSV of one run");
    simulate_cmd->add_option("--trace-run", sf.trace_run, "run index for --csv");
    simulate_cmd->add_flag("--per-run", sf.per_run, "include per-run stats in the JSON");
    simulate_cmd->add_option("--out", sf.out, "write the JSON report here");
    simulate_cmd->add_flag("--json", sf.json, "JSON on stdout");

    PhaseFlags pf;
    auto* phase_cmd = app.add_subcommand("phase", "large-n phase grid as CSV");
    phase_cmd->add_option("--situation", pf.cfg.situation, "1, 2 or 3")->required()->check(CLI::Range(1, 3));
    phase_cmd->add_option("--resolution", pf.cfg.resolution, "points per axis")->check(CLI::Range(2, 100000));
    phase_cmd->add_option("--out", pf.out, "CSV path (stdout if absent)");
    phase_cmd->add_option("--axes", pf.cfg.axes, "situation 1: l-na or gamma-na");
    phase_cmd->add_option("--gamma", pf.gamma, "situation 1 on l-na: inf, min, or a value");
    phase_cmd->add_option("--l", pf.cfg.l, "situation 1 on gamma-na: fixed l");
    phase_cmd->add_option("--gamma-max", pf.cfg.gamma_max, "situation 1 on gamma-na: upper gamma");
    phase_cmd->add_option("--l-c", pf.l_c, "situations 2 and 3: fixed l_c");
    phase_cmd->add_option("--r-c", pf.r_c, "situation 3: fixed r_c");
    phase_cmd->add_option("--eps", pf.cfg.eps, "situation 3: share of anti-conformists");
    phase_cmd->add_option("--back-map", pf.back_map_n, "cross-check interior points against the finite-n theorem");

    std::string weights, rule;
    auto* owa_cmd = app.add_subcommand("owa", "convert OWA weights to a conformist rule and back");
    owa_cmd->add_option("--weights", weights, "comma-separated w_1..w_n");
    owa_cmd->add_option("--rule", rule, "comma-separated p(0)..p(n)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    vf.jobs = sf.jobs = pf.cfg.jobs = jobs;
    try {
        if (*validate_cmd) return cmd_validate(scenario);
        if (*classify_cmd) return cmd_classify(scenario, with_states, json);
        if (*enumerate_cmd) return cmd_enumerate(scenario, initial, json, jobs);
        if (*verify_cmd) return cmd_verify(vf);
        if (*simulate_cmd) return cmd_simulate(sf);
        if (*phase_cmd) return cmd_phase(pf);
        if (*owa_cmd) return cmd_owa(weights, rule);
    } catch (const ConstraintViolation& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_invalid;
    } catch (const ClassMismatch& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_invalid;
    } catch (const CapExceeded& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_invalid;
    }
    return exit_invalid;
}
