#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canonical.hpp"
#include "chain_analysis.hpp"
#include "core_model.hpp"
#include "simulate.hpp"
#include "theory.hpp"
#include "verifier.hpp"

namespace anoninf {

using Json = nlohmann::ordered_json;

struct Scenario {
    Model model;
    std::vector<double> alphas;                       // empty, one value, or one per mixed agent
    std::optional<std::vector<AggregationRule>> rules; // explicit tables, one per agent

    std::vector<AggregationRule> agent_rules() const { return rules ? *rules : ramp_rules(model, alphas); }
};

// Throws ConstraintViolation on any schema or model violation.
inline Scenario parse_scenario(const Json& j) {
    auto field = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number_integer())
            throw ConstraintViolation(std::string("scenario field '") + key + "' must be an integer");
        return j.at(key).get<int>();
    };
    if (!j.is_object()) throw ConstraintViolation("scenario must be a JSON object");
    const SocietyComposition c{field("n"), field("n_c"), field("n_a"), field("n_m")};
    const InfluenceParams z{field("l_c"), field("r_c"), field("l_a"), field("r_a")};
    Scenario sc{validate(c, z), {}, std::nullopt};
    if (j.contains("alphas")) {
        for (const auto& a : j.at("alphas")) {
            if (!a.is_number()) throw ConstraintViolation("alphas must be numbers");
            sc.alphas.push_back(a.get<double>());
        }
        ramp_rules(sc.model, sc.alphas); // checks length and range
    }
    if (j.contains("rules")) {
        const auto& r = j.at("rules");
        if (!r.is_array() || int(r.size()) != c.n) throw ConstraintViolation("rules must hold one table per agent");
        std::vector<AggregationRule> rules;
        for (int i = 0; i < c.n; ++i) {
            const auto& t = r.at(std::size_t(i));
            if (!t.is_array() || int(t.size()) != c.n + 1)
                throw ConstraintViolation("rule table " + std::to_string(i) + " must have n+1 values");
            std::vector<double> v;
            for (const auto& x : t) {
                if (!x.is_number()) throw ConstraintViolation("rule values must be numbers");
                v.push_back(x.get<double>());
            }
            try {
                rules.emplace_back(c.kind_of(i), std::move(v));
            } catch (const std::invalid_argument& e) {
                throw ConstraintViolation("rule table " + std::to_string(i) + ": " + e.what());
            }
            check_rule(rules.back(), z);
        }
        sc.rules = std::move(rules);
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConstraintViolation("cannot open scenario file " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConstraintViolation("scenario file " + path + " is not valid JSON: " + e.what());
    }
    return parse_scenario(j);
}

inline Json to_json(const Model& m) {
    const auto& c = m.society;
    return {{"n", c.n}, {"n_c", c.n_c}, {"n_a", c.n_a}, {"n_m", c.n_m},
            {"l_c", m.z.l_c}, {"r_c", m.z.r_c}, {"l_a", m.z.l_a}, {"r_a", m.z.r_a}};
}

inline Json to_json(std::span<const StateSet> states) {
    Json a = Json::array();
    for (auto s : states) a.push_back(s.bits());
    return a;
}

inline Json to_json(const ClassMatch& m) {
    Json ids = Json::array();
    for (auto id : m.all) ids.push_back(id.to_string());
    return {{"canonical", m.canonical ? Json(m.canonical->to_string()) : Json()}, {"matches", ids},
            {"period", m.signature.period}, {"states", to_json(m.signature.states)}};
}

inline Json to_json(const AbsorbingClass& cls, const SocietyComposition& c) {
    Json blocks = Json::array();
    for (const auto& b : cls.blocks) blocks.push_back(to_json(b));
    const auto match = match_canonical(cls.signature(), c);
    Json ids = Json::array();
    for (auto id : match.all) ids.push_back(id.to_string());
    return {{"states", to_json(cls.states)}, {"period", cls.period}, {"blocks", blocks},
            {"canonical", match.canonical ? Json(match.canonical->to_string()) : Json()}, {"matches", ids}};
}

inline Json to_json(const Prediction& p, const SocietyComposition& c, bool with_states) {
    Json classes = Json::array();
    for (auto id : p.classes) {
        Json e{{"id", id.to_string()}, {"form", describe(canonical_form(id))}};
        if (with_states) {
            const auto mat = materialize(canonical_form(id), c);
            Json blocks = Json::array();
            for (const auto& b : mat.blocks) blocks.push_back(to_json(b));
            e["period"] = mat.signature.period;
            e["blocks"] = blocks;
        }
        classes.push_back(e);
    }
    Json cases = Json::array();
    for (const auto& ce : p.cases) {
        Json conds = Json::array();
        for (const auto& x : ce.conditions) conds.push_back({{"expr", x.expr}, {"values", x.values}, {"holds", x.holds}});
        cases.push_back({{"id", ce.id.to_string()}, {"fired", ce.fired}, {"conditions_hold", ce.conditions_hold},
                         {"overridden", ce.overridden}, {"conditions", conds}});
    }
    return {{"classes", classes}, {"cases", cases}};
}

inline Json to_json(const SweepSpec& s) {
    Json allow = Json::array();
    for (auto id : s.allow) allow.push_back(id.to_string());
    return {{"n_min", s.n_min}, {"n_max", s.n_max}, {"mode", to_string(s.mode)}, {"rate", s.rate},
            {"seed", s.seed}, {"allow", allow}};
}

inline Json to_json(const TheoremReport& r) {
    Json examples = Json::array();
    for (const auto& m : r.mismatches) {
        if (examples.size() >= r.spec.max_examples) break;
        Json predicted = Json::array(), spurious = Json::array(), missed = Json::array();
        for (auto id : m.predicted) predicted.push_back(id.to_string());
        for (auto id : m.spurious) spurious.push_back(id.to_string());
        for (const auto& x : m.missed) missed.push_back(to_json(x));
        examples.push_back({{"scenario", to_json(m.scenario)}, {"predicted", predicted}, {"spurious", spurious},
                            {"missed", missed}, {"allowed", m.allowed}});
    }
    Json by_period = Json::object();
    for (auto [p, k] : r.classes_by_period) by_period[std::to_string(p)] = k;
    return {{"spec", to_json(r.spec)},
            {"checked", r.checked},
            {"classes_found", r.classes_found},
            {"max_period", r.max_period},
            {"classes_by_period", by_period},
            {"mismatches", r.mismatches.size()},
            {"failures", r.failures()},
            {"spurious_by_case", r.spurious_by_case},
            {"missed_by_case", r.missed_by_case},
            {"examples", examples}};
}

inline Json to_json(const TableReport& r) {
    Json examples = Json::array();
    for (const auto& d : r.disagreements) {
        if (examples.size() >= r.spec.max_examples) break;
        examples.push_back({{"scenario", to_json(d.scenario)}, {"cell", d.cell}, {"printed", d.printed}, {"brute", d.brute}});
    }
    return {{"spec", to_json(r.spec)},         {"scenarios", r.scenarios}, {"cells_checked", r.cells_checked},
            {"disagreements", r.disagreements.size()}, {"by_cell", r.by_cell}, {"examples", examples}};
}

inline Json to_json(const SymmetryReport& r) {
    Json examples = Json::array();
    for (const auto& v : r.violations) {
        if (examples.size() >= 20) break;
        examples.push_back({{"scenario", to_json(v.scenario)}, {"from", v.from.bits()}, {"to", v.to.bits()}});
    }
    return {{"scenarios", r.scenarios}, {"pairs_checked", r.pairs_checked}, {"violations", r.violations.size()},
            {"examples", examples}};
}

inline Json to_json(const TrajectoryStats& t, SimMode mode) {
    Json j{{"steps", t.steps},
           {"class", t.class_index ? Json(*t.class_index) : Json()},
           {"hitting_time", t.hitting_time ? Json(*t.hitting_time) : Json()},
           {"left_class", t.left_class},
           {"final_counts", {{"k_c", t.final_counts[0]}, {"k_a", t.final_counts[1]}, {"k_m", t.final_counts[2]}}}};
    if (mode == SimMode::agents) j["final_state"] = t.final_state;
    return j;
}

} // namespace anoninf
