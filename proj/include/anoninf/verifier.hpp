#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "canonical.hpp"
#include "chain_analysis.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "theory.hpp"
#include "transitions.hpp"

namespace anoninf {

enum class SweepMode { pure, mixed, degenerate };

inline const char* to_string(SweepMode m) {
    switch (m) {
    case SweepMode::pure: return "pure";
    case SweepMode::mixed: return "mixed";
    case SweepMode::degenerate: return "degenerate";
    }
    return "?";
}

struct SweepSpec {
    int n_min = 2;
    int n_max = 4;
    SweepMode mode = SweepMode::pure;
    double rate = 1.0; // keep each tuple with this probability
    std::uint64_t seed = 0;
    int jobs = 0;
    std::set<CanonicalId> allow; // mismatches touching only these ids are tolerated
    std::size_t max_examples = 20;
};

// Every valid (composition, Z) of the sweep, in a fixed order. Both threshold pairs range
// over l + r < n even when a group is absent, so unused pairs are exercised too.
inline std::vector<Model> enumerate_scenarios(const SweepSpec& spec) {
    std::vector<SocietyComposition> socs;
    for (int n = std::max(1, spec.n_min); n <= spec.n_max; ++n) {
        switch (spec.mode) {
        case SweepMode::pure:
            for (int nc = 1; nc < n; ++nc) socs.push_back(SocietyComposition::of(nc, n - nc));
            break;
        case SweepMode::mixed:
            for (int nc = 1; nc < n; ++nc)
                for (int na = 1; nc + na < n; ++na) socs.push_back(SocietyComposition::of(nc, na, n - nc - na));
            break;
        case SweepMode::degenerate:
            socs.push_back(SocietyComposition::of(n, 0));
            socs.push_back(SocietyComposition::of(0, n));
            socs.push_back(SocietyComposition::of(0, 0, n));
            break;
        }
    }
    std::vector<Model> out;
    std::uint64_t counter = 0;
    for (const auto& c : socs)
        for (int lc = 0; lc < c.n; ++lc)
            for (int rc = 0; lc + rc < c.n; ++rc)
                for (int la = 0; la < c.n; ++la)
                    for (int ra = 0; la + ra < c.n; ++ra) {
                        const std::uint64_t idx = counter++;
                        if (spec.rate < 1.0 && hash_unit(spec.seed, idx) >= spec.rate) continue;
                        out.push_back(validate(c, InfluenceParams{lc, rc, la, ra}));
                    }
    return out;
}

struct Mismatch {
    Model scenario;
    std::vector<CanonicalId> predicted;
    std::vector<ClassSignature> actual;
    std::vector<CanonicalId> spurious; // predicted, but no such class exists
    std::vector<ClassMatch> missed;    // exists, but not predicted
    bool allowed = false;
};

struct TheoremReport {
    SweepSpec spec;
    std::size_t checked = 0;
    std::size_t classes_found = 0;
    int max_period = 0;
    std::vector<Mismatch> mismatches;
    std::map<std::string, std::size_t> spurious_by_case;
    std::map<std::string, std::size_t> missed_by_case; // "unmatched" when no canonical form fits
    std::map<int, std::size_t> classes_by_period;

    std::size_t failures() const {
        return std::size_t(std::count_if(mismatches.begin(), mismatches.end(), [](auto& m) { return !m.allowed; }));
    }
};

struct ScenarioCheck {
    std::vector<AbsorbingClass> classes;
    Prediction prediction;
    std::optional<Mismatch> mismatch;
};

// Brute force against closed form for one scenario.
inline ScenarioCheck check_scenario(const Model& m, const std::set<CanonicalId>& allow = {}) {
    ScenarioCheck out;
    out.classes = absorbing_classes(PossibilityDigraph(m));
    out.prediction = predict(m);

    std::set<ClassSignature> actual, predicted;
    for (const auto& c : out.classes) actual.insert(c.signature());
    std::vector<CanonicalId> spurious;
    for (auto id : out.prediction.classes) {
        const auto sig = materialize(canonical_form(id), m.society).signature;
        predicted.insert(sig);
        if (!actual.count(sig)) spurious.push_back(id);
    }
    if (actual == predicted) return out;

    Mismatch mm;
    mm.scenario = m;
    mm.predicted = out.prediction.classes;
    mm.actual.assign(actual.begin(), actual.end());
    mm.spurious = spurious;
    for (const auto& sig : actual)
        if (!predicted.count(sig)) mm.missed.push_back(match_canonical(sig, m.society));
    mm.allowed = !allow.empty() &&
                 std::all_of(mm.spurious.begin(), mm.spurious.end(), [&](auto id) { return allow.count(id) > 0; }) &&
                 std::all_of(mm.missed.begin(), mm.missed.end(),
                             [&](auto& x) { return x.canonical && allow.count(*x.canonical) > 0; });
    out.mismatch = std::move(mm);
    return out;
}

inline TheoremReport verify_theorem(const SweepSpec& spec) {
    const auto scenarios = enumerate_scenarios(spec);
    auto checks = parallel_map<ScenarioCheck>(scenarios.size(), spec.jobs, [&](std::size_t i) {
        auto c = check_scenario(scenarios[i], spec.allow);
        c.prediction.cases.clear(); // traces are not needed here
        return c;
    });
    TheoremReport r;
    r.spec = spec;
    r.checked = scenarios.size();
    for (auto& c : checks) {
        for (const auto& cls : c.classes) {
            r.max_period = std::max(r.max_period, cls.period);
            ++r.classes_by_period[cls.period];
            ++r.classes_found;
        }
        if (!c.mismatch) continue;
        for (auto id : c.mismatch->spurious) ++r.spurious_by_case[id.to_string()];
        for (auto& x : c.mismatch->missed) ++r.missed_by_case[x.canonical ? x.canonical->to_string() : "unmatched"];
        r.mismatches.push_back(std::move(*c.mismatch));
    }
    return r;
}

struct TableDisagreement {
    Model scenario;
    std::string cell;
    bool printed = false;
    bool brute = false;
};

struct TableReport {
    SweepSpec spec;
    std::size_t scenarios = 0;
    std::size_t cells_checked = 0;
    std::vector<TableDisagreement> disagreements;
    std::map<std::string, std::size_t> by_cell;
};

namespace detail {

// Collection-level sure transition: every successor of every source state lies in the
// target, and every target state is reached from some source state.
class SureTransitions {
public:
    explicit SureTransitions(const PossibilityDigraph& g) {
        const auto& c = g.model().society;
        for (auto p : all_pure_collections) {
            auto states = materialize(collection_of(p), c);
            std::vector<char> member(g.state_count(), 0), reach(g.state_count(), 0);
            for (auto s : states) member[s.bits()] = 1;
            std::vector<char> seen_size(g.n() + 1, 0);
            for (auto s : states) {
                if (seen_size[s.size()]) continue; // successors depend on the size only
                seen_size[s.size()] = 1;
                g.for_each_successor(s, [&](StateSet t) { reach[t.bits()] = 1; });
            }
            members_.push_back(std::move(member));
            reach_.push_back(std::move(reach));
        }
    }

    bool holds(PureCollection from, PureCollection to) const {
        return reach_[std::size_t(from)] == members_[std::size_t(to)];
    }

private:
    std::vector<std::vector<char>> members_, reach_;
};

} // namespace detail

inline TableReport verify_tables(const SweepSpec& spec) {
    SweepSpec pure = spec;
    pure.mode = SweepMode::pure;
    const auto scenarios = enumerate_scenarios(pure);
    auto results = parallel_map<std::vector<TableDisagreement>>(scenarios.size(), spec.jobs, [&](std::size_t i) {
        const Model& m = scenarios[i];
        const PossibilityDigraph g(m);
        const detail::SureTransitions sure(g);
        std::vector<TableDisagreement> out;
        for (auto a : all_pure_collections)
            for (auto b : all_pure_collections) {
                const bool printed = sure_transition_condition(a, b, m), brute = sure.holds(a, b);
                if (printed != brute)
                    out.push_back({m, std::string(to_string(a)) + " -> " + to_string(b), printed, brute});
            }
        for (const auto& row : chain2_rows()) {
            bool first = false;
            for (auto a : row.first) first = first || sure.holds(a, row.middle);
            const bool brute = first && sure.holds(row.middle, row.last);
            const bool printed = chain2_condition(row.id, m);
            if (printed != brute) out.push_back({m, "chain " + std::to_string(row.id), printed, brute});
        }
        return out;
    });
    TableReport r;
    r.spec = pure;
    r.scenarios = scenarios.size();
    r.cells_checked = scenarios.size() * (64 + chain2_rows().size());
    for (auto& v : results)
        for (auto& d : v) {
            ++r.by_cell[d.cell + (d.printed ? " (printed true)" : " (printed false)")];
            r.disagreements.push_back(std::move(d));
        }
    return r;
}

struct SymmetryViolation {
    Model scenario;
    StateSet from, to;
};

struct SymmetryReport {
    std::size_t scenarios = 0;
    std::uint64_t pairs_checked = 0;
    std::vector<SymmetryViolation> violations;
};

inline bool symmetric_pair(const Model& m, const Model& reversed, StateSet s, StateSet t) {
    const int n = m.society.n;
    return is_possible(s, t, m) == is_possible(s.complement(n), t.complement(n), reversed);
}

// All pairs (S, T) for every pure scenario of the sweep.
inline SymmetryReport verify_symmetry(const SweepSpec& spec) {
    SweepSpec pure = spec;
    pure.mode = SweepMode::pure;
    const auto scenarios = enumerate_scenarios(pure);
    auto results = parallel_map<std::vector<SymmetryViolation>>(scenarios.size(), spec.jobs, [&](std::size_t i) {
        const Model& m = scenarios[i];
        const Model rev{m.society, reversal(m.z)};
        std::vector<SymmetryViolation> out;
        const std::uint64_t count = std::uint64_t{1} << m.society.n;
        for (std::uint64_t s = 0; s < count; ++s)
            for (std::uint64_t t = 0; t < count; ++t)
                if (!symmetric_pair(m, rev, StateSet(s), StateSet(t))) out.push_back({m, StateSet(s), StateSet(t)});
        return out;
    });
    SymmetryReport r;
    r.scenarios = scenarios.size();
    for (const auto& m : scenarios) r.pairs_checked += std::uint64_t{1} << (2 * m.society.n);
    for (auto& v : results) r.violations.insert(r.violations.end(), v.begin(), v.end());
    return r;
}

// Random pure scenarios and random pairs at a fixed n.
inline SymmetryReport verify_symmetry_sampled(int n, std::uint64_t pairs, std::uint64_t seed) {
    SymmetryReport r;
    Rng rng = substream(seed, 0);
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    // uniform size first, so the band edges near 0 and n are hit as often as the middle
    std::vector<int> agents(n);
    auto random_state = [&] {
        std::iota(agents.begin(), agents.end(), 0);
        std::shuffle(agents.begin(), agents.end(), rng);
        StateSet s;
        for (int j = 0, k = uniform(0, n); j < k; ++j) s = s.with(agents[j]);
        return s;
    };
    for (std::uint64_t i = 0; i < pairs; ++i) {
        const int nc = uniform(1, n - 1);
        const int lc = uniform(0, n - 1), rc = uniform(0, n - 1 - lc);
        const int la = uniform(0, n - 1), ra = uniform(0, n - 1 - la);
        const Model m = validate(SocietyComposition::of(nc, n - nc), InfluenceParams{lc, rc, la, ra});
        const Model rev{m.society, reversal(m.z)};
        const StateSet s = random_state();
        const StateSet t = random_state();
        ++r.scenarios;
        ++r.pairs_checked;
        if (!symmetric_pair(m, rev, s, t)) r.violations.push_back({m, s, t});
    }
    return r;
}

} // namespace anoninf
