#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "canonical.hpp"
#include "chain_analysis.hpp"
#include "core_model.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace anoninf {

class HeterogeneousRules : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class SimMode { agents, groups };

inline StateSet step_agents(StateSet current, std::span<const AggregationRule> rules, Rng& rng) {
    if (rules.size() > 64) throw std::invalid_argument("agent mode supports at most 64 agents");
    const int s = current.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uint64_t next = 0;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const double p = rules[i](s);
        if (p == 1.0 || (p > 0.0 && unit(rng) < p)) next |= std::uint64_t{1} << i;
    }
    return StateSet(next);
}

// All agents of one group share a rule. Mixed agents form one group per distinct rule.
struct AgentGroup {
    AgentKind kind;
    std::int64_t size = 0;
    double alpha = 0.5;
    std::vector<double> table; // explicit p(0..n); empty means the ramp
};

struct GroupModel {
    SocietyComposition society;
    InfluenceParams z;
    std::vector<AgentGroup> groups; // conformists, anti-conformists, then mixed subgroups
    std::vector<std::size_t> mixed_group; // group index of each mixed agent

    double probability(const AgentGroup& g, std::int64_t s) const {
        if (!g.table.empty()) return g.table[std::size_t(s)];
        return ramp_value<std::int64_t>(g.kind, z, s, society.n, g.alpha);
    }

    static GroupModel ramp(const Model& m, std::span<const double> alphas = {}) {
        const auto& c = m.society;
        if (!alphas.empty() && alphas.size() != 1 && int(alphas.size()) != c.n_m)
            throw ConstraintViolation("alphas must have length 1 or n_m");
        GroupModel g{c, m.z, {}, {}};
        if (c.n_c > 0) g.groups.push_back({AgentKind::conformist, c.n_c, 0.5, {}});
        if (c.n_a > 0) g.groups.push_back({AgentKind::anti_conformist, c.n_a, 0.5, {}});
        auto alpha_of = [&](int j) { return alphas.empty() ? 0.5 : alphas.size() == 1 ? alphas[0] : alphas[std::size_t(j)]; };
        std::map<double, std::int64_t> by_alpha;
        for (int j = 0; j < c.n_m; ++j) ++by_alpha[alpha_of(j)];
        std::map<double, std::size_t> slot;
        for (auto [a, count] : by_alpha) {
            if (!(a > 0.0 && a < 1.0)) throw ConstraintViolation("alpha must lie in (0,1)");
            slot[a] = g.groups.size();
            g.groups.push_back({AgentKind::mixed, count, a, {}});
        }
        for (int j = 0; j < c.n_m; ++j) g.mixed_group.push_back(slot[alpha_of(j)]);
        return g;
    }

    // Explicit per-agent tables; pure groups must be uniform.
    static GroupModel from_rules(const Model& m, std::span<const AggregationRule> rules) {
        const auto& c = m.society;
        if (int(rules.size()) != c.n) throw std::invalid_argument("need one rule per agent");
        GroupModel g{c, m.z, {}, {}};
        auto uniform_block = [&](int first, int count, AgentKind kind) {
            if (count == 0) return;
            for (int i = first + 1; i < first + count; ++i)
                if (!(rules[std::size_t(i)] == rules[std::size_t(first)]))
                    throw HeterogeneousRules(std::string(to_string(kind)) + " rules differ within the group");
            const auto v = rules[std::size_t(first)].values();
            g.groups.push_back({kind, count, 0.5, std::vector<double>(v.begin(), v.end())});
        };
        uniform_block(0, c.n_c, AgentKind::conformist);
        uniform_block(c.n_c, c.n_a, AgentKind::anti_conformist);
        std::map<std::vector<double>, std::int64_t> mixed;
        for (int i = c.n_c + c.n_a; i < c.n; ++i) {
            const auto v = rules[std::size_t(i)].values();
            ++mixed[std::vector<double>(v.begin(), v.end())];
        }
        std::map<std::vector<double>, std::size_t> slot;
        for (auto& [table, count] : mixed) {
            slot[table] = g.groups.size();
            g.groups.push_back({AgentKind::mixed, count, 0.5, table});
        }
        for (int i = c.n_c + c.n_a; i < c.n; ++i) {
            const auto v = rules[std::size_t(i)].values();
            g.mixed_group.push_back(slot[std::vector<double>(v.begin(), v.end())]);
        }
        return g;
    }
};

// Count of 'yes' per group, aligned with GroupModel::groups.
struct GroupState {
    std::vector<std::int64_t> yes;

    std::int64_t s() const {
        std::int64_t t = 0;
        for (auto k : yes) t += k;
        return t;
    }
};

// (k_c, k_a, k_m) summed over subgroups.
inline std::array<std::int64_t, 3> group_counts(const GroupModel& gm, const GroupState& g) {
    std::array<std::int64_t, 3> k{0, 0, 0};
    for (std::size_t i = 0; i < gm.groups.size(); ++i) k[std::size_t(gm.groups[i].kind)] += g.yes[i];
    return k;
}

inline std::array<std::int64_t, 3> group_counts(const SocietyComposition& c, StateSet s) {
    return {(s & c.conformists()).size(), (s & c.anti_conformists()).size(), (s & c.mixed()).size()};
}

inline GroupState step_groups(const GroupModel& gm, const GroupState& g, Rng& rng) {
    const std::int64_t s = g.s();
    GroupState next{std::vector<std::int64_t>(gm.groups.size(), 0)};
    for (std::size_t i = 0; i < gm.groups.size(); ++i) {
        const auto& grp = gm.groups[i];
        const double p = gm.probability(grp, s);
        if (p == 0.0) continue;
        if (p == 1.0) {
            next.yes[i] = grp.size;
            continue;
        }
        next.yes[i] = std::binomial_distribution<std::int64_t>(grp.size, p)(rng);
    }
    return next;
}

// Membership by group counts. Valid for classes that are unions of intervals between
// unions of whole groups, which includes every canonical form.
class GroupSignature {
public:
    static GroupSignature symbolic(const CanonicalForm& f) {
        GroupSignature g;
        for (const auto& b : f.blocks) {
            if (std::holds_alternative<PowerSet>(b)) {
                g.intervals_.push_back({Marker::empty, Marker::full});
                continue;
            }
            auto add = [&](const Piece& p) {
                if (auto s = std::get_if<Singleton>(&p)) g.intervals_.push_back({s->set, s->set});
                else g.intervals_.push_back({std::get<Interval>(p).lower, std::get<Interval>(p).upper});
            };
            if (auto u = std::get_if<Union>(&b))
                for (const auto& p : u->pieces) add(p);
            else if (auto s = std::get_if<Singleton>(&b))
                add(*s);
            else
                add(std::get<Interval>(b));
        }
        return g;
    }

    // Explicit count triples, or nothing when the class is not determined by counts.
    static std::optional<GroupSignature> from_states(std::span<const StateSet> states, const SocietyComposition& c) {
        std::map<std::array<std::int64_t, 3>, std::uint64_t> seen;
        for (auto s : states) ++seen[group_counts(c, s)];
        auto choose = [](std::int64_t n, std::int64_t k) {
            std::uint64_t r = 1;
            for (std::int64_t i = 1; i <= k; ++i) r = r * std::uint64_t(n - k + i) / std::uint64_t(i);
            return r;
        };
        GroupSignature g;
        for (auto& [k, count] : seen) {
            if (count != choose(c.n_c, k[0]) * choose(c.n_a, k[1]) * choose(c.n_m, k[2])) return std::nullopt;
            g.triples_.insert(k);
        }
        return g;
    }

    bool contains(const SocietyComposition& c, const std::array<std::int64_t, 3>& k) const {
        if (intervals_.empty()) return triples_.count(k) > 0;
        const std::array<std::int64_t, 3> sizes{c.n_c, c.n_a, c.n_m};
        for (auto [lo, hi] : intervals_) {
            bool ok = true;
            for (int grp = 0; grp < 3 && ok; ++grp) {
                if (in_marker(lo, grp)) ok = k[grp] == sizes[grp];
                else if (!in_marker(hi, grp)) ok = k[grp] == 0;
            }
            if (ok) return true;
        }
        return false;
    }

private:
    static bool in_marker(Marker m, int grp) {
        switch (m) {
        case Marker::empty: return false;
        case Marker::anti: return grp == 1;
        case Marker::conf: return grp == 0;
        case Marker::full: return true;
        case Marker::anti_bar: return grp != 0;
        case Marker::conf_bar: return grp != 1;
        }
        return false;
    }

    std::vector<std::pair<Marker, Marker>> intervals_;
    std::set<std::array<std::int64_t, 3>> triples_;
};

struct RunOptions {
    std::uint64_t steps = 1000;
    bool stop_on_entry = false;     // end the trajectory as soon as a class is entered
    bool record_occupancy = false;  // post-entry visit counts
    bool record_trajectory = false;
};

struct TrajectoryRow {
    std::uint64_t step;
    std::int64_t k_c, k_a, k_m, s;
};

struct TrajectoryStats {
    std::uint64_t steps = 0;
    std::optional<int> class_index;
    std::optional<std::uint64_t> hitting_time;
    bool left_class = false; // set if the trajectory ever exits the class it entered
    std::array<std::int64_t, 3> final_counts{0, 0, 0};
    std::uint64_t final_state = 0; // agent mode only
    std::map<std::uint64_t, std::uint64_t> state_occupancy;
    std::map<std::array<std::int64_t, 3>, std::uint64_t> count_occupancy;
    std::vector<TrajectoryRow> trajectory;
};

namespace detail {

template <class State, class Member, class Counts, class Step, class Key>
TrajectoryStats run_chain(State state, const RunOptions& opt, std::size_t known, Member&& member, Counts&& counts,
                          Step&& step, Key&& record_key) {
    TrajectoryStats st;
    auto find_class = [&](const State& x) -> std::optional<int> {
        for (std::size_t c = 0; c < known; ++c)
            if (member(int(c), x)) return int(c);
        return std::nullopt;
    };
    auto visit = [&](std::uint64_t t, const State& x) {
        const auto k = counts(x);
        if (opt.record_trajectory) st.trajectory.push_back({t, k[0], k[1], k[2], k[0] + k[1] + k[2]});
        if (st.class_index) {
            if (!member(*st.class_index, x)) st.left_class = true;
            if (opt.record_occupancy) record_key(st, x);
        } else if (auto c = find_class(x)) {
            st.class_index = c;
            st.hitting_time = t;
            if (opt.record_occupancy) record_key(st, x);
        }
    };
    visit(0, state);
    std::uint64_t t = 0;
    while (t < opt.steps && !(opt.stop_on_entry && st.class_index)) {
        state = step(state);
        ++t;
        visit(t, state);
    }
    st.steps = t;
    st.final_counts = counts(state);
    if constexpr (std::is_same_v<State, StateSet>) st.final_state = state.bits();
    return st;
}

} // namespace detail

inline TrajectoryStats run_agents(const Model& m, std::span<const AggregationRule> rules, StateSet initial,
                                  const RunOptions& opt, std::span<const AbsorbingClass> known, Rng& rng) {
    const auto& c = m.society;
    auto st = detail::run_chain(
        initial, opt, known.size(), [&](int k, StateSet x) { return known[std::size_t(k)].contains(x); },
        [&](StateSet x) { return group_counts(c, x); }, [&](StateSet x) { return step_agents(x, rules, rng); },
        [](TrajectoryStats& s, StateSet x) { ++s.state_occupancy[x.bits()]; });
    return st;
}

inline TrajectoryStats run_groups(const GroupModel& gm, const GroupState& initial, const RunOptions& opt,
                                  std::span<const GroupSignature> known, Rng& rng) {
    return detail::run_chain(
        initial, opt, known.size(),
        [&](int k, const GroupState& x) { return known[std::size_t(k)].contains(gm.society, group_counts(gm, x)); },
        [&](const GroupState& x) { return group_counts(gm, x); },
        [&](const GroupState& x) { return step_groups(gm, x, rng); },
        [&](TrajectoryStats& s, const GroupState& x) { ++s.count_occupancy[group_counts(gm, x)]; });
}

inline StateSet uniform_state(int n, Rng& rng) { return StateSet(rng() & StateSet::full(n).bits()); }

inline GroupState uniform_group_state(const GroupModel& gm, Rng& rng) {
    GroupState g;
    for (const auto& grp : gm.groups) g.yes.push_back(std::binomial_distribution<std::int64_t>(grp.size, 0.5)(rng));
    return g;
}

inline GroupState group_state_of(const GroupModel& gm, StateSet s) {
    const auto& c = gm.society;
    GroupState g{std::vector<std::int64_t>(gm.groups.size(), 0)};
    for (std::size_t i = 0; i < gm.groups.size(); ++i) {
        if (gm.groups[i].kind == AgentKind::conformist) g.yes[i] = (s & c.conformists()).size();
        if (gm.groups[i].kind == AgentKind::anti_conformist) g.yes[i] = (s & c.anti_conformists()).size();
    }
    for (int j = 0; j < c.n_m; ++j)
        if (s.contains(c.n_c + c.n_a + j)) ++g.yes[gm.mixed_group[std::size_t(j)]];
    return g;
}

struct BatchResult {
    std::vector<std::uint64_t> absorbed; // per known class
    std::uint64_t unabsorbed = 0;
    std::uint64_t left_class = 0;
    double mean_hitting_time = 0.0;
    std::vector<TrajectoryStats> runs;
};

// Runs `runs` trajectories; trajectory r draws from substream (seed, r), so results do not
// depend on the number of workers.
template <class OneRun>
BatchResult run_batch(std::uint64_t runs, std::size_t known, std::uint64_t seed, int jobs, OneRun&& one) {
    BatchResult b;
    b.runs = parallel_map<TrajectoryStats>(std::size_t(runs), jobs, [&](std::size_t r) {
        Rng rng = substream(seed, r);
        return one(rng);
    });
    b.absorbed.assign(known, 0);
    double hit = 0.0;
    for (const auto& r : b.runs) {
        if (r.class_index) {
            ++b.absorbed[std::size_t(*r.class_index)];
            hit += double(*r.hitting_time);
        } else {
            ++b.unabsorbed;
        }
        if (r.left_class) ++b.left_class;
    }
    const auto absorbed = runs - b.unabsorbed;
    b.mean_hitting_time = absorbed ? hit / double(absorbed) : 0.0;
    return b;
}

} // namespace anoninf
