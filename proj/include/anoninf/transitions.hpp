#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "core_model.hpp"

namespace anoninf {

enum class Marker { empty, anti, conf, full, anti_bar, conf_bar };

inline StateSet resolve(Marker m, const SocietyComposition& c) {
    switch (m) {
    case Marker::empty: return StateSet();
    case Marker::anti: return c.anti_conformists();
    case Marker::conf: return c.conformists();
    case Marker::full: return c.everyone();
    case Marker::anti_bar: return c.anti_conformists() | c.mixed();
    case Marker::conf_bar: return c.conformists() | c.mixed();
    }
    return StateSet();
}

inline const char* to_string(Marker m) {
    switch (m) {
    case Marker::empty: return "0";
    case Marker::anti: return "Na";
    case Marker::conf: return "Nc";
    case Marker::full: return "N";
    case Marker::anti_bar: return "Na+Nm";
    case Marker::conf_bar: return "Nc+Nm";
    }
    return "?";
}

struct Singleton {
    Marker set;
};
struct Interval {
    Marker lower, upper;
};
struct PowerSet {};
using Piece = std::variant<Singleton, Interval>;
struct Union {
    std::vector<Piece> pieces;
};
using TargetCollection = std::variant<Singleton, Interval, Union, PowerSet>;

namespace detail {
template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

inline std::pair<StateSet, StateSet> bounds(const Piece& p, const SocietyComposition& c) {
    if (auto s = std::get_if<Singleton>(&p)) return {resolve(s->set, c), resolve(s->set, c)};
    const auto& iv = std::get<Interval>(p);
    return {resolve(iv.lower, c), resolve(iv.upper, c)};
}
} // namespace detail

// Each collection is a union of [lower, upper] intervals once resolved.
inline std::vector<std::pair<StateSet, StateSet>> intervals_of(const TargetCollection& tc,
                                                               const SocietyComposition& c) {
    return std::visit(
        detail::overloaded{
            [&](const Singleton& s) { return std::vector{detail::bounds(Piece(s), c)}; },
            [&](const Interval& iv) { return std::vector{detail::bounds(Piece(iv), c)}; },
            [&](const PowerSet&) { return std::vector{std::pair{StateSet(), c.everyone()}}; },
            [&](const Union& u) {
                std::vector<std::pair<StateSet, StateSet>> out;
                for (const auto& p : u.pieces) out.push_back(detail::bounds(p, c));
                return out;
            },
        },
        tc);
}

inline bool contains(const TargetCollection& tc, StateSet t, const SocietyComposition& c) {
    for (auto [lo, hi] : intervals_of(tc, c))
        if (lo.subset_of(t) && t.subset_of(hi)) return true;
    return false;
}

// Sorted, duplicate-free.
inline std::vector<StateSet> materialize(const TargetCollection& tc, const SocietyComposition& c) {
    std::vector<StateSet> out;
    for (auto [lo, hi] : intervals_of(tc, c)) {
        if (!lo.subset_of(hi)) continue;
        for_each_between(lo, hi, [&](StateSet t) { out.push_back(t); });
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline std::string describe(const TargetCollection& tc) {
    auto piece = [](const Piece& p) -> std::string {
        if (auto s = std::get_if<Singleton>(&p)) return std::string("{") + to_string(s->set) + "}";
        const auto& iv = std::get<Interval>(p);
        return std::string("[") + to_string(iv.lower) + "," + to_string(iv.upper) + "]";
    };
    return std::visit(detail::overloaded{
                          [&](const Singleton& s) { return piece(s); },
                          [&](const Interval& iv) { return piece(iv); },
                          [&](const PowerSet&) { return std::string("2^N"); },
                          [&](const Union& u) {
                              std::string out;
                              for (const auto& p : u.pieces) out += (out.empty() ? "" : " u ") + piece(p);
                              return out;
                          },
                      },
                      tc);
}

// Row by the anti-conformist band of s, column by the conformist band.
inline TargetCollection possible_targets(int s, const Model& m) {
    const auto& z = m.z;
    const int n = m.society.n;
    if (s < 0 || s > n) throw std::out_of_range("s out of range [0, n]");
    const int row = s <= z.l_a ? 0 : s >= n - z.r_a ? 2 : 1;
    const int col = s <= z.l_c ? 0 : s >= n - z.r_c ? 2 : 1;
    using M = Marker;
    if (m.society.n_m == 0) {
        switch (row * 3 + col) {
        case 0: return Singleton{M::anti};
        case 1: return Interval{M::anti, M::full};
        case 2: return Singleton{M::full};
        case 3: return Interval{M::empty, M::anti};
        case 4: return PowerSet{};
        case 5: return Interval{M::conf, M::full};
        case 6: return Singleton{M::empty};
        case 7: return Interval{M::empty, M::conf};
        default: return Singleton{M::conf};
        }
    }
    switch (row * 3 + col) {
    case 0: return Interval{M::anti, M::anti_bar};
    case 1: return Interval{M::anti, M::full};
    case 2: return Singleton{M::full};
    case 3: return Interval{M::empty, M::anti_bar};
    case 4: return PowerSet{};
    case 5: return Interval{M::conf, M::full};
    case 6: return Singleton{M::empty};
    case 7: return Interval{M::empty, M::conf_bar};
    default: return Interval{M::conf, M::conf_bar};
    }
}

// Successors of any state of size s, straight from the per-agent bands:
// agents in band One must say yes, agents in band Zero must say no.
inline std::pair<StateSet, StateSet> successor_interval(int s, const Model& m) {
    const auto& c = m.society;
    std::uint64_t forced = 0, allowed = 0;
    for (int i = 0; i < c.n; ++i) {
        const Band b = positivity(c.kind_of(i), m.z, s, c.n);
        if (b == Band::one) forced |= std::uint64_t{1} << i;
        if (b != Band::zero) allowed |= std::uint64_t{1} << i;
    }
    return {StateSet(forced), StateSet(allowed)};
}

inline bool is_possible(StateSet from, StateSet to, const Model& m) {
    const auto& c = m.society;
    const int s = from.size();
    for (int i = 0; i < c.n; ++i) {
        const Band b = positivity(c.kind_of(i), m.z, s, c.n);
        if (to.contains(i) ? b == Band::zero : b == Band::one) return false;
    }
    return true;
}

inline double transition_probability(StateSet from, StateSet to, std::span<const AggregationRule> rules) {
    const int s = from.size();
    double prob = 1.0;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const double p = rules[i](s);
        prob *= to.contains(int(i)) ? p : 1.0 - p;
    }
    return prob;
}

inline InfluenceParams reversal(const InfluenceParams& z) { return {z.r_c, z.l_c, z.r_a, z.l_a}; }
inline InfluenceParams interchange(const InfluenceParams& z) { return {z.l_a, z.r_a, z.l_c, z.r_c}; }

// The eight collections used by the sure-transition tables (pure societies).
enum class PureCollection { empty, low_conf, low_anti, anti, conf, high_conf, high_anti, full };

inline constexpr std::array<PureCollection, 8> all_pure_collections = {
    PureCollection::empty, PureCollection::low_conf,  PureCollection::low_anti,  PureCollection::anti,
    PureCollection::conf,  PureCollection::high_conf, PureCollection::high_anti, PureCollection::full,
};

inline TargetCollection collection_of(PureCollection p) {
    using M = Marker;
    switch (p) {
    case PureCollection::empty: return Singleton{M::empty};
    case PureCollection::low_conf: return Interval{M::empty, M::conf};
    case PureCollection::low_anti: return Interval{M::empty, M::anti};
    case PureCollection::anti: return Singleton{M::anti};
    case PureCollection::conf: return Singleton{M::conf};
    case PureCollection::high_conf: return Interval{M::conf, M::full};
    case PureCollection::high_anti: return Interval{M::anti, M::full};
    case PureCollection::full: return Singleton{M::full};
    }
    return PowerSet{};
}

inline const char* to_string(PureCollection p) {
    switch (p) {
    case PureCollection::empty: return "0";
    case PureCollection::low_conf: return "[0,Nc]";
    case PureCollection::low_anti: return "[0,Na]";
    case PureCollection::anti: return "Na";
    case PureCollection::conf: return "Nc";
    case PureCollection::high_conf: return "[Nc,N]";
    case PureCollection::high_anti: return "[Na,N]";
    case PureCollection::full: return "N";
    }
    return "?";
}

inline PureCollection parse_collection(std::string_view tag) {
    for (auto p : all_pure_collections)
        if (tag == to_string(p)) return p;
    throw std::invalid_argument("unknown collection tag: " + std::string(tag));
}

// Printed sure-transition conditions; cells not listed are impossible.
inline bool sure_transition_condition(PureCollection from, PureCollection to, const Model& m) {
    if (m.society.n_m != 0) throw std::invalid_argument("sure-transition table applies to pure societies");
    const int n = m.society.n, nc = m.society.n_c;
    const int lc = m.z.l_c, rc = m.z.r_c, la = m.z.l_a, ra = m.z.r_a;
    using P = PureCollection;
    auto between = [](int lo, int x, int hi) { return lo < x && x < hi; };
    switch (from) {
    case P::empty: return to == P::anti;
    case P::full: return to == P::conf;
    case P::anti:
        switch (to) {
        case P::empty: return n - lc <= nc && nc <= ra;
        case P::anti: return nc >= n - lc && nc >= n - la;
        case P::low_conf: return nc <= ra && between(rc, nc, n - lc);
        case P::low_anti: return nc >= n - lc && between(ra, nc, n - la);
        case P::high_conf: return nc <= rc && between(ra, nc, n - la);
        case P::high_anti: return nc >= n - la && between(rc, nc, n - lc);
        case P::conf: return nc <= std::min(rc, ra);
        case P::full: return n - la <= nc && nc <= rc;
        }
        break;
    case P::low_conf:
        switch (to) {
        case P::anti: return nc <= std::min(lc, la);
        case P::low_anti: return la < nc && nc <= lc;
        case P::high_anti: return lc < nc && nc <= la;
        default: return false;
        }
    case P::low_anti:
        switch (to) {
        case P::anti: return nc >= n - lc && nc >= n - la;
        case P::low_anti: return n - lc <= nc && nc < n - la;
        case P::high_anti: return n - la <= nc && nc < n - lc;
        default: return false;
        }
    case P::high_conf:
        switch (to) {
        case P::low_conf: return n - ra <= nc && nc < n - rc;
        case P::high_conf: return n - rc <= nc && nc < n - ra;
        case P::conf: return nc >= n - rc && nc >= n - ra;
        default: return false;
        }
    case P::high_anti:
        switch (to) {
        case P::low_conf: return rc < nc && nc <= ra;
        case P::high_conf: return ra < nc && nc <= rc;
        case P::conf: return nc <= std::min(rc, ra);
        default: return false;
        }
    case P::conf:
        switch (to) {
        case P::empty: return n - ra <= nc && nc <= lc;
        case P::anti: return nc <= std::min(lc, la);
        case P::low_conf: return nc >= n - ra && between(lc, nc, n - rc);
        case P::low_anti: return nc <= lc && between(la, nc, n - ra);
        case P::high_conf: return nc >= n - rc && between(la, nc, n - ra);
        case P::high_anti: return nc <= la && between(lc, nc, n - rc);
        case P::conf: return nc >= n - rc && nc >= n - ra;
        case P::full: return n - rc <= nc && nc <= la;
        }
        break;
    }
    return false;
}

// Length-2 chains A ->1 B ->1 C that can close into periodic classes.
struct Chain2 {
    int id;
    std::vector<PureCollection> first; // alternatives for A
    PureCollection middle;
    PureCollection last;
};

inline const std::vector<Chain2>& chain2_rows() {
    using P = PureCollection;
    static const std::vector<Chain2> rows = {
        {1, {P::anti}, P::empty, P::anti},
        {2, {P::conf}, P::empty, P::anti},
        {3, {P::empty}, P::anti, P::high_conf},
        {4, {P::empty}, P::anti, P::conf},
        {5, {P::empty}, P::anti, P::full},
        {6, {P::conf}, P::anti, P::empty},
        {7, {P::low_conf}, P::anti, P::low_conf},
        {8, {P::conf}, P::anti, P::conf},
        {9, {P::conf, P::low_conf}, P::anti, P::full},
        {10, {P::anti}, P::low_conf, P::anti},
        {11, {P::high_anti}, P::low_conf, P::high_anti},
    };
    return rows;
}

inline bool chain2_condition(int id, const Model& m) {
    const int n = m.society.n, nc = m.society.n_c;
    const int lc = m.z.l_c, rc = m.z.r_c, la = m.z.l_a, ra = m.z.r_a;
    switch (id) {
    case 1: return n - lc <= nc && nc <= ra;
    case 2: return n - ra <= nc && nc <= lc;
    case 3: return nc <= rc && ra < nc && nc < n - la;
    case 4: return nc <= std::min(rc, ra);
    case 5: return n - la <= nc && nc <= rc;
    case 6: return n - lc <= nc && nc <= std::min({lc, la, ra});
    case 7: return nc <= std::min({lc, la, ra}) && rc < nc && nc < n - lc;
    case 8: return nc <= std::min({lc, la, rc, ra});
    case 9: return n - la <= nc && nc <= std::min({la, lc, rc});
    case 10: return nc <= std::min({la, lc, ra}) && rc < nc && nc < n - lc;
    case 11: return std::max(lc, rc) < nc && nc <= std::min(ra, la);
    default: throw std::out_of_range("unknown chain id " + std::to_string(id));
    }
}

} // namespace anoninf
