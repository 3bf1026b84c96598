#pragma once

#include <algorithm>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "transitions.hpp"

namespace anoninf {

// P: pure societies, M: with mixed agents, D: societies missing a group.
enum class Family : char { pure = 'P', mixed = 'M', degenerate = 'D' };

struct CanonicalId {
    Family family = Family::pure;
    int number = 0;

    std::string to_string() const { return std::string(1, char(family)) + std::to_string(number); }
    auto operator<=>(const CanonicalId&) const = default;
};

inline CanonicalId parse_canonical_id(const std::string& text) {
    if (text.size() < 2 || (text[0] != 'P' && text[0] != 'M' && text[0] != 'D'))
        throw std::invalid_argument("bad canonical id: " + text);
    return CanonicalId{Family(text[0]), std::stoi(text.substr(1))};
}

// Blocks are listed in cycling order; a single block means aperiodic.
struct CanonicalForm {
    CanonicalId id;
    std::vector<TargetCollection> blocks;
};

inline std::string describe(const CanonicalForm& f) {
    if (f.blocks.size() == 1) return describe(f.blocks.front());
    std::string out;
    for (const auto& b : f.blocks) out += (out.empty() ? "" : " -> ") + describe(b);
    return out + " -> " + describe(f.blocks.front());
}

inline const std::vector<CanonicalForm>& canonical_forms(Family family) {
    using M = Marker;
    const Singleton E{M::empty}, A{M::anti}, C{M::conf}, F{M::full};
    const Interval lowC{M::empty, M::conf}, lowA{M::empty, M::anti}, highC{M::conf, M::full},
        highA{M::anti, M::full};
    const Interval bandA{M::anti, M::anti_bar}, bandC{M::conf, M::conf_bar}, lowAbar{M::empty, M::anti_bar},
        lowCbar{M::empty, M::conf_bar};
    auto U = [](Piece a, Piece b) { return TargetCollection(Union{{a, b}}); };
    auto form = [family](int id, std::vector<TargetCollection> blocks) {
        return CanonicalForm{CanonicalId{family, id}, std::move(blocks)};
    };

    static const std::vector<CanonicalForm> pure = {
        form(1, {A}),
        form(2, {C}),
        form(3, {A, E}),
        form(4, {C, F}),
        form(5, {A, C}),
        form(6, {E, A, C}),
        form(7, {A, F, C}),
        form(8, {A, lowC}),
        form(9, {C, highA}),
        form(10, {lowC, highA}),
        form(11, {lowA}),
        form(12, {highC}),
        form(13, {U(lowA, lowC)}),
        form(14, {U(highA, highC)}),
        form(15, {U(lowA, C)}),
        form(16, {U(highC, A)}),
        form(17, {U(lowC, A)}),
        form(18, {U(highA, C)}),
        form(19, {U(lowA, highC)}),
        form(20, {PowerSet{}}),
    };
    static const std::vector<CanonicalForm> mixed = {
        form(1, {bandA}),
        form(2, {bandC}),
        form(3, {lowAbar}),
        form(4, {highC}),
        form(5, {bandA, E}),
        form(6, {bandC, F}),
        form(7, {bandA, bandC}),
        form(8, {E, bandA, bandC}),
        form(9, {bandA, F, bandC}),
        form(10, {bandA, lowCbar}),
        form(11, {bandC, highA}),
        form(12, {lowCbar, highA}),
        form(13, {U(lowAbar, lowCbar)}),
        form(14, {U(highA, highC)}),
        form(15, {U(lowAbar, bandC)}),
        form(16, {U(highC, bandA)}),
        form(17, {U(lowCbar, bandA)}),
        form(18, {U(highA, bandC)}),
        form(19, {U(lowAbar, highC)}),
        form(20, {PowerSet{}}),
    };
    static const std::vector<CanonicalForm> degenerate = {
        form(1, {E}),
        form(2, {F}),
        form(3, {E, F}),
        form(4, {PowerSet{}}),
    };
    switch (family) {
    case Family::pure: return pure;
    case Family::mixed: return mixed;
    case Family::degenerate: return degenerate;
    }
    return pure;
}

inline const CanonicalForm& canonical_form(CanonicalId id) {
    const auto& forms = canonical_forms(id.family);
    if (id.number < 1 || id.number > int(forms.size())) throw std::out_of_range("no canonical form " + id.to_string());
    return forms[id.number - 1];
}

// Explicit states of a class with its period; blocks[0] holds the first listed collection.
struct ClassSignature {
    std::vector<StateSet> states;
    int period = 1;

    auto operator<=>(const ClassSignature&) const = default;
};

struct MaterializedForm {
    ClassSignature signature;
    std::vector<std::vector<StateSet>> blocks;
    bool well_formed = true; // false when blocks overlap or one is empty
};

inline MaterializedForm materialize(const CanonicalForm& f, const SocietyComposition& c) {
    MaterializedForm out;
    for (const auto& b : f.blocks) out.blocks.push_back(materialize(b, c));
    for (const auto& b : out.blocks) {
        if (b.empty()) out.well_formed = false;
        out.signature.states.insert(out.signature.states.end(), b.begin(), b.end());
    }
    auto& st = out.signature.states;
    std::sort(st.begin(), st.end());
    const auto total = st.size();
    st.erase(std::unique(st.begin(), st.end()), st.end());
    if (st.size() != total) out.well_formed = false;
    out.signature.period = int(f.blocks.size());
    return out;
}

inline std::optional<Family> family_for(const SocietyComposition& c) {
    if (c.n_c > 0 && c.n_a > 0 && c.n_m == 0) return Family::pure;
    if (c.n_c > 0 && c.n_a > 0 && c.n_m > 0) return Family::mixed;
    if (c.n_m == 0 || c.n_m == c.n) return Family::degenerate;
    return std::nullopt;
}

struct ClassMatch {
    std::optional<CanonicalId> canonical; // lowest matching id
    std::vector<CanonicalId> all;         // several forms can coincide at very small n
    ClassSignature signature;
};

inline ClassMatch match_canonical(const ClassSignature& sig, const SocietyComposition& c) {
    ClassMatch m{std::nullopt, {}, sig};
    const auto family = family_for(c);
    if (!family) return m;
    for (const auto& f : canonical_forms(*family)) {
        const auto mat = materialize(f, c);
        if (mat.well_formed && mat.signature == sig) m.all.push_back(f.id);
    }
    if (!m.all.empty()) m.canonical = m.all.front();
    return m;
}

} // namespace anoninf
