#include <gtest/gtest.h>

#include "anoninf/verifier.hpp"

using namespace anoninf;

namespace {

PureCollection complement_of(PureCollection p) {
    using P = PureCollection;
    switch (p) {
    case P::empty: return P::full;
    case P::full: return P::empty;
    case P::anti: return P::conf;
    case P::conf: return P::anti;
    case P::low_conf: return P::high_anti;
    case P::high_anti: return P::low_conf;
    case P::low_anti: return P::high_conf;
    case P::high_conf: return P::low_anti;
    }
    return p;
}

// Sure transition straight from the pair predicate, state by state.
bool oracle_sure(PureCollection from, PureCollection to, const Model& m) {
    const auto& c = m.society;
    const auto src = materialize(collection_of(from), c);
    const auto dst = materialize(collection_of(to), c);
    std::set<std::uint64_t> reached;
    for (auto s : src)
        for (std::uint64_t t = 0; t < (std::uint64_t{1} << c.n); ++t)
            if (is_possible(s, StateSet(t), m)) reached.insert(t);
    std::set<std::uint64_t> target;
    for (auto t : dst) target.insert(t.bits());
    return reached == target;
}

} // namespace

TEST(Enumerate, CountsAndOrder) {
    SweepSpec spec;
    spec.n_min = 2;
    spec.n_max = 4;
    EXPECT_EQ(enumerate_scenarios(spec).size(), 9u + 72u + 300u);
    spec.mode = SweepMode::mixed;
    spec.n_min = spec.n_max = 3;
    EXPECT_EQ(enumerate_scenarios(spec).size(), 36u);
    spec.mode = SweepMode::degenerate;
    spec.n_min = spec.n_max = 2;
    EXPECT_EQ(enumerate_scenarios(spec).size(), 3u * 9u);
}

TEST(Enumerate, SubsamplingIsDeterministic) {
    SweepSpec spec;
    spec.n_max = 5;
    spec.rate = 0.3;
    spec.seed = 42;
    const auto a = enumerate_scenarios(spec), b = enumerate_scenarios(spec);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].z, b[i].z);
    EXPECT_GT(a.size(), 1281u / 5);
    EXPECT_LT(a.size(), 1281u / 2);
}

TEST(VerifyTheorem, DegenerateSweepHasNoMismatch) {
    SweepSpec spec;
    spec.n_min = 1;
    spec.n_max = 6;
    spec.mode = SweepMode::degenerate;
    const auto r = verify_theorem(spec);
    EXPECT_EQ(r.mismatches.size(), 0u);
    EXPECT_EQ(r.max_period, 2);
}

TEST(VerifyTheorem, ReportsKnownGap) {
    const auto check = check_scenario(validate(SocietyComposition::of(1, 2), {0, 1, 2, 0}));
    ASSERT_TRUE(check.mismatch.has_value());
    EXPECT_EQ(check.mismatch->spurious, std::vector<CanonicalId>{(CanonicalId{Family::pure, 14})});
    EXPECT_TRUE(check.mismatch->missed.empty());
    EXPECT_FALSE(check.mismatch->allowed);
}

TEST(VerifyTheorem, AllowListToleratesListedIdsOnly) {
    const Model m = validate(SocietyComposition::of(1, 2), {0, 1, 2, 0});
    EXPECT_TRUE(check_scenario(m, {CanonicalId{Family::pure, 14}}).mismatch->allowed);
    EXPECT_FALSE(check_scenario(m, {CanonicalId{Family::pure, 13}}).mismatch->allowed);
    // a class outside every canonical form can never be allow-listed
    const Model odd = validate(SocietyComposition::of(2, 2), {0, 0, 1, 2});
    std::set<CanonicalId> everything;
    for (int k = 1; k <= 20; ++k) everything.insert({Family::pure, k});
    EXPECT_FALSE(check_scenario(odd, everything).mismatch->allowed);
}

TEST(VerifyTheorem, ReportCountsAreConsistent) {
    SweepSpec spec;
    spec.n_max = 5;
    const auto r = verify_theorem(spec);
    EXPECT_EQ(r.checked, 1281u);
    std::size_t by_period = 0;
    for (auto [p, k] : r.classes_by_period) by_period += k;
    EXPECT_EQ(by_period, r.classes_found);
    EXPECT_EQ(r.failures(), r.mismatches.size());
    EXPECT_LE(r.max_period, 3);
}

TEST(VerifyTables, BruteSemanticsMatchPairOracle) {
    SweepSpec spec;
    spec.n_min = 2;
    spec.n_max = 4;
    for (const auto& m : enumerate_scenarios(spec)) {
        const PossibilityDigraph g(m);
        const detail::SureTransitions sure(g);
        for (auto a : all_pure_collections)
            for (auto b : all_pure_collections) ASSERT_EQ(sure.holds(a, b), oracle_sure(a, b, m));
    }
}

TEST(VerifyTables, EmptyToAntiAlwaysConfirmed) {
    SweepSpec spec;
    spec.n_max = 6;
    for (const auto& m : enumerate_scenarios(spec)) {
        const detail::SureTransitions sure{PossibilityDigraph(m)};
        EXPECT_TRUE(sure.holds(PureCollection::empty, PureCollection::anti));
        EXPECT_TRUE(sure_transition_condition(PureCollection::empty, PureCollection::anti, m));
    }
}

// Complementing both collections and reversing Z preserves sure transitions.
TEST(VerifyTables, BruteCellsAreComplementSymmetric) {
    SweepSpec spec;
    spec.n_max = 6;
    for (const auto& m : enumerate_scenarios(spec)) {
        const detail::SureTransitions sure{PossibilityDigraph(m)};
        const detail::SureTransitions dual{PossibilityDigraph(Model{m.society, reversal(m.z)})};
        for (auto a : all_pure_collections)
            for (auto b : all_pure_collections)
                ASSERT_EQ(sure.holds(a, b), dual.holds(complement_of(a), complement_of(b)));
    }
}

TEST(VerifyTables, ReportShape) {
    SweepSpec spec;
    spec.n_max = 4;
    const auto r = verify_tables(spec);
    EXPECT_EQ(r.scenarios, 381u);
    EXPECT_EQ(r.cells_checked, 381u * (64 + chain2_rows().size()));
    std::size_t total = 0;
    for (const auto& [cell, k] : r.by_cell) total += k;
    EXPECT_EQ(total, r.disagreements.size());
}

TEST(VerifySymmetry, ExhaustiveSmallAndSampledLarge) {
    SweepSpec spec;
    spec.n_max = 5;
    const auto r = verify_symmetry(spec);
    EXPECT_EQ(r.violations.size(), 0u);
    EXPECT_GT(r.pairs_checked, 1'000'000u);
    const auto s = verify_symmetry_sampled(12, 20'000, 1);
    EXPECT_EQ(s.pairs_checked, 20'000u);
    EXPECT_EQ(s.violations.size(), 0u);
}

TEST(VerifySymmetry, SelfDualParametersGiveComplementSymmetricGraph) {
    const Model m = validate(SocietyComposition::of(3, 3), {1, 1, 2, 2});
    ASSERT_EQ(reversal(m.z), m.z);
    for (std::uint64_t s = 0; s < 64; ++s)
        for (std::uint64_t t = 0; t < 64; ++t)
            EXPECT_EQ(is_possible(StateSet(s), StateSet(t), m),
                      is_possible(StateSet(s).complement(6), StateSet(t).complement(6), m));
}
