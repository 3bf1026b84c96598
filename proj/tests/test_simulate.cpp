#include <gtest/gtest.h>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>

#include "anoninf/simulate.hpp"
#include "anoninf/theory.hpp"

using namespace anoninf;

namespace {

// Pearson goodness of fit; bins with tiny expectation are pooled.
double gof_p_value(const std::vector<double>& expected_prob, const std::vector<std::uint64_t>& observed, std::uint64_t draws) {
    double chi2 = 0, pooled_e = 0, pooled_o = 0;
    int bins = 0;
    for (std::size_t i = 0; i < expected_prob.size(); ++i) {
        const double e = expected_prob[i] * double(draws);
        if (e < 5) {
            pooled_e += e;
            pooled_o += double(observed[i]);
            continue;
        }
        chi2 += (double(observed[i]) - e) * (double(observed[i]) - e) / e;
        ++bins;
    }
    if (pooled_e > 0) {
        chi2 += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
        ++bins;
    }
    if (bins < 2) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(bins - 1), chi2));
}

} // namespace

TEST(StepAgents, EmptyStateGoesToAntiConformists) {
    const Model m = validate(SocietyComposition::of(4, 3), {1, 2, 1, 1});
    const auto rules = ramp_rules(m);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(step_agents(StateSet(), rules, rng), m.society.anti_conformists());
}

TEST(StepAgents, DeterministicBandGivesSingletonCell) {
    const Model m = validate(SocietyComposition::of(3, 2), {4, 0, 0, 1});
    const auto rules = ramp_rules(m);
    Rng rng(2);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(step_agents(StateSet(0b01111), rules, rng), StateSet());
}

TEST(StepAgents, OneStepDistributionMatchesExactProbabilities) {
    const Model m = validate(SocietyComposition::of(3, 2, 1), {1, 1, 1, 2});
    const std::vector<double> alpha{0.3};
    const auto rules = ramp_rules(m, alpha);
    Rng rng(3);
    const std::uint64_t draws = 100'000;
    for (StateSet from : {StateSet(0b000011), StateSet(0b010101), StateSet(0b011110)}) {
        std::vector<std::uint64_t> counts(64, 0);
        for (std::uint64_t i = 0; i < draws; ++i) ++counts[step_agents(from, rules, rng).bits()];
        std::vector<double> exact(64);
        for (std::uint64_t t = 0; t < 64; ++t) {
            exact[t] = transition_probability(from, StateSet(t), rules);
            if (exact[t] == 0) {
                EXPECT_EQ(counts[t], 0u);
            }
        }
        EXPECT_GT(gof_p_value(exact, counts, draws), 0.001) << from.to_string();
    }
}

TEST(StepGroups, ZeroYesIsDeterministic) {
    const Model m = validate(SocietyComposition::of(60, 40), {10, 10, 10, 10});
    const auto gm = GroupModel::ramp(m);
    Rng rng(4);
    const auto next = step_groups(gm, GroupState{{0, 0}}, rng);
    const auto k = group_counts(gm, next);
    EXPECT_EQ(k[0], 0);
    EXPECT_EQ(k[1], 40);
}

TEST(StepGroups, BinomialCountsMatchExactPmf) {
    const Model m = validate(SocietyComposition::of(7, 5), {1, 1, 2, 2});
    const auto gm = GroupModel::ramp(m);
    Rng rng(5);
    const GroupState g{{3, 2}}; // s = 5
    const std::uint64_t draws = 200'000;
    std::vector<std::uint64_t> kc(8, 0), ka(6, 0);
    double mean_c = 0;
    for (std::uint64_t i = 0; i < draws; ++i) {
        const auto k = group_counts(gm, step_groups(gm, g, rng));
        ++kc[std::size_t(k[0])];
        ++ka[std::size_t(k[1])];
        mean_c += double(k[0]);
    }
    mean_c /= double(draws);
    const double pc = gm.probability(gm.groups[0], 5), pa = gm.probability(gm.groups[1], 5);
    std::vector<double> ec(8), ea(6);
    for (int k = 0; k <= 7; ++k) ec[std::size_t(k)] = boost::math::pdf(boost::math::binomial(7, pc), k);
    for (int k = 0; k <= 5; ++k) ea[std::size_t(k)] = boost::math::pdf(boost::math::binomial(5, pa), k);
    EXPECT_GT(gof_p_value(ec, kc, draws), 0.001);
    EXPECT_GT(gof_p_value(ea, ka, draws), 0.001);
    const double se = std::sqrt(7 * pc * (1 - pc) / double(draws));
    EXPECT_NEAR(mean_c, 7 * pc, 4 * se);
}

TEST(GroupModel, FromRulesRejectsHeterogeneousPureGroups) {
    const Model m = validate(SocietyComposition::of(2, 1), {0, 0, 0, 0});
    std::vector<AggregationRule> rules = ramp_rules(m);
    EXPECT_NO_THROW(GroupModel::from_rules(m, rules));
    rules[1] = AggregationRule(AgentKind::conformist, {0, 0.2, 0.9, 1});
    EXPECT_THROW(GroupModel::from_rules(m, rules), HeterogeneousRules);
}

TEST(GroupModel, MixedSubgroupsPerAlpha) {
    const Model m = validate(SocietyComposition::of(1, 1, 3), {0, 0, 0, 0});
    const std::vector<double> alphas{0.2, 0.7, 0.2};
    const auto gm = GroupModel::ramp(m, alphas);
    ASSERT_EQ(gm.groups.size(), 4u);
    EXPECT_EQ(gm.groups[2].size, 2);
    EXPECT_EQ(gm.mixed_group, (std::vector<std::size_t>{2, 3, 2}));
    const auto g = group_state_of(gm, StateSet(0b11010));
    EXPECT_EQ(group_counts(gm, g), (std::array<std::int64_t, 3>{0, 1, 2}));
}

// Count-based membership agrees with explicit materialization for every form.
TEST(GroupSignature, SymbolicMatchesMaterializedStates) {
    for (auto family : {Family::pure, Family::mixed})
        for (int nc = 1; nc <= 3; ++nc)
            for (int na = 1; na <= 3; ++na)
                for (int nm = 0; nm <= 2; ++nm) {
                    const SocietyComposition c = SocietyComposition::of(nc, na, family == Family::mixed ? nm + 1 : 0);
                    for (const auto& f : canonical_forms(family)) {
                        const auto mat = materialize(f, c);
                        const auto sig = GroupSignature::symbolic(f);
                        for (std::uint64_t s = 0; s < (std::uint64_t{1} << c.n); ++s) {
                            const bool member = std::binary_search(mat.signature.states.begin(),
                                                                   mat.signature.states.end(), StateSet(s));
                            ASSERT_EQ(sig.contains(c, group_counts(c, StateSet(s))), member)
                                << f.id.to_string() << " s=" << s;
                        }
                        const auto explicit_sig = GroupSignature::from_states(mat.signature.states, c);
                        ASSERT_TRUE(explicit_sig.has_value());
                    }
                }
}

TEST(GroupSignature, RejectsSetsNotDeterminedByCounts) {
    const SocietyComposition c = SocietyComposition::of(2, 2);
    const std::vector<StateSet> partial{StateSet(0b0001)};
    EXPECT_FALSE(GroupSignature::from_states(partial, c).has_value());
}

TEST(Run, AbsorbedAtStepOneFromEmptyState) {
    const Model m = validate(SocietyComposition::of(9, 1), {2, 2, 2, 2});
    const auto classes = absorbing_classes(PossibilityDigraph(m));
    const auto rules = ramp_rules(m);
    RunOptions opt;
    opt.steps = 10;
    opt.stop_on_entry = true;
    for (std::uint64_t r = 0; r < 20; ++r) {
        Rng rng = substream(9, r);
        const auto st = run_agents(m, rules, StateSet(), opt, classes, rng);
        ASSERT_TRUE(st.hitting_time.has_value());
        EXPECT_EQ(*st.hitting_time, 1u);
        EXPECT_TRUE(classes[std::size_t(*st.class_index)].contains(m.society.anti_conformists()));
        EXPECT_EQ(st.final_state, m.society.anti_conformists().bits());
    }
}

TEST(Run, TwoCycleAlternates) {
    const Model m = validate(SocietyComposition::of(2, 8), {2, 2, 2, 2});
    ASSERT_TRUE(predict(m).has(CanonicalId{Family::pure, 5}));
    const auto gm = GroupModel::ramp(m);
    const std::vector<GroupSignature> known{GroupSignature::symbolic(canonical_form({Family::pure, 5}))};
    RunOptions opt;
    opt.steps = 12;
    opt.record_trajectory = true;
    Rng rng(10);
    const auto st = run_groups(gm, GroupState{{0, 8}}, opt, known, rng);
    EXPECT_EQ(st.hitting_time, std::optional<std::uint64_t>{0});
    EXPECT_FALSE(st.left_class);
    for (const auto& row : st.trajectory) {
        const bool anti = row.step % 2 == 0;
        EXPECT_EQ(row.k_c, anti ? 0 : 2);
        EXPECT_EQ(row.k_a, anti ? 8 : 0);
    }
}

TEST(Batch, IndependentOfWorkerCount) {
    const Model m = validate(SocietyComposition::of(4, 2), {1, 1, 1, 1});
    const auto classes = absorbing_classes(PossibilityDigraph(m));
    const auto rules = ramp_rules(m);
    RunOptions opt;
    opt.steps = 200;
    opt.stop_on_entry = true;
    auto one = [&](Rng& rng) { return run_agents(m, rules, uniform_state(6, rng), opt, classes, rng); };
    const auto a = run_batch(500, classes.size(), 77, 1, one);
    const auto b = run_batch(500, classes.size(), 77, 4, one);
    EXPECT_EQ(a.absorbed, b.absorbed);
    EXPECT_EQ(a.mean_hitting_time, b.mean_hitting_time);
    for (std::size_t r = 0; r < a.runs.size(); ++r) EXPECT_EQ(a.runs[r].final_state, b.runs[r].final_state);
}

TEST(Performance, MillionAgentGroupSteps) {
    const int n = 1'000'000;
    const Model m = validate(SocietyComposition::of(700'000, 300'000), {100'000, 100'000, 100'000, 100'000});
    const auto gm = GroupModel::ramp(m);
    Rng rng(12);
    GroupState g{{350'000, 150'000}};
    const int steps = 20'000;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < steps; ++i) g = step_groups(gm, g, rng);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LE(g.s(), n);
    EXPECT_GE(steps / secs, 1e4) << steps / secs << " steps/s";
}
