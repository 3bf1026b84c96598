#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <numeric>
#include <random>

#include "anoninf/chain_analysis.hpp"
#include "anoninf/canonical.hpp"

using namespace anoninf;

namespace {

// Dense oracle over all 2^n states, independent of the lumped and banded code paths.
struct DenseChain {
    int n;
    std::size_t count;
    Eigen::MatrixXd P;
    std::vector<std::vector<char>> reach; // reflexive-transitive closure

    DenseChain(const Model& m, std::span<const AggregationRule> rules) : n(m.society.n), count(std::size_t{1} << n) {
        P = Eigen::MatrixXd::Zero(Eigen::Index(count), Eigen::Index(count));
        for (std::size_t s = 0; s < count; ++s)
            for (std::size_t t = 0; t < count; ++t)
                P(Eigen::Index(s), Eigen::Index(t)) = transition_probability(StateSet(s), StateSet(t), rules);
        reach.assign(count, std::vector<char>(count, 0));
        for (std::size_t s = 0; s < count; ++s) {
            std::vector<std::size_t> stack{s};
            reach[s][s] = 1;
            while (!stack.empty()) {
                const auto v = stack.back();
                stack.pop_back();
                for (std::size_t w = 0; w < count; ++w)
                    if (P(Eigen::Index(v), Eigen::Index(w)) > 0 && !reach[s][w]) {
                        reach[s][w] = 1;
                        stack.push_back(w);
                    }
            }
        }
    }

    // Closed communicating classes as sorted state lists.
    std::vector<std::vector<std::size_t>> closed_classes() const {
        std::vector<std::vector<std::size_t>> out;
        std::vector<char> done(count, 0);
        for (std::size_t s = 0; s < count; ++s) {
            if (done[s]) continue;
            bool closed = true;
            std::vector<std::size_t> cls;
            for (std::size_t t = 0; t < count; ++t) {
                if (reach[s][t] && !reach[t][s]) closed = false;
                if (reach[s][t] && reach[t][s]) cls.push_back(t);
            }
            for (auto t : cls) done[t] = 1;
            if (closed) out.push_back(cls);
        }
        return out;
    }

    // gcd of closed-walk lengths through the first state, via boolean matrix powers.
    int period(const std::vector<std::size_t>& cls) const {
        const auto k = Eigen::Index(cls.size());
        Eigen::MatrixXi A(k, k), W = Eigen::MatrixXi::Identity(k, k);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j) A(i, j) = P(Eigen::Index(cls[i]), Eigen::Index(cls[j])) > 0;
        int g = 0;
        for (int len = 1; len <= 2 * int(k); ++len) {
            W = (W * A).unaryExpr([](int x) { return x > 0 ? 1 : 0; });
            if (W(0, 0)) g = std::gcd(g, len);
        }
        return g;
    }
};

Model random_model(std::mt19937_64& rng, int n, bool allow_mixed) {
    const int nc = int(rng() % (n + 1));
    const int na = int(rng() % (n - nc + 1));
    const int nm = allow_mixed ? n - nc - na : 0;
    const int na2 = allow_mixed ? na : n - nc;
    const int lc = int(rng() % n), rc = int(rng() % (n - lc)), la = int(rng() % n), ra = int(rng() % (n - la));
    return validate(SocietyComposition::of(nc, na2, nm), {lc, rc, la, ra});
}

} // namespace

TEST(Digraph, Examples) {
    const Model m = validate(SocietyComposition::of(1, 1), {0, 0, 0, 0});
    const PossibilityDigraph g(m);
    EXPECT_EQ(g.successor_count(StateSet(1)), 4u);
    EXPECT_EQ(g.successor_count(StateSet(2)), 4u);
    EXPECT_EQ(g.successor_count(StateSet()), 1u);
    EXPECT_TRUE(g.has_arc(StateSet(), m.society.anti_conformists()));
    EXPECT_THROW(PossibilityDigraph(validate(SocietyComposition::of(10, 7), {0, 0, 0, 0})), CapExceeded);
}

TEST(Digraph, SuccessorsMatchPairPredicate) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Model m = random_model(rng, 5, true);
        const PossibilityDigraph g(m);
        for (std::uint64_t s = 0; s < 32; ++s) {
            std::uint64_t count = 0;
            for (std::uint64_t t = 0; t < 32; ++t) count += is_possible(StateSet(s), StateSet(t), m);
            EXPECT_EQ(g.successor_count(StateSet(s)), count);
            std::uint64_t visited = 0;
            g.for_each_successor(StateSet(s), [&](StateSet t) {
                ++visited;
                EXPECT_TRUE(is_possible(StateSet(s), t, m));
            });
            EXPECT_EQ(visited, count);
        }
    }
}

TEST(AbsorbingClasses, DegenerateSocieties) {
    for (int n = 1; n <= 6; ++n) {
        auto classes = absorbing_classes(PossibilityDigraph(validate(SocietyComposition::of(n, 0), {0, 0, 0, 0})));
        ASSERT_EQ(classes.size(), 2u);
        EXPECT_EQ(classes[0].states, std::vector<StateSet>{StateSet()});
        EXPECT_EQ(classes[1].states, std::vector<StateSet>{StateSet::full(n)});

        classes = absorbing_classes(PossibilityDigraph(validate(SocietyComposition::of(0, n), {0, 0, 0, 0})));
        ASSERT_EQ(classes.size(), 1u);
        EXPECT_EQ(classes[0].period, 2);
        EXPECT_EQ(classes[0].states, (std::vector<StateSet>{StateSet(), StateSet::full(n)}));

        classes = absorbing_classes(PossibilityDigraph(validate(SocietyComposition::of(0, 0, n), {0, 0, 0, 0})));
        ASSERT_EQ(classes.size(), 1u);
        EXPECT_EQ(classes[0].states.size(), std::size_t{1} << n);
    }
}

TEST(AbsorbingClasses, KnownPureShapes) {
    // n=10, n_c=2, Z=(2,2,2,2): the two-cycle N^a <-> N^c
    const Model m = validate(SocietyComposition::of(2, 8), {2, 2, 2, 2});
    const auto classes = absorbing_classes(PossibilityDigraph(m));
    bool found = false;
    for (const auto& c : classes)
        if (c.period == 2 && c.states == std::vector<StateSet>{m.society.conformists(), m.society.anti_conformists()})
            found = true;
    EXPECT_TRUE(found);
    for (const auto& c : classes) {
        const auto match = match_canonical(c.signature(), m.society);
        if (c.period == 2) {
            EXPECT_EQ(match.canonical, (CanonicalId{Family::pure, 5}));
        }
    }
}

// Closed classes and periods against the dense oracle, plus block structure.
TEST(AbsorbingClasses, MatchDenseOracle) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + int(rng() % 6);
        const Model m = random_model(rng, n, trial % 2 == 1);
        const auto rules = ramp_rules(m);
        const DenseChain dense(m, rules);
        const PossibilityDigraph g(m);
        const auto classes = absorbing_classes(g);
        const auto expected = dense.closed_classes();
        ASSERT_EQ(classes.size(), expected.size());
        for (std::size_t c = 0; c < classes.size(); ++c) {
            std::vector<std::size_t> got;
            for (auto s : classes[c].states) got.push_back(s.bits());
            EXPECT_EQ(got, expected[c]);
            EXPECT_EQ(classes[c].period, dense.period(expected[c]));
            ASSERT_EQ(int(classes[c].blocks.size()), classes[c].period);
            for (int b = 0; b < classes[c].period; ++b)
                for (auto s : classes[c].blocks[std::size_t(b)])
                    g.for_each_successor(s, [&](StateSet t) {
                        const auto& next = classes[c].blocks[std::size_t((b + 1) % classes[c].period)];
                        EXPECT_TRUE(std::binary_search(next.begin(), next.end(), t));
                    });
        }
    }
}

// Absorption probabilities against a full 2^n solve of (I - Q) B = R.
TEST(Absorption, MatchDenseSolve) {
    std::mt19937_64 rng(23);
    int multi = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + int(rng() % 5);
        const Model m = random_model(rng, n, trial % 3 == 0);
        const std::vector<double> alpha{std::uniform_real_distribution<>(0.1, 0.9)(rng)};
        const auto rules = ramp_rules(m, alpha);
        const DenseChain dense(m, rules);
        const PossibilityDigraph g(m);
        const auto classes = absorbing_classes(g);
        if (classes.size() > 1) ++multi;
        std::vector<int> class_of(dense.count, -1);
        for (std::size_t c = 0; c < classes.size(); ++c)
            for (auto s : classes[c].states) class_of[s.bits()] = int(c);
        std::vector<std::size_t> transient;
        for (std::size_t s = 0; s < dense.count; ++s)
            if (class_of[s] < 0) transient.push_back(s);
        const auto k = Eigen::Index(transient.size());
        Eigen::MatrixXd Q(k, k), R = Eigen::MatrixXd::Zero(k, Eigen::Index(classes.size()));
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) Q(i, j) = dense.P(Eigen::Index(transient[i]), Eigen::Index(transient[j]));
            for (std::size_t t = 0; t < dense.count; ++t)
                if (class_of[t] >= 0) R(i, class_of[t]) += dense.P(Eigen::Index(transient[i]), Eigen::Index(t));
        }
        const Eigen::MatrixXd B = (Eigen::MatrixXd::Identity(k, k) - Q).partialPivLu().solve(R);
        for (std::size_t s = 0; s < dense.count; ++s) {
            const auto probs = absorption_probabilities(g, classes, rules, StateSet(s));
            const auto it = std::find(transient.begin(), transient.end(), s);
            for (std::size_t c = 0; c < classes.size(); ++c) {
                const double expect = it == transient.end() ? (class_of[s] == int(c) ? 1.0 : 0.0)
                                                            : B(it - transient.begin(), Eigen::Index(c));
                EXPECT_NEAR(probs[c], expect, 1e-10);
            }
        }
    }
    EXPECT_GT(multi, 10);
}

TEST(Absorption, FromEmptyStateInPolarizedSociety) {
    const Model m = validate(SocietyComposition::of(9, 1), {2, 2, 2, 2});
    const PossibilityDigraph g(m);
    const auto classes = absorbing_classes(g);
    const auto rules = ramp_rules(m);
    const auto probs = absorption_probabilities(g, classes, rules, StateSet());
    for (std::size_t c = 0; c < classes.size(); ++c)
        EXPECT_EQ(probs[c], classes[c].contains(m.society.anti_conformists()) ? 1.0 : 0.0);
}

TEST(Stationary, PointMassAndTwoCycle) {
    const Model pol = validate(SocietyComposition::of(9, 1), {2, 2, 2, 2});
    const PossibilityDigraph g(pol);
    for (const auto& c : absorbing_classes(g)) EXPECT_EQ(stationary_within(g, c, ramp_rules(pol)), std::vector<double>{1.0});

    const Model cyc = validate(SocietyComposition::of(0, 4), {0, 0, 1, 1});
    const PossibilityDigraph h(cyc);
    const auto classes = absorbing_classes(h);
    ASSERT_EQ(classes.size(), 1u);
    const auto pi = stationary_within(h, classes[0], ramp_rules(cyc));
    EXPECT_NEAR(pi[0], 0.5, 1e-14);
    EXPECT_NEAR(pi[1], 0.5, 1e-14);
}

// Stationarity residual on the dense matrix restricted to each class.
TEST(Stationary, ResidualOnDenseMatrix) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + int(rng() % 7);
        const Model m = random_model(rng, n, trial % 2 == 0);
        const auto rules = ramp_rules(m);
        const DenseChain dense(m, rules);
        const PossibilityDigraph g(m);
        for (const auto& cls : absorbing_classes(g)) {
            const auto pi = stationary_within(g, cls, rules);
            double sum = 0, residual = 0;
            for (double p : pi) sum += p;
            for (std::size_t j = 0; j < cls.states.size(); ++j) {
                double flow = 0;
                for (std::size_t i = 0; i < cls.states.size(); ++i)
                    flow += pi[i] * dense.P(Eigen::Index(cls.states[i].bits()), Eigen::Index(cls.states[j].bits()));
                residual = std::max(residual, std::abs(flow - pi[j]));
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
            EXPECT_LT(residual, 1e-10);
        }
    }
}
