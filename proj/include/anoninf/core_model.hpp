#pragma once

#include <cmath>
#include <compare>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "state_set.hpp"

namespace anoninf {

class ConstraintViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ClassMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class AgentKind { conformist, anti_conformist, mixed };

inline const char* to_string(AgentKind k) {
    switch (k) {
    case AgentKind::conformist: return "conformist";
    case AgentKind::anti_conformist: return "anti-conformist";
    case AgentKind::mixed: return "mixed";
    }
    return "?";
}

// Group sizes. Agents are indexed [conformists | anti-conformists | mixed].
struct SocietyComposition {
    int n = 0;
    int n_c = 0;
    int n_a = 0;
    int n_m = 0;

    static SocietyComposition of(int n_c, int n_a, int n_m = 0) {
        return SocietyComposition{n_c + n_a + n_m, n_c, n_a, n_m};
    }

    AgentKind kind_of(int agent) const {
        if (agent < n_c) return AgentKind::conformist;
        if (agent < n_c + n_a) return AgentKind::anti_conformist;
        return AgentKind::mixed;
    }

    StateSet conformists() const { return StateSet::range(0, n_c); }
    StateSet anti_conformists() const { return StateSet::range(n_c, n_a); }
    StateSet mixed() const { return StateSet::range(n_c + n_a, n_m); }
    StateSet everyone() const { return StateSet::full(n); }

    bool operator==(const SocietyComposition&) const = default;
};

struct InfluenceParams {
    int l_c = 0;
    int r_c = 0;
    int l_a = 0;
    int r_a = 0;

    auto operator<=>(const InfluenceParams&) const = default;
};

struct Model {
    SocietyComposition society;
    InfluenceParams z;
};

inline Model validate(const SocietyComposition& c, const InfluenceParams& z) {
    auto fail = [](const std::string& what) { throw ConstraintViolation(what); };
    if (c.n < 1) fail("n >= 1 violated (n = " + std::to_string(c.n) + ")");
    if (c.n_c < 0 || c.n_a < 0 || c.n_m < 0) fail("group sizes must be nonnegative");
    if (c.n != c.n_c + c.n_a + c.n_m)
        fail("n = n_c + n_a + n_m violated (" + std::to_string(c.n) + " != " +
             std::to_string(c.n_c + c.n_a + c.n_m) + ")");
    if (z.l_c < 0 || z.r_c < 0 || z.l_a < 0 || z.r_a < 0) fail("thresholds must be nonnegative");
    if ((c.n_c > 0 || c.n_m > 0) && z.l_c + z.r_c >= c.n)
        fail("l_c + r_c < n violated (" + std::to_string(z.l_c + z.r_c) + " >= " + std::to_string(c.n) + ")");
    if ((c.n_a > 0 || c.n_m > 0) && z.l_a + z.r_a >= c.n)
        fail("l_a + r_a < n violated (" + std::to_string(z.l_a + z.r_a) + " >= " + std::to_string(c.n) + ")");
    return Model{c, z};
}

enum class Band { zero, interior, one };

inline const char* to_string(Band b) {
    switch (b) {
    case Band::zero: return "Zero";
    case Band::interior: return "Interior";
    case Band::one: return "One";
    }
    return "?";
}

// Where p(s) sits: exactly 0, strictly inside, exactly 1.
template <class Int>
Band positivity(AgentKind kind, const InfluenceParams& z, Int s, Int n) {
    if (s < 0 || s > n) throw std::out_of_range("s out of range [0, n]");
    switch (kind) {
    case AgentKind::conformist:
        if (s <= z.l_c) return Band::zero;
        if (s >= n - z.r_c) return Band::one;
        return Band::interior;
    case AgentKind::anti_conformist:
        if (s <= z.l_a) return Band::one;
        if (s >= n - z.r_a) return Band::zero;
        return Band::interior;
    case AgentKind::mixed:
        if (n - z.r_a <= s && s <= z.l_c) return Band::zero;
        if (n - z.r_c <= s && s <= z.l_a) return Band::one;
        return Band::interior;
    }
    return Band::interior;
}

// Piecewise-linear rule value. The band decides 0 and 1; the ramp only fills the interior.
template <class Int>
double ramp_value(AgentKind kind, const InfluenceParams& z, Int s, Int n, double alpha = 0.5) {
    const Band band = positivity(kind, z, s, n);
    if (band == Band::zero) return 0.0;
    if (band == Band::one) return 1.0;
    auto conf = [&] {
        if (s <= z.l_c) return 0.0;
        if (s >= n - z.r_c) return 1.0;
        return double(s - z.l_c) / double(n - z.r_c - z.l_c);
    };
    auto anti = [&] {
        if (s <= z.l_a) return 1.0;
        if (s >= n - z.r_a) return 0.0;
        return double(n - z.r_a - s) / double(n - z.r_a - z.l_a);
    };
    switch (kind) {
    case AgentKind::conformist: return conf();
    case AgentKind::anti_conformist: return anti();
    case AgentKind::mixed: return alpha * conf() + (1.0 - alpha) * anti();
    }
    return 0.0;
}

class AggregationRule {
public:
    AggregationRule(AgentKind kind, std::vector<double> values) : kind_(kind), values_(std::move(values)) {
        if (values_.size() < 2) throw std::invalid_argument("aggregation rule needs n+1 >= 2 values");
        for (double p : values_)
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("rule values must lie in [0,1]");
    }

    AgentKind kind() const { return kind_; }
    int n() const { return int(values_.size()) - 1; }
    double operator()(int s) const { return values_.at(s); }
    std::span<const double> values() const { return values_; }

    bool operator==(const AggregationRule&) const = default;

private:
    AgentKind kind_;
    std::vector<double> values_;
};

inline AggregationRule ramp_rule(AgentKind kind, const InfluenceParams& z, int n,
                                 std::optional<double> alpha = std::nullopt) {
    if ((kind == AgentKind::mixed) != alpha.has_value())
        throw std::invalid_argument("alpha must be given exactly for mixed agents");
    if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    std::vector<double> p(n + 1);
    for (int s = 0; s <= n; ++s) p[s] = ramp_value(kind, z, s, n, alpha.value_or(0.5));
    return AggregationRule(kind, std::move(p));
}

// Throws ConstraintViolation if the rule's zero/one sets or monotonicity disagree with (kind, z).
inline void check_rule(const AggregationRule& rule, const InfluenceParams& z) {
    const int n = rule.n();
    for (int s = 0; s <= n; ++s) {
        const Band b = positivity(rule.kind(), z, s, n);
        const double p = rule(s);
        if ((b == Band::zero) != (p == 0.0) || (b == Band::one) != (p == 1.0))
            throw ConstraintViolation(std::string(to_string(rule.kind())) + " rule value p(" + std::to_string(s) +
                                      ") = " + std::to_string(p) + " disagrees with band " + to_string(b));
        if (s > 0 && rule.kind() == AgentKind::conformist && p < rule(s - 1))
            throw ConstraintViolation("conformist rule must be nondecreasing");
        if (s > 0 && rule.kind() == AgentKind::anti_conformist && p > rule(s - 1))
            throw ConstraintViolation("anti-conformist rule must be nonincreasing");
    }
}

// One rule per agent, ramp family. `alphas` is empty (all 0.5), a single value, or one per mixed agent.
inline std::vector<AggregationRule> ramp_rules(const Model& m, std::span<const double> alphas = {}) {
    const auto& c = m.society;
    if (!alphas.empty() && alphas.size() != 1 && int(alphas.size()) != c.n_m)
        throw ConstraintViolation("alphas must have length 1 or n_m");
    std::vector<AggregationRule> rules;
    rules.reserve(c.n);
    for (int i = 0; i < c.n; ++i) {
        const AgentKind k = c.kind_of(i);
        if (k != AgentKind::mixed) {
            rules.push_back(ramp_rule(k, m.z, c.n));
            continue;
        }
        const int j = i - c.n_c - c.n_a;
        const double a = alphas.empty() ? 0.5 : alphas.size() == 1 ? alphas[0] : alphas[j];
        rules.push_back(ramp_rule(k, m.z, c.n, a));
    }
    return rules;
}

struct OwaWeights {
    std::vector<double> w; // w[0] is w_1

    static OwaWeights checked(std::vector<double> w) {
        if (w.empty()) throw std::invalid_argument("OWA weights must be nonempty");
        double sum = 0.0;
        for (double x : w) {
            if (!(x >= 0.0)) throw std::invalid_argument("OWA weights must be nonnegative");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("OWA weights must sum to 1");
        return OwaWeights{std::move(w)};
    }
};

// p(s) = w_1 + ... + w_s, pinned to exactly 1 once the remaining weights vanish.
inline AggregationRule rule_from_owa(const OwaWeights& weights) {
    const auto& w = weights.w;
    const int n = int(w.size());
    std::vector<double> tail(n + 1, 0.0);
    for (int s = n - 1; s >= 0; --s) tail[s] = tail[s + 1] + w[s];
    std::vector<double> p(n + 1, 0.0);
    double head = 0.0;
    for (int s = 1; s <= n; ++s) {
        head += w[s - 1];
        p[s] = tail[s] == 0.0 ? 1.0 : std::min(head, 1.0);
    }
    return AggregationRule(AgentKind::conformist, std::move(p));
}

inline OwaWeights owa_from_rule(const AggregationRule& rule) {
    if (rule.kind() != AgentKind::conformist) throw ClassMismatch("OWA weights exist only for conformist rules");
    const int n = rule.n();
    if (rule(0) != 0.0 || rule(n) != 1.0) throw ClassMismatch("conformist rule needs p(0)=0 and p(n)=1");
    std::vector<double> w(n);
    for (int j = 1; j <= n; ++j) {
        w[j - 1] = rule(j) - rule(j - 1);
        if (w[j - 1] < 0.0) throw ClassMismatch("rule is not nondecreasing");
    }
    return OwaWeights{std::move(w)};
}

} // namespace anoninf
