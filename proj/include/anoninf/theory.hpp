#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "canonical.hpp"
#include "core_model.hpp"

namespace anoninf {

struct Condition {
    std::string expr;
    std::string values; // expr with numbers substituted
    bool holds = false;
};

struct CaseEvaluation {
    CanonicalId id;
    std::vector<Condition> conditions;
    bool conditions_hold = false;
    bool overridden = false; // ruled out by an l+r = n-1 clause
    bool fired = false;
};

struct Prediction {
    std::vector<CanonicalId> classes; // sorted, never empty
    std::vector<CaseEvaluation> cases;

    bool has(CanonicalId id) const { return std::find(classes.begin(), classes.end(), id) != classes.end(); }
};

namespace detail {

inline std::string num(int x) { return std::to_string(x); }

inline Condition cmp(std::string expr, int lhs, const char* op, int rhs) {
    const std::string o(op);
    const bool v = o == "<=" ? lhs <= rhs : o == ">=" ? lhs >= rhs : o == "<" ? lhs < rhs : o == ">" ? lhs > rhs : lhs == rhs;
    return {std::move(expr), num(lhs) + " " + o + " " + num(rhs), v};
}

// lo < x < hi with either end optionally closed.
inline Condition range(std::string expr, int lo, bool lo_closed, int x, int hi, bool hi_closed) {
    const bool v = (lo_closed ? lo <= x : lo < x) && (hi_closed ? x <= hi : x < hi);
    return {std::move(expr), num(lo) + (lo_closed ? " <= " : " < ") + num(x) + (hi_closed ? " <= " : " < ") + num(hi), v};
}

inline bool open(int x, int a, int b) { return a < x && x < b; }
inline bool left_open(int x, int a, int b) { return a < x && x <= b; }

struct CaseBuilder {
    Family family;
    std::vector<CaseEvaluation> cases;

    CaseEvaluation& add(int number) {
        cases.push_back(CaseEvaluation{CanonicalId{family, number}, {}, false, false, false});
        return cases.back();
    }

    Prediction finish(int fallback) {
        Prediction p;
        for (auto& c : cases) {
            c.conditions_hold = std::all_of(c.conditions.begin(), c.conditions.end(), [](auto& x) { return x.holds; });
            c.fired = c.conditions_hold && !c.overridden;
            if (c.fired) p.classes.push_back(c.id);
        }
        auto& last = add(fallback);
        last.conditions.push_back({"no other case holds", p.classes.empty() ? "true" : "false", p.classes.empty()});
        last.conditions_hold = last.fired = p.classes.empty();
        if (p.classes.empty()) p.classes.push_back(last.id);
        p.cases = std::move(cases);
        return p;
    }
};

} // namespace detail

inline Prediction predict_pure(int n, int n_c, const InfluenceParams& z) {
    using namespace detail;
    if (n_c < 1 || n_c > n - 1) throw std::invalid_argument("pure prediction needs 1 <= n_c <= n-1");
    const int lc = z.l_c, rc = z.r_c, la = z.l_a, ra = z.r_a, nc = n_c;
    CaseBuilder b{Family::pure, {}};

    b.add(1).conditions = {cmp("n_c >= max(n-l_c, n-l_a)", nc, ">=", std::max(n - lc, n - la))};
    b.add(2).conditions = {cmp("n_c >= max(n-r_c, n-r_a)", nc, ">=", std::max(n - rc, n - ra))};
    b.add(3).conditions = {range("n-l_c <= n_c <= r_a", n - lc, true, nc, ra, true)};
    b.add(4).conditions = {range("n-r_c <= n_c <= l_a", n - rc, true, nc, la, true)};
    b.add(5).conditions = {cmp("n_c <= min(l_c, l_a, r_c, r_a)", nc, "<=", std::min({lc, la, rc, ra}))};
    b.add(6).conditions = {cmp("n_c <= min(r_c, r_a, l_c)", nc, "<=", std::min({rc, ra, lc})),
                           cmp("n_c >= n-r_a", nc, ">=", n - ra)};
    b.add(7).conditions = {cmp("n_c <= min(l_c, l_a, r_c)", nc, "<=", std::min({lc, la, rc})),
                           cmp("n_c >= n-l_a", nc, ">=", n - la)};
    b.add(8).conditions = {cmp("n_c <= min(l_c, l_a, r_a)", nc, "<=", std::min({lc, la, ra})),
                           range("r_c < n_c < n-l_c", rc, false, nc, n - lc, false)};
    b.add(9).conditions = {cmp("n_c <= min(r_c, r_a, l_a)", nc, "<=", std::min({rc, ra, la})),
                           range("l_c < n_c < n-r_c", lc, false, nc, n - rc, false)};
    b.add(10).conditions = {range("max(r_c, l_c) < n_c <= min(r_a, l_a, n-l_c-1, n-r_c-1)", std::max(rc, lc), false,
                                  nc, std::min({ra, la, n - lc - 1, n - rc - 1}), true)};
    b.add(11).conditions = {range("max(n-l_c, r_a+1) <= n_c < n-l_a", std::max(n - lc, ra + 1), true, nc, n - la, false)};
    b.add(12).conditions = {range("max(n-r_c, l_a+1) <= n_c < n-r_a", std::max(n - rc, la + 1), true, nc, n - ra, false)};
    {
        const bool in = (open(nc, rc, n - lc) && open(nc, la, n - rc)) ||
                        ((open(nc, la, n - ra) || open(nc, lc, n - rc)) && left_open(nc, 0, rc));
        b.add(13).conditions = {cmp("l_c >= n-r_a", lc, ">=", n - ra),
                                {"n_c in (]r_c,n-l_c[ & ]l_a,n-r_c[) | ((]l_a,n-r_a[ | ]l_c,n-r_c[) & ]0,r_c])",
                                 "n_c = " + num(nc), in}};
    }
    {
        const bool in = (open(nc, lc, n - rc) && open(nc, ra, n - lc)) ||
                        ((open(nc, ra, n - la) || open(nc, rc, n - lc)) && left_open(nc, 0, lc));
        b.add(14).conditions = {cmp("l_a >= n-r_c", la, ">=", n - rc),
                                {"n_c in (]l_c,n-r_c[ & ]r_a,n-l_c[) | ((]r_a,n-l_a[ | ]r_c,n-l_c[) & ]0,l_c])",
                                 "n_c = " + num(nc), in}};
    }
    b.add(15).conditions = {cmp("l_c + r_c == n-1", lc + rc, "==", n - 1), cmp("r_a >= r_c", ra, ">=", rc),
                            cmp("l_c > l_a", lc, ">", la),
                            range("l_a < n_c < min(n-r_a, n-l_c)", la, false, nc, std::min(n - ra, n - lc), false)};
    b.add(16).conditions = {cmp("l_c + r_c == n-1", lc + rc, "==", n - 1), cmp("l_a >= l_c", la, ">=", lc),
                            cmp("r_c > r_a", rc, ">", ra),
                            range("r_a < n_c < min(n-l_a, n-r_c)", ra, false, nc, std::min(n - la, n - rc), false)};
    b.add(17).conditions = {cmp("l_a + r_a == n-1", la + ra, "==", n - 1), cmp("l_c >= l_a", lc, ">=", la),
                            cmp("n_c < n-r_c", nc, "<", n - rc),
                            {"n_c in ]r_c,n-l_c[ | ]l_c,r_c]", "n_c = " + num(nc),
                             open(nc, rc, n - lc) || left_open(nc, lc, rc)}};
    b.add(18).conditions = {cmp("l_a + r_a == n-1", la + ra, "==", n - 1), cmp("r_c >= r_a", rc, ">=", ra),
                            cmp("n_c < n-l_c", nc, "<", n - lc),
                            {"n_c in ]l_c,n-r_c[ | ]r_c,l_c]", "n_c = " + num(nc),
                             open(nc, lc, n - rc) || left_open(nc, rc, lc)}};
    b.add(19).conditions = {cmp("l_c + r_c == n-1", lc + rc, "==", n - 1),
                            range("max(l_a, r_a) < n_c <= min(l_c, r_c)", std::max(la, ra), false, nc,
                                  std::min(lc, rc), true)};

    for (auto& c : b.cases) {
        const int k = c.id.number;
        if (lc + rc == n - 1 && (k == 6 || k == 7 || k == 8 || k == 13 || k == 14)) c.overridden = true;
        if (la + ra == n - 1 && (k == 11 || k == 12)) c.overridden = true;
    }
    return b.finish(20);
}

inline Prediction predict_mixed(const SocietyComposition& c, const InfluenceParams& z) {
    using namespace detail;
    if (c.n_c < 1 || c.n_a < 1 || c.n_m < 1) throw std::invalid_argument("mixed prediction needs all three groups");
    const int n = c.n, nc = c.n_c, m = c.n_m;
    const int lc = z.l_c, rc = z.r_c, la = z.l_a, ra = z.r_a;
    CaseBuilder b{Family::mixed, {}};

    b.add(1).conditions = {cmp("n_c >= max(n-l_c, n-l_a)", nc, ">=", std::max(n - lc, n - la))};
    b.add(2).conditions = {cmp("n_c >= max(n-r_c, n-r_a)", nc, ">=", std::max(n - rc, n - ra))};
    b.add(3).conditions = {range("max(n-l_c, r_a+1) <= n_c < n-l_a", std::max(n - lc, ra + 1), true, nc, n - la, false)};
    b.add(4).conditions = {range("max(n-r_c, l_a+1) <= n_c < n-r_a", std::max(n - rc, la + 1), true, nc, n - ra, false)};
    b.add(5).conditions = {range("n-l_c <= n_c <= r_a-n_m", n - lc, true, nc, ra - m, true)};
    b.add(6).conditions = {range("n-r_c <= n_c <= l_a-n_m", n - rc, true, nc, la - m, true)};
    b.add(7).conditions = {cmp("n_c+n_m <= min(l_c, l_a, r_c, r_a)", nc + m, "<=", std::min({lc, la, rc, ra}))};
    b.add(8).conditions = {cmp("n_c+n_m <= min(r_c, r_a, l_c)", nc + m, "<=", std::min({rc, ra, lc})),
                           cmp("n_c >= n-r_a", nc, ">=", n - ra)};
    b.add(9).conditions = {cmp("n_c+n_m <= min(l_c, l_a, r_c)", nc + m, "<=", std::min({lc, la, rc})),
                           cmp("n_c >= n-l_a", nc, ">=", n - la)};
    b.add(10).conditions = {cmp("n_c+n_m <= min(l_c, l_a, r_a)", nc + m, "<=", std::min({lc, la, ra})),
                            range("r_c-n_m < n_c < n-l_c", rc - m, false, nc, n - lc, false)};
    b.add(11).conditions = {cmp("n_c+n_m <= min(r_c, r_a, l_a)", nc + m, "<=", std::min({rc, ra, la})),
                            range("l_c-n_m < n_c < n-r_c", lc - m, false, nc, n - rc, false)};
    b.add(12).conditions = {range("max(l_c, r_c) < n_c+n_m <= min(r_a, l_a, n-l_c-1, n-r_c-1)", std::max(lc, rc),
                                  false, nc + m, std::min({ra, la, n - lc - 1, n - rc - 1}), true)};
    {
        const bool in = (open(nc, rc - m, n - lc) && open(nc, la, n - rc)) ||
                        ((open(nc, la - m, n - ra) || open(nc, lc - m, n - rc)) && left_open(nc, 0, rc - m));
        b.add(13).conditions = {
            cmp("l_c >= n-r_a", lc, ">=", n - ra),
            {"n_c in (]r_c-n_m,n-l_c[ & ]l_a,n-r_c[) | ((]l_a-n_m,n-r_a[ | ]l_c-n_m,n-r_c[) & ]0,r_c-n_m])",
             "n_c = " + num(nc), in}};
    }
    {
        const bool in = (open(nc, lc - m, n - rc) && open(nc, ra, n - lc)) ||
                        ((open(nc, ra - m, n - la) || open(nc, rc - m, n - lc)) && left_open(nc, 0, lc - m));
        b.add(14).conditions = {
            cmp("r_c >= n-l_a", rc, ">=", n - la),
            {"n_c in (]l_c-n_m,n-r_c[ & ]r_a,n-l_c[) | ((]r_a-n_m,n-l_a[ | ]r_c-n_m,n-l_c[) & ]0,l_c-n_m])",
             "n_c = " + num(nc), in}};
    }
    b.add(15).conditions = {cmp("l_c + r_c == n-1", lc + rc, "==", n - 1), cmp("r_c <= r_a", rc, "<=", ra),
                            cmp("l_c > l_a", lc, ">", la), cmp("n_c < n-l_c", nc, "<", n - lc),
                            range("l_a < n_c+n_m < n-r_a", la, false, nc + m, n - ra, false)};
    b.add(16).conditions = {cmp("l_c + r_c == n-1", lc + rc, "==", n - 1), cmp("l_c <= l_a", lc, "<=", la),
                            cmp("r_a < r_c", ra, "<", rc), cmp("n_c < n-r_c", nc, "<", n - rc),
                            range("r_a < n_c+n_m < n-l_a", ra, false, nc + m, n - la, false)};
    b.add(17).conditions = {cmp("l_a + r_a == n-1", la + ra, "==", n - 1), cmp("l_c >= l_a", lc, ">=", la),
                            cmp("n_c < n-r_c", nc, "<", n - rc),
                            {"n_c in ]r_c-n_m,n-l_c[ | ]l_c-n_m,r_c-n_m[", "n_c = " + num(nc),
                             open(nc, rc - m, n - lc) || open(nc, lc - m, rc - m)}};
    b.add(18).conditions = {cmp("l_a + r_a == n-1", la + ra, "==", n - 1), cmp("r_c >= r_a", rc, ">=", ra),
                            cmp("n_c < n-l_c", nc, "<", n - lc),
                            {"n_c in ]l_c-n_m,n-r_c[ | ]r_c-n_m,l_c-n_m[", "n_c = " + num(nc),
                             open(nc, lc - m, n - rc) || open(nc, rc - m, lc - m)}};
    b.add(19).conditions = {cmp("l_c + r_c == n-1", lc + rc, "==", n - 1),
                            range("max(l_a, r_a) < n_c <= min(l_c, r_c)", std::max(la, ra), false, nc,
                                  std::min(lc, rc), true)};
    return b.finish(20);
}

// D1 = {0}, D2 = {N}, D3 = 0 -> N -> 0, D4 = 2^N.
inline Prediction predict_degenerate(const SocietyComposition& c, const InfluenceParams&) {
    Prediction p;
    auto add = [&](int k, std::string why) {
        CaseEvaluation e{CanonicalId{Family::degenerate, k}, {{std::move(why), "true", true}}, true, false, true};
        p.cases.push_back(e);
        p.classes.push_back(e.id);
    };
    if (c.n_m == c.n) {
        add(4, "all agents mixed");
    } else if (c.n_m == 0 && c.n_a == 0) {
        add(1, "no anti-conformists");
        add(2, "no anti-conformists");
    } else if (c.n_m == 0 && c.n_c == 0) {
        add(3, "no conformists");
    } else {
        throw std::invalid_argument("composition is not degenerate");
    }
    return p;
}

inline Prediction predict(const Model& m) {
    const auto& c = m.society;
    const auto family = family_for(c);
    if (!family) throw std::invalid_argument("no closed-form prediction for this composition (mixed agents with a missing pure group)");
    switch (*family) {
    case Family::pure: return predict_pure(c.n, c.n_c, m.z);
    case Family::mixed: return predict_mixed(c, m.z);
    case Family::degenerate: return predict_degenerate(c, m.z);
    }
    return {};
}

} // namespace anoninf
