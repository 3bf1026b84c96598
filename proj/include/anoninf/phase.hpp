#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_model.hpp"
#include "parallel.hpp"
#include "theory.hpp"

namespace anoninf {

enum class Region {
    polarization_anti,
    polarization_conf,
    polarization_both,
    fuzzy_polarization,
    cycle,
    fuzzy_cycle,
    chaotic_polarization_no,
    chaotic_polarization_yes,
    chaos,
    consensus,
    almost_consensus_yes,
    almost_consensus_no,
};

inline const char* to_string(Region r) {
    switch (r) {
    case Region::polarization_anti: return "Polarization(Na)";
    case Region::polarization_conf: return "Polarization(Nc)";
    case Region::polarization_both: return "Polarization(both)";
    case Region::fuzzy_polarization: return "FuzzyPolarization";
    case Region::cycle: return "Cycle";
    case Region::fuzzy_cycle: return "FuzzyCycle";
    case Region::chaotic_polarization_no: return "ChaoticPolarizationNo";
    case Region::chaotic_polarization_yes: return "ChaoticPolarizationYes";
    case Region::chaos: return "Chaos";
    case Region::consensus: return "Consensus";
    case Region::almost_consensus_yes: return "AlmostConsensusYes";
    case Region::almost_consensus_no: return "AlmostConsensusNo";
    }
    return "?";
}

struct RegionLabel {
    std::vector<Region> regions;   // sorted, unique
    std::vector<int> fired_cases;  // sorted
    std::vector<Condition> trace;
    double margin = std::numeric_limits<double>::infinity(); // distance to the nearest inequality switch
    bool near_limit = false;       // l + r within the limit tolerance of 1

    std::string label() const {
        std::string out;
        for (auto r : regions) out += (out.empty() ? "" : "+") + std::string(to_string(r));
        return out;
    }
};

namespace detail {

// Evaluates every inequality (no short-circuit) so that the margin covers all of them.
class Inequalities {
public:
    bool le(const std::string& expr, double a, double b) { return note(expr, a, "<=", b, a <= b); }
    bool lt(const std::string& expr, double a, double b) { return note(expr, a, "<", b, a < b); }
    bool ge(const std::string& expr, double a, double b) { return note(expr, a, ">=", b, a >= b); }
    bool gt(const std::string& expr, double a, double b) { return note(expr, a, ">", b, a > b); }

    std::vector<Condition> trace;
    double margin = std::numeric_limits<double>::infinity();

private:
    bool note(const std::string& expr, double a, const char* op, double b, bool v) {
        margin = std::min(margin, std::abs(a - b));
        std::ostringstream os;
        os.precision(6);
        os << a << ' ' << op << ' ' << b;
        trace.push_back({expr, os.str(), v});
        return v;
    }
};

inline void finish(RegionLabel& r, Inequalities& q) {
    std::sort(r.regions.begin(), r.regions.end());
    r.regions.erase(std::unique(r.regions.begin(), r.regions.end()), r.regions.end());
    std::sort(r.fired_cases.begin(), r.fired_cases.end());
    r.trace = std::move(q.trace);
    r.margin = q.margin;
}

inline void polarization(RegionLabel& r, bool anti, bool conf) {
    if (anti && conf) r.regions.push_back(Region::polarization_both);
    else if (anti) r.regions.push_back(Region::polarization_anti);
    else if (conf) r.regions.push_back(Region::polarization_conf);
}

} // namespace detail

// Same thresholds for both groups: l and reactiveness gamma, so r = 1 - l - 1/gamma.
inline RegionLabel classify_situation1(double n_a, double l, double gamma, double limit_tol = 0.0) {
    detail::Inequalities q;
    RegionLabel r;
    const double inv = std::isinf(gamma) ? 0.0 : 1.0 / gamma;
    const bool anti = q.le("n_a <= l", n_a, l);
    const bool conf = q.le("n_a <= 1 - l - 1/gamma", n_a, 1.0 - l - inv);
    const bool c1 = q.ge("n_a >= 1 - l", n_a, 1.0 - l);
    const bool c2 = q.ge("n_a >= 1/gamma + l", n_a, inv + l);
    if (anti) r.fired_cases.push_back(1);
    if (conf) r.fired_cases.push_back(2);
    if (c1 && c2) r.fired_cases.push_back(5);
    detail::polarization(r, anti, conf);
    if (c1 && c2) r.regions.push_back(Region::cycle);
    if (r.fired_cases.empty()) {
        r.fired_cases.push_back(20);
        r.regions.push_back(Region::chaos);
    }
    r.near_limit = inv <= limit_tol;
    detail::finish(r, q);
    return r;
}

// l = r within each group; l_a, l_c in [0, 1/2).
inline RegionLabel classify_situation2(double n_a, double l_a, double l_c, double limit_tol = 0.0) {
    detail::Inequalities q;
    RegionLabel r;
    const bool p1 = q.le("n_a <= l_a", n_a, l_a), p2 = q.le("n_a <= l_c", n_a, l_c);
    const bool c1 = q.ge("n_a >= 1 - l_a", n_a, 1.0 - l_a), c2 = q.ge("n_a >= 1 - l_c", n_a, 1.0 - l_c);
    const bool f1 = q.gt("n_a > l_c", n_a, l_c), f2 = q.lt("n_a < 1 - l_c", n_a, 1.0 - l_c);
    const bool g1 = q.gt("n_a > l_a", n_a, l_a), g2 = q.lt("n_a < 1 - l_a", n_a, 1.0 - l_a);
    if (p1 && p2) {
        r.fired_cases.insert(r.fired_cases.end(), {1, 2});
        r.regions.push_back(Region::polarization_both);
    }
    if (c1 && c2) {
        r.fired_cases.push_back(5);
        r.regions.push_back(Region::cycle);
    }
    if (c1 && f1 && f2) {
        r.fired_cases.push_back(10);
        r.regions.push_back(Region::fuzzy_cycle);
    }
    if (p2 && g1 && g2) {
        r.fired_cases.insert(r.fired_cases.end(), {11, 12});
        r.regions.push_back(Region::fuzzy_polarization);
    }
    if (r.fired_cases.empty()) {
        r.fired_cases.push_back(20);
        r.regions.push_back(Region::chaos);
    }
    r.near_limit = 1.0 - 2.0 * std::max(l_a, l_c) <= limit_tol;
    detail::finish(r, q);
    return r;
}

// Vanishing share of anti-conformists: n_a = epsilon.
inline RegionLabel classify_situation3(double eps, double l_c, double r_c, double l_a, double r_a,
                                       double limit_tol = 0.0) {
    detail::Inequalities q;
    RegionLabel r;
    auto fire = [&](int k, Region g) {
        r.fired_cases.push_back(k);
        r.regions.push_back(g);
    };
    const bool lc_big = q.ge("l_c >= eps", l_c, eps), rc_big = q.ge("r_c >= eps", r_c, eps);
    const bool la_big = q.ge("l_a >= eps", l_a, eps), ra_big = q.ge("r_a >= eps", r_a, eps);
    const bool ra_top = q.ge("r_a >= 1 - eps", r_a, 1.0 - eps), la_top = q.ge("l_a >= 1 - eps", l_a, 1.0 - eps);
    const bool ra_over = q.gt("r_a > 1 - eps", r_a, 1.0 - eps), la_over = q.gt("l_a > 1 - eps", l_a, 1.0 - eps);
    const bool case1 = lc_big && la_big, case2 = rc_big && ra_big;
    detail::polarization(r, case1, case2);
    if (case1) r.fired_cases.push_back(1);
    if (case2) r.fired_cases.push_back(2);
    if (lc_big && ra_top) fire(3, Region::almost_consensus_no);
    if (rc_big && la_top) fire(4, Region::almost_consensus_yes);
    if (!la_big && lc_big && !ra_top) fire(11, Region::almost_consensus_no);
    if (!ra_big && rc_big && !la_top) fire(12, Region::almost_consensus_yes);
    if (!lc_big && !rc_big && ra_over) fire(13, Region::chaotic_polarization_no);
    if (!lc_big && !rc_big && la_over) fire(14, Region::chaotic_polarization_yes);
    if (r.fired_cases.empty()) fire(20, Region::chaos);
    r.near_limit = std::min(1.0 - l_c - r_c, 1.0 - l_a - r_a) <= limit_tol;
    detail::finish(r, q);
    return r;
}

struct PhaseConfig {
    int situation = 1;
    int resolution = 200;
    // situation 1
    std::string axes = "l-na"; // or "gamma-na"
    double gamma = std::numeric_limits<double>::infinity(); // 0 selects the minimum 1/(1-l)
    double l = 0.25;
    double gamma_max = 10.0;
    // situation 2
    double l_c = 0.25;
    // situation 3
    double eps = 0.01;
    double l_c3 = 0.2;
    double r_c3 = 0.3;
    int jobs = 1;
};

// Normalized parameters behind one grid point.
struct PhasePoint {
    double n_a = 0, l_c = 0, r_c = 0, l_a = 0, r_a = 0;
};

struct PhaseRow {
    int situation = 0;
    std::string axis1_name;
    double axis1 = 0;
    std::string axis2_name;
    double axis2 = 0;
    std::string label;
    std::vector<std::string> fired;
    bool boundary = false;
    bool edge = false; // n_a at 0 or 1, where the model changes nature
    PhasePoint point;
    RegionLabel region;
};

namespace detail {

struct GridPoint {
    double a1, a2;
};

inline RegionLabel classify_at(const PhaseConfig& cfg, double a1, double a2) {
    const double tol = 1.0 / cfg.resolution;
    switch (cfg.situation) {
    case 1:
        if (cfg.axes == "gamma-na") return classify_situation1(a2, cfg.l, a1, tol);
        return classify_situation1(a2, a1, cfg.gamma == 0.0 ? 1.0 / (1.0 - a1) : cfg.gamma, tol);
    case 2: return classify_situation2(a2, a1, cfg.l_c, tol);
    default: return classify_situation3(cfg.eps, cfg.l_c3, cfg.r_c3, a1, a2, tol);
    }
}

inline PhasePoint point_at(const PhaseConfig& cfg, double a1, double a2) {
    switch (cfg.situation) {
    case 1: {
        const double l = cfg.axes == "gamma-na" ? cfg.l : a1;
        const double gamma = cfg.axes == "gamma-na" ? a1 : cfg.gamma == 0.0 ? 1.0 / (1.0 - a1) : cfg.gamma;
        const double r = 1.0 - l - (std::isinf(gamma) ? 0.0 : 1.0 / gamma);
        return {a2, l, r, l, r};
    }
    case 2: return {a2, cfg.l_c, cfg.l_c, a1, a1};
    default: return {cfg.eps, cfg.l_c3, cfg.r_c3, a1, a2};
    }
}

} // namespace detail

inline std::vector<PhaseRow> sweep_grid(const PhaseConfig& cfg) {
    if (cfg.resolution < 2) throw std::invalid_argument("resolution must be at least 2");
    if (cfg.situation < 1 || cfg.situation > 3) throw std::invalid_argument("situation must be 1, 2 or 3");
    if (cfg.situation == 1 && cfg.axes != "l-na" && cfg.axes != "gamma-na")
        throw std::invalid_argument("situation 1 axes must be l-na or gamma-na");
    const int R = cfg.resolution;
    std::string n1, n2;
    std::vector<detail::GridPoint> pts;
    auto closed = [R](double lo, double hi, int i) { return lo + (hi - lo) * i / (R - 1); };
    auto half_open = [R](double lo, double hi, int i) { return lo + (hi - lo) * i / R; };
    if (cfg.situation == 1 && cfg.axes == "gamma-na") {
        n1 = "gamma";
        n2 = "n_a";
        const double gmin = 1.0 / (1.0 - cfg.l);
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < R; ++j) pts.push_back({closed(gmin, cfg.gamma_max, i), closed(0, 1, j)});
    } else if (cfg.situation == 1) {
        n1 = "l";
        n2 = "n_a";
        for (int i = 0; i < R; ++i) {
            const double l = half_open(0, 1, i);
            if (cfg.gamma != 0.0 && !std::isinf(cfg.gamma) && cfg.gamma < 1.0 / (1.0 - l)) continue;
            for (int j = 0; j < R; ++j) pts.push_back({l, closed(0, 1, j)});
        }
    } else if (cfg.situation == 2) {
        n1 = "l_a";
        n2 = "n_a";
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < R; ++j) pts.push_back({half_open(0, 0.5, i), closed(0, 1, j)});
    } else {
        n1 = "l_a";
        n2 = "r_a";
        for (int i = 0; i < R; ++i)
            for (int j = 0; i + j < R; ++j) pts.push_back({half_open(0, 1, i), half_open(0, 1, j)});
    }

    return parallel_map<PhaseRow>(pts.size(), cfg.jobs, [&](std::size_t k) {
        const auto [a1, a2] = pts[k];
        PhaseRow row;
        row.situation = cfg.situation;
        row.axis1_name = n1;
        row.axis1 = a1;
        row.axis2_name = n2;
        row.axis2 = a2;
        row.point = detail::point_at(cfg, a1, a2);
        row.region = detail::classify_at(cfg, a1, a2);
        if (cfg.situation != 3 && (a2 == 0.0 || a2 == 1.0)) {
            // one group is absent: consensus {0},{N} or the cycle 0 -> N -> 0
            row.edge = row.boundary = true;
            row.label = to_string(a2 == 0.0 ? Region::consensus : Region::cycle);
            row.fired = a2 == 0.0 ? std::vector<std::string>{"D1", "D2"} : std::vector<std::string>{"D3"};
            return row;
        }
        // a point sitting on a boundary takes the union of the labels around it
        constexpr double h = 1e-9;
        std::set<Region> regions(row.region.regions.begin(), row.region.regions.end());
        std::set<int> cases(row.region.fired_cases.begin(), row.region.fired_cases.end());
        for (auto [d1, d2] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}}) {
            const auto nb = detail::classify_at(cfg, a1 + d1, a2 + d2);
            if (nb.regions != row.region.regions) row.boundary = true;
            regions.insert(nb.regions.begin(), nb.regions.end());
            cases.insert(nb.fired_cases.begin(), nb.fired_cases.end());
        }
        RegionLabel shown;
        shown.regions.assign(regions.begin(), regions.end());
        row.label = shown.label();
        for (int c : cases) row.fired.push_back(std::to_string(c));
        return row;
    });
}

inline void write_csv(std::ostream& out, const std::vector<PhaseRow>& rows) {
    out << "situation,axis1_name,axis1,axis2_name,axis2,label,fired_cases,boundary\n";
    for (const auto& r : rows) {
        std::string fired;
        for (const auto& f : r.fired) fired += (fired.empty() ? "" : ";") + f;
        char a1[32], a2[32];
        std::snprintf(a1, sizeof a1, "%.6g", r.axis1);
        std::snprintf(a2, sizeof a2, "%.6g", r.axis2);
        out << r.situation << ',' << r.axis1_name << ',' << a1 << ',' << r.axis2_name << ',' << a2 << ',' << r.label
            << ',' << fired << ',' << (r.boundary ? "true" : "false") << '\n';
    }
}

// Finite-n cross-check: scale a grid point by n, round, and ask the pure-case theorem.
struct BackMapEntry {
    PhaseRow row;
    int n_c = 0;
    InfluenceParams z;
    std::vector<int> finite_cases;
};

struct BackMapReport {
    std::size_t checked = 0;
    std::size_t skipped_boundary = 0;
    std::size_t skipped_invalid = 0;
    std::vector<BackMapEntry> mismatches;
};

inline BackMapReport back_map(const std::vector<PhaseRow>& rows, int n) {
    BackMapReport rep;
    const double tol = 1.0 / n;
    auto scaled = [n](double x) { return int(std::lround(x * n)); };
    for (const auto& row : rows) {
        const auto& p = row.point;
        if (row.edge || row.boundary || row.region.margin <= tol ||
            std::min(1.0 - p.l_c - p.r_c, 1.0 - p.l_a - p.r_a) <= 2.0 * tol) {
            ++rep.skipped_boundary;
            continue;
        }
        const int na = scaled(p.n_a);
        const InfluenceParams z{scaled(p.l_c), scaled(p.r_c), scaled(p.l_a), scaled(p.r_a)};
        if (na < 1 || na > n - 1 || z.l_c + z.r_c >= n || z.l_a + z.r_a >= n || z.r_c < 0 || z.r_a < 0) {
            ++rep.skipped_invalid;
            continue;
        }
        ++rep.checked;
        const auto pred = predict_pure(n, n - na, z);
        std::vector<int> finite;
        for (auto id : pred.classes) finite.push_back(id.number);
        if (finite != row.region.fired_cases) rep.mismatches.push_back({row, n - na, z, finite});
    }
    return rep;
}

} // namespace anoninf
