#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "canonical.hpp"
#include "transitions.hpp"

namespace anoninf {

class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Successors depend only on |S|, so the digraph is stored as one interval per cardinality.
class PossibilityDigraph {
public:
    static constexpr int default_cap = 16;

    explicit PossibilityDigraph(const Model& m, int cap = default_cap) : model_(m) {
        if (m.society.n > cap)
            throw CapExceeded("exact analysis limited to n <= " + std::to_string(cap) + " (n = " +
                              std::to_string(m.society.n) + ")");
        for (int s = 0; s <= m.society.n; ++s) by_size_.push_back(successor_interval(s, m));
    }

    const Model& model() const { return model_; }
    int n() const { return model_.society.n; }
    std::uint64_t state_count() const { return std::uint64_t{1} << n(); }
    StateSet lower(int s) const { return by_size_[s].first; }
    StateSet upper(int s) const { return by_size_[s].second; }

    bool has_arc(StateSet from, StateSet to) const {
        const auto& [lo, hi] = by_size_[from.size()];
        return lo.subset_of(to) && to.subset_of(hi);
    }
    std::uint64_t successor_count(StateSet from) const {
        const auto& [lo, hi] = by_size_[from.size()];
        return interval_size(lo, hi);
    }
    template <class F>
    void for_each_successor(StateSet from, F&& f) const {
        const auto& [lo, hi] = by_size_[from.size()];
        for_each_between(lo, hi, f);
    }

private:
    Model model_;
    std::vector<std::pair<StateSet, StateSet>> by_size_;
};

struct AbsorbingClass {
    std::vector<StateSet> states; // sorted
    int period = 1;
    std::vector<std::vector<StateSet>> blocks; // blocks[i] feeds blocks[(i+1) % period]

    bool contains(StateSet s) const { return std::binary_search(states.begin(), states.end(), s); }
    ClassSignature signature() const { return {states, period}; }
};

namespace detail {

// Auxiliary bipartite graph: state S -> node "size |S|" -> every member of that size's successor interval.
// Node ids: states are 0..2^n-1, size nodes follow.
class AuxGraph {
public:
    explicit AuxGraph(const PossibilityDigraph& g) : g_(g), states_(g.state_count()) {}

    std::uint64_t node_count() const { return states_ + g_.n() + 1; }
    bool is_state(std::uint64_t v) const { return v < states_; }

    struct Cursor {
        std::uint64_t sub = 0;
        bool started = false;
    };
    // Next successor of v, or false when exhausted.
    bool next(std::uint64_t v, Cursor& cur, std::uint64_t& out) const {
        if (is_state(v)) {
            if (cur.started) return false;
            cur.started = true;
            out = states_ + StateSet(v).size();
            return true;
        }
        const int s = int(v - states_);
        const std::uint64_t lo = g_.lower(s).bits(), free = g_.upper(s).bits() & ~lo;
        if (!cur.started) {
            cur.started = true;
            cur.sub = 0;
        } else {
            cur.sub = (cur.sub - free) & free;
            if (cur.sub == 0) return false;
        }
        out = lo | cur.sub;
        return true;
    }
    template <class F>
    void for_each_next(std::uint64_t v, F&& f) const {
        Cursor cur;
        std::uint64_t w;
        while (next(v, cur, w)) f(w);
    }

private:
    const PossibilityDigraph& g_;
    std::uint64_t states_;
};

} // namespace detail

inline std::vector<AbsorbingClass> absorbing_classes(const PossibilityDigraph& g) {
    const detail::AuxGraph aux(g);
    const std::uint64_t total = aux.node_count();
    constexpr std::uint32_t unset = ~std::uint32_t{0};
    std::vector<std::uint32_t> index(total, unset), low(total, 0), comp(total, unset);
    std::vector<char> on_stack(total, 0);
    std::vector<std::uint64_t> stack;
    struct Frame {
        std::uint64_t v;
        detail::AuxGraph::Cursor cur;
    };
    std::vector<Frame> frames;
    std::uint32_t counter = 0, comps = 0;

    // iterative Tarjan
    for (std::uint64_t root = 0; root < total; ++root) {
        if (index[root] != unset) continue;
        frames.push_back({root, {}});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!frames.empty()) {
            const std::uint64_t v = frames.back().v;
            std::uint64_t w;
            if (aux.next(v, frames.back().cur, w)) {
                if (index[w] == unset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, {}});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::uint64_t x;
                do {
                    x = stack.back();
                    stack.pop_back();
                    on_stack[x] = 0;
                    comp[x] = comps;
                } while (x != v);
                ++comps;
            }
            frames.pop_back();
            if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
        }
    }

    std::vector<char> closed(comps, 1);
    for (std::uint64_t v = 0; v < total; ++v)
        aux.for_each_next(v, [&](std::uint64_t w) {
            if (comp[w] != comp[v]) closed[comp[v]] = 0;
        });

    std::vector<std::vector<std::uint64_t>> members(comps);
    for (std::uint64_t v = 0; v < total; ++v)
        if (closed[comp[v]]) members[comp[v]].push_back(v);

    std::vector<AbsorbingClass> out;
    std::vector<std::int64_t> dist(total, -1);
    for (std::uint32_t c = 0; c < comps; ++c) {
        if (!closed[c]) continue;
        const auto& nodes = members[c];
        const std::uint64_t start = nodes.front(); // smallest state, since states precede size nodes
        std::vector<std::uint64_t> queue{start};
        dist[start] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const auto v = queue[head];
            aux.for_each_next(v, [&](std::uint64_t w) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            });
        }
        std::int64_t gcd = 0;
        for (auto v : nodes)
            aux.for_each_next(v, [&](std::uint64_t w) { gcd = std::gcd(gcd, dist[v] + 1 - dist[w]); });
        AbsorbingClass cls;
        cls.period = int(gcd / 2); // every cycle of the bipartite auxiliary graph has even length
        cls.blocks.resize(cls.period);
        for (auto v : nodes) {
            if (!aux.is_state(v)) continue;
            cls.states.push_back(StateSet(v));
            cls.blocks[(dist[v] / 2) % cls.period].push_back(StateSet(v));
        }
        for (auto v : nodes) dist[v] = -1;
        out.push_back(std::move(cls));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.states.front() < b.states.front(); });
    return out;
}

namespace detail {

// Probability that a state of size s moves to T; forced agents contribute factor 1.
inline double step_weight(int s, StateSet to, StateSet lower, StateSet upper, std::span<const AggregationRule> rules) {
    double w = 1.0;
    for (std::uint64_t b = (upper - lower).bits(); b; b &= b - 1) {
        const int i = std::countr_zero(b);
        const double p = rules[i](s);
        w *= to.contains(i) ? p : 1.0 - p;
    }
    return w;
}

} // namespace detail

// Row k: absorption probabilities into each class after one step from any state of size k.
// Anonymity lumps the transient system to n+1 unknowns per class.
inline Eigen::MatrixXd absorption_by_size(const PossibilityDigraph& g, std::span<const AbsorbingClass> classes,
                                          std::span<const AggregationRule> rules) {
    const int n = g.n();
    if (int(rules.size()) != n) throw std::invalid_argument("need one rule per agent");
    std::vector<int> class_of(g.state_count(), -1);
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (auto s : classes[c].states) class_of[s.bits()] = int(c);

    const int nc = int(classes.size());
    Eigen::MatrixXd to_class = Eigen::MatrixXd::Zero(n + 1, nc);
    Eigen::MatrixXd to_transient = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int k = 0; k <= n; ++k) {
        const StateSet lo = g.lower(k), hi = g.upper(k);
        for_each_between(lo, hi, [&](StateSet t) {
            const double w = detail::step_weight(k, t, lo, hi, rules);
            const int c = class_of[t.bits()];
            if (c >= 0)
                to_class(k, c) += w;
            else
                to_transient(k, t.size()) += w;
        });
    }
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n + 1, n + 1) - to_transient;
    Eigen::MatrixXd result = system.fullPivLu().solve(to_class);
    if (!result.allFinite()) throw NumericalFailure("absorption system could not be solved");
    for (int k = 0; k <= n; ++k)
        if (std::abs(result.row(k).sum() - 1.0) > 1e-9)
            throw NumericalFailure("absorption probabilities do not sum to 1 for size " + std::to_string(k));
    return result;
}

inline std::vector<double> absorption_probabilities(const PossibilityDigraph& g,
                                                    std::span<const AbsorbingClass> classes,
                                                    std::span<const AggregationRule> rules, StateSet initial) {
    std::vector<double> out(classes.size(), 0.0);
    for (std::size_t c = 0; c < classes.size(); ++c)
        if (classes[c].contains(initial)) {
            out[c] = 1.0;
            return out;
        }
    const Eigen::MatrixXd by_size = absorption_by_size(g, classes, rules);
    for (std::size_t c = 0; c < classes.size(); ++c) out[c] = by_size(initial.size(), Eigen::Index(c));
    return out;
}

// Unique stationary law of the chain restricted to the class, aligned with cls.states.
// The mass per size obeys a small chain of its own; state weights follow from one step out of it.
inline std::vector<double> stationary_within(const PossibilityDigraph& g, const AbsorbingClass& cls,
                                             std::span<const AggregationRule> rules) {
    std::vector<int> sizes;
    for (auto s : cls.states) sizes.push_back(s.size());
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    const int m = int(sizes.size());
    auto slot = [&](int size) { return int(std::lower_bound(sizes.begin(), sizes.end(), size) - sizes.begin()); };

    Eigen::MatrixXd lumped = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a) {
        const int k = sizes[a];
        const StateSet lo = g.lower(k), hi = g.upper(k);
        for_each_between(lo, hi, [&](StateSet t) { lumped(a, slot(t.size())) += detail::step_weight(k, t, lo, hi, rules); });
    }
    Eigen::MatrixXd system = lumped.transpose() - Eigen::MatrixXd::Identity(m, m);
    system.row(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    const Eigen::VectorXd mass = system.fullPivLu().solve(rhs);
    if (!mass.allFinite()) throw NumericalFailure("stationary system could not be solved");

    std::vector<double> pi(cls.states.size(), 0.0);
    for (std::size_t j = 0; j < cls.states.size(); ++j) {
        const StateSet t = cls.states[j];
        for (int a = 0; a < m; ++a) {
            const StateSet lo = g.lower(sizes[a]), hi = g.upper(sizes[a]);
            if (lo.subset_of(t) && t.subset_of(hi)) pi[j] += mass(a) * detail::step_weight(sizes[a], t, lo, hi, rules);
        }
    }
    return pi;
}

} // namespace anoninf
