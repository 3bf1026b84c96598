#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <string>

namespace anoninf {

// Set of agents currently saying 'yes'. Bit i is agent i.
class StateSet {
public:
    constexpr StateSet() = default;
    constexpr explicit StateSet(std::uint64_t bits) : bits_(bits) {}

    static constexpr StateSet full(int n) {
        return StateSet(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
    }
    // agents first..first+count-1
    static constexpr StateSet range(int first, int count) {
        if (count <= 0) return StateSet();
        return StateSet(full(count).bits_ << first);
    }

    constexpr std::uint64_t bits() const { return bits_; }
    constexpr int size() const { return std::popcount(bits_); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr bool contains(int agent) const { return (bits_ >> agent) & 1u; }
    constexpr bool subset_of(StateSet other) const { return (bits_ & ~other.bits_) == 0; }
    constexpr StateSet complement(int n) const { return StateSet(~bits_ & full(n).bits_); }

    constexpr StateSet with(int agent) const { return StateSet(bits_ | (std::uint64_t{1} << agent)); }

    friend constexpr StateSet operator|(StateSet a, StateSet b) { return StateSet(a.bits_ | b.bits_); }
    friend constexpr StateSet operator&(StateSet a, StateSet b) { return StateSet(a.bits_ & b.bits_); }
    friend constexpr StateSet operator-(StateSet a, StateSet b) { return StateSet(a.bits_ & ~b.bits_); }
    friend constexpr bool operator==(StateSet, StateSet) = default;
    friend constexpr auto operator<=>(StateSet, StateSet) = default;

    // "{0,3,4}"
    std::string to_string() const {
        std::string out = "{";
        bool first = true;
        for (std::uint64_t b = bits_; b; b &= b - 1) {
            if (!first) out += ',';
            out += std::to_string(std::countr_zero(b));
            first = false;
        }
        return out + "}";
    }

private:
    std::uint64_t bits_ = 0;
};

// Visits every T with lower ⊆ T ⊆ upper in increasing bit order.
template <class F>
void for_each_between(StateSet lower, StateSet upper, F&& f) {
    const std::uint64_t free = upper.bits() & ~lower.bits();
    std::uint64_t sub = 0;
    do {
        f(StateSet(lower.bits() | sub));
        sub = (sub - free) & free;
    } while (sub != 0);
}

inline std::uint64_t interval_size(StateSet lower, StateSet upper) {
    return std::uint64_t{1} << (upper - lower).size();
}

} // namespace anoninf
