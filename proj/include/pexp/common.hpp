#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pexp {

inline constexpr const char* kVersion = "0.1.0";

/// Raised on malformed inputs, bad parameters, and violated call contracts.
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a computation would exceed a configured size budget.
struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a construction that the theory guarantees (for hypotheses in
/// force) fails; carries the witness in its message.
struct verification_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CheckStatus { pass, fail, partial, precondition };

inline const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::partial: return "partial";
        case CheckStatus::precondition: return "precondition";
    }
    return "?";
}

struct CheckResult {
    CheckStatus status = CheckStatus::pass;
    std::string detail;
    bool pass() const { return status == CheckStatus::pass; }
};

// Variable sets are kept as sorted vectors of 1-based indices; dense
// probability tables index them by position, so order is load-bearing.
using VarSet = std::vector<int>;

inline VarSet vs_sorted(VarSet v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline bool vs_contains(const VarSet& a, int v) {
    return std::binary_search(a.begin(), a.end(), v);
}

inline bool vs_subset(const VarSet& a, const VarSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline VarSet vs_union(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline VarSet vs_intersect(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline VarSet vs_diff(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline VarSet vs_symdiff(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(out));
    return out;
}

// Bitmask view of a variable set, available while n <= 64. The exact-moment
// machinery (pseudo-expectation, orthogonalizer) relies on these for memo
// keys; instance-level code does not.
using SetMask = std::uint64_t;

inline SetMask vs_to_mask(const VarSet& a) {
    SetMask m = 0;
    for (int v : a) {
        if (v < 1 || v > 64) throw budget_error("variable index beyond 64-bit mask range");
        m |= SetMask{1} << (v - 1);
    }
    return m;
}

inline VarSet vs_from_mask(SetMask m) {
    VarSet out;
    while (m) {
        int b = std::countr_zero(m);
        out.push_back(b + 1);
        m &= m - 1;
    }
    return out;
}

inline std::string vs_to_string(const VarSet& a) {
    std::string s = "{";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(a[i]);
    }
    return s + "}";
}

namespace detail {
inline void subsets_rec(const VarSet& universe, int d, std::size_t start, VarSet& cur,
                        std::vector<VarSet>& out) {
    out.push_back(cur);
    if (static_cast<int>(cur.size()) >= d) return;
    for (std::size_t i = start; i < universe.size(); ++i) {
        cur.push_back(universe[i]);
        subsets_rec(universe, d, i + 1, cur, out);
        cur.pop_back();
    }
}
}  // namespace detail

/// All subsets of the universe of size <= d, sorted by (size, lexicographic).
inline std::vector<VarSet> subsets_up_to(const VarSet& universe, int d) {
    std::vector<VarSet> out;
    VarSet cur;
    VarSet u = vs_sorted(universe);
    detail::subsets_rec(u, d, 0, cur, out);
    std::sort(out.begin(), out.end(), [](const VarSet& a, const VarSet& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

}  // namespace pexp
