#pragma once

#include "pexp/closure.hpp"

namespace pexp {

/// Comparison key of the tailor-made set ordering: primary, the clause
/// indices of C(cl(A)) in descending order compared lexicographically (so a
/// set whose closure touches later clauses comes later, and a clause-free
/// closure is minimal); secondary, |A|; tertiary, the sorted element list.
struct OrderKey {
    std::vector<int> zeta_desc;
    int size = 0;
    VarSet elems;
};

inline OrderKey order_key(const Instance& inst, const VarSet& set, int closure_radius = 3) {
    OrderKey k;
    k.elems = vs_sorted(set);
    k.size = static_cast<int>(k.elems.size());
    ClosureOptions opts;
    opts.radius = closure_radius;
    opts.budget_vars = inst.n();
    k.zeta_desc = compute_closure(inst, k.elems, opts).set.clauses;
    std::sort(k.zeta_desc.rbegin(), k.zeta_desc.rend());
    return k;
}

inline bool order_less(const OrderKey& a, const OrderKey& b) {
    if (a.zeta_desc != b.zeta_desc)
        return std::lexicographical_compare(a.zeta_desc.begin(), a.zeta_desc.end(),
                                            b.zeta_desc.begin(), b.zeta_desc.end());
    if (a.size != b.size) return a.size < b.size;
    return a.elems < b.elems;
}

/// The full ordering A_0 < A_1 < ... over every subset of [n] of size <= d
/// (or a user-restricted family). A_0 is the empty set; the singletons come
/// next, before any set whose closure contains a clause.
class SetOrdering {
public:
    SetOrdering(const Instance& inst, int d, std::vector<VarSet> family,
                int closure_radius = 3)
        : degree_(d) {
        std::vector<std::pair<OrderKey, SetMask>> keyed;
        keyed.reserve(family.size());
        for (auto& s : family) {
            OrderKey k = order_key(inst, s, closure_radius);
            SetMask m = vs_to_mask(k.elems);
            keyed.push_back({std::move(k), m});
        }
        std::sort(keyed.begin(), keyed.end(),
                  [](const auto& x, const auto& y) { return order_less(x.first, y.first); });
        sets_.reserve(keyed.size());
        keys_.reserve(keyed.size());
        for (auto& [k, m] : keyed) {
            rank_.emplace(m, static_cast<int>(sets_.size()));
            sets_.push_back(m);
            keys_.push_back(std::move(k));
        }
    }

    int degree() const { return degree_; }
    std::size_t size() const { return sets_.size(); }
    SetMask set_at(int i) const { return sets_.at(i); }
    VarSet vars_at(int i) const { return keys_.at(i).elems; }
    const OrderKey& key_at(int i) const { return keys_.at(i); }

    std::optional<int> rank_of(SetMask m) const {
        auto it = rank_.find(m);
        if (it == rank_.end()) return std::nullopt;
        return it->second;
    }

    /// a strictly precedes b; both must belong to the family.
    bool precedes(SetMask a, SetMask b) const {
        auto ra = rank_of(a), rb = rank_of(b);
        if (!ra || !rb) throw input_error("precedes: set not in the ordering");
        return *ra < *rb;
    }

private:
    int degree_;
    std::vector<SetMask> sets_;
    std::vector<OrderKey> keys_;
    std::unordered_map<SetMask, int> rank_;
};

/// Builds the ordering over all subsets of size <= d.
inline SetOrdering build_ordering(const Instance& inst, int d, int closure_radius = 3,
                                  std::size_t max_sets = 20000) {
    VarSet universe;
    for (int v = 1; v <= inst.n(); ++v) universe.push_back(v);
    auto family = subsets_up_to(universe, d);
    if (family.size() > max_sets)
        throw budget_error("ordering over " + std::to_string(family.size()) +
                           " sets exceeds the budget " + std::to_string(max_sets) +
                           "; use the restricted mode");
    return SetOrdering(inst, d, std::move(family), closure_radius);
}

}  // namespace pexp
