#pragma once

#include "pexp/instance.hpp"

namespace fixtures {

inline pexp::Clause cl(std::vector<int> vars, std::vector<int> signs = {}) {
    pexp::Clause c;
    c.vars = std::move(vars);
    if (signs.empty()) signs.assign(c.vars.size(), 1);
    c.signs = std::move(signs);
    return c;
}

/// Three-clause path on 7 variables: {1,2,3}-{3,4,5}-{5,6,7}, all-positive.
inline pexp::Instance path3(int n = 7) {
    return pexp::Instance(n, 3, {cl({1, 2, 3}), cl({3, 4, 5}), cl({5, 6, 7})});
}

/// Three-clause cycle: {1,2,3}-{3,4,5}-{5,6,1}.
inline pexp::Instance cycle3() {
    return pexp::Instance(6, 3, {cl({1, 2, 3}), cl({3, 4, 5}), cl({5, 6, 1})});
}

/// Two clauses sharing two vertices: a 2-cycle.
inline pexp::Instance share2() {
    return pexp::Instance(4, 3, {cl({1, 2, 3}), cl({2, 3, 4})});
}

/// Six-clause path on 13 variables; endpoints at distance 6.
inline pexp::Instance path6() {
    return pexp::Instance(13, 3,
                          {cl({1, 2, 3}), cl({3, 4, 5}), cl({5, 6, 7}), cl({7, 8, 9}),
                           cl({9, 10, 11}), cl({11, 12, 13})});
}

/// Two disjoint, non-adjacent clauses plus isolated vertices.
inline pexp::Instance far_pair(int n = 10) {
    return pexp::Instance(n, 3, {cl({1, 2, 3}), cl({7, 8, 9})});
}

}  // namespace fixtures
