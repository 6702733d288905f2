#pragma once

#include <Eigen/Dense>

#include "pexp/rational.hpp"

namespace pexp {

/// Outcome of exact LDL^T elimination with greedy diagonal pivoting. On pass,
/// `pivots` lists the accepted diagonal pivots (rank-deficient tails append
/// zeros). On fail, `witness` is a rational vector with witness^T M witness =
/// witness_value < 0.
struct PsdCertificate {
    bool psd = true;
    std::vector<Rat> pivots;
    std::vector<int> pivot_order;  // original indices, in elimination order
    std::vector<Rat> witness;
    Rat witness_value = 0;
};

/// Exact PSD test over the rationals: symmetric-pivoted LDL^T, pivoting on
/// the largest remaining diagonal (ties to the lowest index). Rank deficiency
/// is handled by the zero-diagonal case; a zero diagonal with a nonzero
/// off-diagonal residual is indefinite and yields a witness.
inline PsdCertificate check_psd_exact(const std::vector<std::vector<Rat>>& M) {
    const int n = static_cast<int>(M.size());
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(M[i].size()) != n) throw input_error("matrix is not square");
        for (int j = i + 1; j < n; ++j)
            if (M[i][j] != M[j][i]) throw input_error("matrix is not symmetric");
    }
    PsdCertificate cert;
    std::vector<std::vector<Rat>> A = M;
    std::vector<int> active(n);
    std::iota(active.begin(), active.end(), 0);
    // rows of eliminated pivots over the then-active indices, for witnesses
    std::vector<std::vector<std::pair<int, Rat>>> pivot_rows;

    auto build_witness = [&](const std::vector<Rat>& y_active) {
        std::vector<Rat> w(n, Rat(0));
        for (std::size_t i = 0; i < active.size(); ++i) w[active[i]] = y_active[i];
        for (int s = static_cast<int>(cert.pivot_order.size()) - 1; s >= 0; --s) {
            Rat acc = 0;
            for (const auto& [j, aij] : pivot_rows[s]) acc += aij * w[j];
            w[cert.pivot_order[s]] = -acc / cert.pivots[s];
        }
        cert.witness = w;
        Rat val = 0;
        for (int i = 0; i < n; ++i) {
            if (w[i] == 0) continue;
            for (int j = 0; j < n; ++j)
                if (w[j] != 0) val += w[i] * M[i][j] * w[j];
        }
        cert.witness_value = val;
        cert.psd = false;
    };

    while (!active.empty()) {
        // greedy max diagonal
        int best = 0;
        for (std::size_t i = 1; i < active.size(); ++i)
            if (A[active[i]][active[i]] > A[active[best]][active[best]]) best = static_cast<int>(i);
        const Rat dmax = A[active[best]][active[best]];

        if (dmax < 0) {
            std::vector<Rat> y(active.size(), Rat(0));
            y[best] = 1;
            build_witness(y);
            return cert;
        }
        if (dmax == 0) {
            // all remaining diagonals are <= 0; any negative one or any
            // nonzero off-diagonal entry refutes PSD
            for (std::size_t i = 0; i < active.size(); ++i) {
                if (A[active[i]][active[i]] < 0) {
                    std::vector<Rat> y(active.size(), Rat(0));
                    y[i] = 1;
                    build_witness(y);
                    return cert;
                }
            }
            for (std::size_t i = 0; i < active.size(); ++i)
                for (std::size_t j = i + 1; j < active.size(); ++j) {
                    const Rat& off = A[active[i]][active[j]];
                    if (off != 0) {
                        // diagonals are zero here: value is -2|off|
                        std::vector<Rat> y(active.size(), Rat(0));
                        y[i] = off > 0 ? Rat(-1) : Rat(1);
                        y[j] = 1;
                        build_witness(y);
                        return cert;
                    }
                }
            // zero block: PSD with rank deficiency
            for (std::size_t i = 0; i < active.size(); ++i) cert.pivots.push_back(Rat(0));
            for (int idx : active) cert.pivot_order.push_back(idx);
            return cert;
        }

        const int piv = active[best];
        active.erase(active.begin() + best);
        cert.pivots.push_back(dmax);
        cert.pivot_order.push_back(piv);
        std::vector<std::pair<int, Rat>> row;
        for (int j : active)
            if (A[piv][j] != 0) row.push_back({j, A[piv][j]});
        pivot_rows.push_back(row);
        for (int i : active) {
            if (A[i][piv] == 0) continue;
            const Rat f = A[i][piv] / dmax;
            for (int j : active) A[i][j] -= f * A[piv][j];
        }
    }
    return cert;
}

struct PsdSolve {
    bool consistent = true;      // b lies in the range of G
    std::vector<Rat> solution;   // minimum-Euclidean-norm solution of G x = b
    int kernel_dim = 0;
};

namespace detail {

// Dense exact Gaussian elimination for an invertible system.
inline std::vector<Rat> solve_dense(std::vector<std::vector<Rat>> a, std::vector<Rat> b) {
    const int n = static_cast<int>(a.size());
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (a[r][col] != 0) {
                piv = r;
                break;
            }
        if (piv < 0) throw input_error("solve_dense: singular matrix");
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            Rat f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<Rat> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

}  // namespace detail

/// Solves G x = b for PSD G over the rationals, returning the minimum-norm
/// solution on the orthogonal complement of the kernel. Throws
/// verification_error if G has a negative pivot (not PSD).
inline PsdSolve solve_psd_system(const std::vector<std::vector<Rat>>& G,
                                 const std::vector<Rat>& b) {
    const int n = static_cast<int>(G.size());
    auto cert = check_psd_exact(G);
    if (!cert.psd)
        throw verification_error("solve_psd_system: matrix is not PSD (witness value " +
                                 rat_to_string(cert.witness_value) + ")");
    std::vector<int> pivots;  // original indices with a positive pivot
    for (std::size_t t = 0; t < cert.pivots.size(); ++t)
        if (cert.pivots[t] > 0) pivots.push_back(cert.pivot_order[t]);
    const int r = static_cast<int>(pivots.size());

    PsdSolve out;
    out.kernel_dim = n - r;
    out.solution.assign(n, Rat(0));
    if (r > 0) {
        std::vector<std::vector<Rat>> gp(r, std::vector<Rat>(r));
        std::vector<Rat> bp(r);
        for (int i = 0; i < r; ++i) {
            bp[i] = b[pivots[i]];
            for (int j = 0; j < r; ++j) gp[i][j] = G[pivots[i]][pivots[j]];
        }
        auto xp = detail::solve_dense(gp, bp);
        for (int i = 0; i < r; ++i) out.solution[pivots[i]] = xp[i];
    }
    // consistency: the candidate must satisfy every row
    for (int i = 0; i < n; ++i) {
        Rat acc = 0;
        for (int j = 0; j < n; ++j)
            if (out.solution[j] != 0) acc += G[i][j] * out.solution[j];
        if (acc != b[i]) {
            out.consistent = false;
            return out;
        }
    }
    if (out.kernel_dim == 0) return out;

    // kernel basis: for each non-pivot q, e_q + y with G_P y = -G[P, q]
    std::vector<std::vector<Rat>> kernel;
    for (int q = 0; q < n; ++q) {
        if (std::find(pivots.begin(), pivots.end(), q) != pivots.end()) continue;
        std::vector<Rat> vec(n, Rat(0));
        vec[q] = 1;
        if (r > 0) {
            std::vector<std::vector<Rat>> gp(r, std::vector<Rat>(r));
            std::vector<Rat> rhs(r);
            for (int i = 0; i < r; ++i) {
                rhs[i] = -G[pivots[i]][q];
                for (int j = 0; j < r; ++j) gp[i][j] = G[pivots[i]][pivots[j]];
            }
            auto y = detail::solve_dense(gp, rhs);
            for (int i = 0; i < r; ++i) vec[pivots[i]] = y[i];
        }
        kernel.push_back(std::move(vec));
    }
    // project the particular solution onto the kernel's orthogonal complement
    const int kd = static_cast<int>(kernel.size());
    std::vector<std::vector<Rat>> ktk(kd, std::vector<Rat>(kd, Rat(0)));
    std::vector<Rat> ktc(kd, Rat(0));
    for (int a = 0; a < kd; ++a) {
        for (int bcol = 0; bcol < kd; ++bcol)
            for (int i = 0; i < n; ++i) ktk[a][bcol] += kernel[a][i] * kernel[bcol][i];
        for (int i = 0; i < n; ++i) ktc[a] += kernel[a][i] * out.solution[i];
    }
    auto z = detail::solve_dense(ktk, ktc);
    for (int a = 0; a < kd; ++a)
        for (int i = 0; i < n; ++i) out.solution[i] -= z[a] * kernel[a][i];
    return out;
}

struct FloatPsdResult {
    bool psd = true;
    double min_eigenvalue = 0;
};

/// Floating-point cross-check: symmetric eigensolve, pass iff the smallest
/// eigenvalue is >= -tol.
inline FloatPsdResult check_psd_float(const std::vector<std::vector<Rat>>& M, double tol) {
    const int n = static_cast<int>(M.size());
    if (n == 0) return {true, 0.0};
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = rat_to_double(M[i][j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
    double lmin = solver.eigenvalues().minCoeff();
    return {lmin >= -tol, lmin};
}

}  // namespace pexp
