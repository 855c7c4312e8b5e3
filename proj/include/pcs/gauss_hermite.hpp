#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace pcs {

// Gauss-Hermite rule for the weight exp(-t^2): sum_j w_j f(t_j) ~ integral.
struct GhTable {
    std::vector<double> nodes;    // ascending, antisymmetric about 0
    std::vector<double> weights;  // positive, symmetric, sum to sqrt(pi)
};

// Golub-Welsch construction: nodes are the eigenvalues of the symmetric
// tridiagonal Jacobi matrix (zero diagonal, off-diagonal sqrt(k/2)), weights
// come from the first eigenvector components. The eigenproblem is solved by
// implicit-shift QL with the rotations applied to the first-component row;
// polynomial root polishing loses roots above order ~200.
inline GhTable gauss_hermite(int n) {
    if (n < 2 || n > 512) throw std::invalid_argument("quadrature order must be in [2, 512]");

    std::vector<double> d(n, 0.0), e(n, 0.0), z(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = std::sqrt((i + 1) / 2.0);
    z[0] = 1.0;

    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        for (;;) {
            int m = l;
            while (m + 1 < n) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
                ++m;
            }
            if (m == l) break;
            if (iter++ == 60) throw std::runtime_error("gauss_hermite: eigensolve did not converge");

            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow = false;
            for (int i = m - 1; i >= l; --i) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

    constexpr double kSqrtPi = 1.7724538509055160273;
    GhTable table;
    table.nodes.resize(n);
    table.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        table.nodes[i] = d[order[i]];
        table.weights[i] = kSqrtPi * z[order[i]] * z[order[i]];
    }
    // Enforce the exact antisymmetry of the rule; the eigensolve delivers the
    // +-pairs only to rounding.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (table.nodes[j] - table.nodes[i]);
        table.nodes[i] = -x;
        table.nodes[j] = x;
        const double w = 0.5 * (table.weights[i] + table.weights[j]);
        table.weights[i] = w;
        table.weights[j] = w;
    }
    if (n % 2 == 1) table.nodes[n / 2] = 0.0;
    return table;
}

// Shared per-order cache; tables are immutable once built.
inline const GhTable& gh_cached(int n) {
    static std::mutex mutex;
    static std::map<int, GhTable> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_hermite(n)).first;
    return it->second;
}

}  // namespace pcs
