#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "ias/polynomial.hpp"

namespace ias {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Sweeps until the off-diagonal Frobenius mass drops below 1e-15 of the total.
template <int N>
std::array<double, N> symmetric_eigenvalues(const SymMatrix<N>& m) {
    std::array<std::array<double, N>, N> a{};
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) a[i][j] = m(i, j);

    auto off_mass = [&] {
        double off = 0.0;
        double all = 0.0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const double v = a[i][j] * a[i][j];
                all += v;
                if (i != j) off += v;
            }
        return std::pair{off, all};
    };

    for (int sweep = 0; sweep < 100; ++sweep) {
        const auto [off, all] = off_mass();
        if (off <= 1e-30 * all || off == 0.0) break;
        for (int p = 0; p < N - 1; ++p) {
            for (int q = p + 1; q < N; ++q) {
                const double apq = a[p][q];
                if (apq == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < N; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }

    std::array<double, N> ev{};
    for (int i = 0; i < N; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

template <int N>
double min_eigenvalue(const SymMatrix<N>& m) {
    return symmetric_eigenvalues(m)[0];
}

}  // namespace ias
