#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "qbl/linalg.hpp"

namespace qbl::testing {

// Greedy one-to-one matching; largest distance between partners.
inline double match_distance(const Vec& a, const Vec& b)
{
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index pick = -1;
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(a(i) - b(j));
            if (d < best) best = d, pick = j;
        }
        used[static_cast<std::size_t>(pick)] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

// Distance from each entry of a to the nearest entry of b.
inline double inclusion_distance(const Vec& a, const std::vector<cd>& b)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (cd z : b) best = std::min(best, std::abs(a(i) - z));
        worst = std::max(worst, best);
    }
    return worst;
}

inline Mat random_matrix(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    Mat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cd(nd(rng), nd(rng));
    return m;
}

// Plain-Eigen eigenvalues, no balancing; used as an independent check.
inline Vec raw_eigenvalues(const Mat& m)
{
    Eigen::ComplexEigenSolver<Mat> es(m, false);
    return es.eigenvalues();
}

}  // namespace qbl::testing
