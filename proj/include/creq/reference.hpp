// Copyright 2026 The creq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CREQ_REFERENCE_HPP
#define CREQ_REFERENCE_HPP

// Straightforward single-threaded versions of the optimized kernels. They
// favour obviousness over speed and serve as oracles in tests and baselines
// in the benchmark.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "creq/features.hpp"
#include "creq/text.hpp"

namespace creq::reference {

/// Rank of x = (# values below x) + (# values equal to x + 1) / 2. O(n^2).
inline std::vector<double> midranks_quadratic(std::span<const double> values) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        double below = 0, equal = 0;
        for (const double v : values) {
            below += v < values[i];
            equal += v == values[i];
        }
        out[i] = below + (equal + 1) / 2;
    }
    return out;
}

/// U of sample a by counting pairs.
inline double mann_whitney_u_pairs(std::span<const double> a, std::span<const double> b) {
    double u = 0;
    for (const double x : a) {
        for (const double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    }
    return u;
}

/// Tie-corrected Kruskal-Wallis H from quadratic midranks.
inline double kruskal_h_quadratic(const std::vector<std::vector<double>>& groups) {
    std::vector<double> all;
    for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
    const auto ranks = midranks_quadratic(all);
    const double n = static_cast<double>(all.size());
    double h = 0;
    std::size_t at = 0;
    for (const auto& g : groups) {
        double r = 0;
        for (std::size_t i = 0; i < g.size(); ++i) r += ranks[at + i];
        at += g.size();
        h += r * r / static_cast<double>(g.size());
    }
    h = 12.0 / (n * (n + 1)) * h - 3 * (n + 1);
    double ties = 0;
    std::vector<double> sorted(all);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const double c = 1 - ties / (n * n * n - n);
    return c <= 0 ? 0.0 : h / c;
}

/// Pearson statistic sum (O - E)^2 / E without correction.
inline double pearson_chi2(const std::vector<std::vector<std::int64_t>>& counts) {
    const std::size_t r = counts.size(), c = counts.front().size();
    std::vector<double> rows(r, 0), cols(c, 0);
    double total = 0;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            rows[i] += static_cast<double>(counts[i][j]);
            cols[j] += static_cast<double>(counts[i][j]);
            total += static_cast<double>(counts[i][j]);
        }
    }
    double x2 = 0;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            const double e = rows[i] * cols[j] / total;
            if (e > 0) x2 += (static_cast<double>(counts[i][j]) - e) * (static_cast<double>(counts[i][j]) - e) / e;
        }
    }
    return x2;
}

/// Dense feature vector of one text under a fitted featurizer.
inline std::vector<double> dense_transform(const Featurizer& f, std::string_view text) {
    std::vector<double> v(f.vocabulary().size(), 0.0);
    for (const auto& w : text::words(text)) {
        if (const auto id = f.vocabulary().id(w)) v[*id] += 1.0;
    }
    if (f.scheme() == Embedding::tfidf) {
        double norm = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] *= f.idf()[i];
            norm += v[i] * v[i];
        }
        if (norm > 0) {
            for (auto& x : v) x /= std::sqrt(norm);
        }
    }
    return v;
}

inline std::vector<double> densify(const SparseRow& row, std::size_t dim) {
    std::vector<double> v(dim, 0.0);
    for (std::size_t i = 0; i < row.index.size(); ++i) v[row.index[i]] = row.value[i];
    return v;
}

/// Uniform-weight k-NN causal share: full sort of all squared distances by (distance, index).
inline double knn_score_dense(const std::vector<std::vector<double>>& train, std::span<const std::uint8_t> labels,
                              const std::vector<double>& query, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < train.size(); ++i) {
        double s = 0;
        for (std::size_t j = 0; j < query.size(); ++j) s += (train[i][j] - query[j]) * (train[i][j] - query[j]);
        d.emplace_back(s, i);
    }
    std::sort(d.begin(), d.end());
    const std::size_t take = std::min(k, d.size());
    double causal = 0;
    for (std::size_t i = 0; i < take; ++i) causal += labels[d[i].second];
    return causal / static_cast<double>(take);
}

}  // namespace creq::reference

#endif  // CREQ_REFERENCE_HPP
