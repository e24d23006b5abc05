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

#ifndef CREQ_STATS_HPP
#define CREQ_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace creq::stats {

/// Regularized lower incomplete gamma P(a, x). Series for x < a + 1, Lentz
/// continued fraction for the complement otherwise.
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed without cancellation.
double gamma_q(double a, double x);

double chi2_cdf(double x, double dof);
/// Upper tail Pr(X >= x) for X ~ chi-squared(dof).
double chi2_sf(double x, double dof);

double normal_cdf(double z);
double normal_sf(double z);

/// 1-based ranks with ties given the mean of the ranks they span.
std::vector<double> midranks(std::span<const double> values);
/// Sum over tie groups of (t^3 - t); the usual rank-test tie correction term.
double tie_term(std::span<const double> values);

double mean(std::span<const double> x);
/// Sample variance (n - 1 denominator); 0 for fewer than two values.
double variance(std::span<const double> x);

}  // namespace creq::stats

#endif  // CREQ_STATS_HPP
