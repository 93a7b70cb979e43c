// Copyright 2026 The qtraj Authors
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

#pragma once

#include <functional>
#include <vector>

namespace qtraj {

/// Asymptotic Kolmogorov distribution survival function Q_KS(lambda).
double kolmogorov_q(double lambda);

struct KsResult {
    double statistic;
    double p_value;
};

/// One-sample test of `samples` against a continuous CDF. Uses the
/// Stephens small-sample correction of the statistic.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Two-sample test.
KsResult ks_test_2(std::vector<double> a, std::vector<double> b);

/// Least-squares slope and intercept of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
/// Standard error of the mean.
double std_error(const std::vector<double>& v);
double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b);
double rms_diff(const std::vector<double>& a, const std::vector<double>& b);
/// Trapezoidal integral of samples on a uniform grid with spacing h.
double trapz(const std::vector<double>& y, double h);
/// Divides by the maximum value.
std::vector<double> peak_normalize(const std::vector<double>& y);

}  // namespace qtraj
