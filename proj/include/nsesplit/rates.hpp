#pragma once

#include <utility>
#include <vector>

namespace nsesplit {

/// Least-squares fit of log(error) against log(n).
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double half_width = 0.0; // 95% confidence half-width on the slope
    int points = 0;
};

RateFit fit_rate(const std::vector<std::pair<double, double>>& n_error_pairs);

/// Kendall rank correlation with a one-sided exact p-value for
/// "positively associated" (exact null up to 8 points, normal
/// approximation beyond).
struct KendallResult {
    double tau = 0.0;
    int s_statistic = 0;
    double p_positive = 1.0;
};
KendallResult kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

/// Nearest-rank percentile of a copy of `values` (q in [0,1]).
double percentile(std::vector<double> values, double q);

/// Mean and standard error of a sample.
struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    int count = 0;
};
MeanSe mean_se(const std::vector<double>& xs);

/// Trapezoid rule over (t_i, f_i) nodes.
double trapezoid(const std::vector<double>& t, const std::vector<double>& f);

} // namespace nsesplit
