#include "nsesplit/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nsesplit {

namespace {

// two-sided 97.5% Student quantiles, df 1..30
constexpr double kT975[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                            2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                            2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                            2.060,  2.056, 2.052, 2.048, 2.045, 2.042};

double t975(int df) {
    if (df < 1) return 0.0;
    if (df <= 30) return kT975[df - 1];
    return 1.96;
}

} // namespace

RateFit fit_rate(const std::vector<std::pair<double, double>>& n_error_pairs) {
    if (n_error_pairs.size() < 4)
        throw std::invalid_argument("fit_rate: need at least 4 (n, error) pairs");
    std::vector<double> x, y;
    for (const auto& [n, e] : n_error_pairs) {
        if (!(n > 0.0)) throw std::invalid_argument("fit_rate: n must be positive");
        if (!(e > 0.0)) throw std::invalid_argument("fit_rate: errors must be positive");
        x.push_back(std::log(n));
        y.push_back(std::log(e));
    }
    const int k = static_cast<int>(x.size());
    const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / k;
    const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < k; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissae");

    RateFit fit;
    fit.points = k;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    double rss = 0.0;
    for (int i = 0; i < k; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        rss += r * r;
    }
    const int df = k - 2;
    const double sigma2 = df > 0 ? rss / df : 0.0;
    fit.half_width = t975(df) * std::sqrt(sigma2 / sxx);
    return fit;
}

KendallResult kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("kendall_tau: need paired samples");
    const int k = static_cast<int>(x.size());
    auto s_of = [&](const std::vector<double>& ys) {
        int s = 0;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                const double dx = x[j] - x[i];
                const double dy = ys[j] - ys[i];
                if (dx * dy > 0.0) ++s;
                else if (dx * dy < 0.0) --s;
            }
        return s;
    };
    KendallResult res;
    res.s_statistic = s_of(y);
    res.tau = 2.0 * res.s_statistic / (k * (k - 1));

    if (k <= 8) {
        // exact null distribution by enumerating rank permutations
        std::vector<double> perm(y.begin(), y.end());
        std::sort(perm.begin(), perm.end());
        long total = 0, at_least = 0;
        do {
            ++total;
            if (s_of(perm) >= res.s_statistic) ++at_least;
        } while (std::next_permutation(perm.begin(), perm.end()));
        res.p_positive = static_cast<double>(at_least) / total;
    } else {
        const double var = k * (k - 1.0) * (2.0 * k + 5.0) / 18.0;
        const double z = (res.s_statistic - 1.0) / std::sqrt(var); // continuity correction
        res.p_positive = 0.5 * std::erfc(z / std::sqrt(2.0));
    }
    return res;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile: empty sample");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("percentile: q outside [0, 1]");
    std::sort(values.begin(), values.end());
    const long idx = std::lround(std::ceil(q * values.size())) - 1;
    return values[std::clamp<long>(idx, 0, static_cast<long>(values.size()) - 1)];
}

MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe r;
    r.count = static_cast<int>(xs.size());
    if (r.count == 0) return r;
    r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / r.count;
    if (r.count > 1) {
        double var = 0.0;
        for (double v : xs) var += (v - r.mean) * (v - r.mean);
        var /= (r.count - 1);
        r.se = std::sqrt(var / r.count);
    }
    return r;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    if (t.size() != f.size()) throw std::invalid_argument("trapezoid: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        s += 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
    return s;
}

} // namespace nsesplit
