#include "nsesplit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

namespace nsesplit {

void check_harness_config(const HarnessConfig& cfg, bool needs_reference) {
    check_scheme_config(cfg.scheme);
    if (cfg.n_list.empty()) throw std::invalid_argument("harness: empty n_list");
    if (!std::is_sorted(cfg.n_list.begin(), cfg.n_list.end()))
        throw std::invalid_argument("harness: n_list must be sorted ascending");
    for (std::size_t i = 1; i < cfg.n_list.size(); ++i)
        if (cfg.n_list[i] == cfg.n_list[i - 1])
            throw std::invalid_argument("harness: duplicate entries in n_list");
    if (cfg.n_list.front() < 1) throw std::invalid_argument("harness: n must be positive");
    if (cfg.samples < 8) throw std::invalid_argument("harness: need at least 8 samples");
    if (cfg.p < 1) throw std::invalid_argument("harness: moment order p must be >= 1");
    if (cfg.workers < 1) throw std::invalid_argument("harness: workers must be >= 1");
    const int n_max = cfg.n_list.back();
    if (needs_reference) {
        if (cfg.n_ref < 8 * n_max)
            throw std::invalid_argument("harness: reference resolution below 8x the finest n");
        for (int n : cfg.n_list) {
            if (cfg.n_ref % n != 0)
                throw std::invalid_argument("harness: every n must divide n_ref");
            if (cfg.n_ref % (n * cfg.scheme.inner_steps) != 0)
                throw std::invalid_argument("harness: n*inner_steps must divide n_ref");
        }
    } else {
        for (int n : cfg.n_list)
            if (n_max % n != 0)
                throw std::invalid_argument("harness: every n must divide max(n_list)");
    }
}

Localization localization(const std::vector<double>& times_n, const std::vector<double>& x4_n,
                          const std::vector<double>& times_ref, const std::vector<double>& x4_ref,
                          double M, double T) {
    auto cumulative = [](const std::vector<double>& t, const std::vector<double>& f) {
        std::vector<double> c(t.size(), 0.0);
        for (std::size_t i = 1; i < t.size(); ++i)
            c[i] = c[i - 1] + 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
        return c;
    };
    const auto cn = cumulative(times_n, x4_n);
    const auto cr = cumulative(times_ref, x4_ref);
    auto value_at = [](const std::vector<double>& t, const std::vector<double>& c, double q) {
        if (t.empty()) return 0.0;
        auto it = std::upper_bound(t.begin(), t.end(), q);
        if (it == t.begin()) return 0.0;
        const std::size_t j = static_cast<std::size_t>(it - t.begin()) - 1;
        if (j + 1 >= t.size() || t[j + 1] == t[j]) return c[j];
        const double w = (q - t[j]) / (t[j + 1] - t[j]);
        return c[j] + w * (c[j + 1] - c[j]);
    };

    Localization loc;
    loc.integral = (cn.empty() ? 0.0 : cn.back()) + (cr.empty() ? 0.0 : cr.back());
    loc.inside = loc.integral <= M;
    loc.tau = T;
    if (!loc.inside) {
        std::vector<double> knots;
        knots.reserve(times_n.size() + times_ref.size());
        knots.insert(knots.end(), times_n.begin(), times_n.end());
        knots.insert(knots.end(), times_ref.begin(), times_ref.end());
        std::sort(knots.begin(), knots.end());
        for (double q : knots) {
            if (value_at(times_n, cn, q) + value_at(times_ref, cr, q) >= M) {
                loc.tau = q;
                break;
            }
        }
    }
    return loc;
}

namespace {
void extract_x4(const SchemeTrajectory& traj, std::vector<double>& t, std::vector<double>& x4) {
    if (traj.dense.empty())
        throw std::invalid_argument("localization: missing dense diagnostics");
    bool any = false;
    for (const auto& row : traj.dense) {
        t.push_back(row.t);
        x4.push_back(row.u_x * row.u_x * row.u_x * row.u_x);
        any = any || row.u_x != 0.0;
    }
    if (!any) throw std::invalid_argument("localization: missing L4 diagnostics");
}
} // namespace

Localization localization(const SchemeTrajectory& traj, const SchemeTrajectory& reference,
                          double M) {
    std::vector<double> tn, xn, tr, xr;
    extract_x4(traj, tn, xn);
    extract_x4(reference, tr, xr);
    return localization(tn, xn, tr, xr, M, traj.T);
}

SchemeTrajectory reference_solution(const SchemeConfig& cfg, const BrownianPath& path, int n_ref,
                                    const TrajectoryOptions& opts) {
    if (n_ref != path.finest_n)
        throw std::invalid_argument("reference_solution: n_ref must match the path resolution");
    SchemeConfig rc = cfg;
    rc.n = n_ref;
    return run_scheme(rc, path, opts);
}

double z_threshold(const std::string& schedule, double scale, int n) {
    if (schedule == "log") return scale * std::log(static_cast<double>(n));
    if (schedule == "constant") return scale;
    if (schedule == "sqrt_log") return scale * std::sqrt(std::log(static_cast<double>(n)));
    throw std::invalid_argument("unknown z schedule: " + schedule);
}

namespace {

// weighted squared distances without temporaries
double h_dist_sq(const VelocityField& a, const VelocityField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += std::norm(a.data()[i] - b.data()[i]);
    const double L = a.grid().domain_length;
    return L * L * s;
}

double v_dist_sq(const VelocityField& a, const VelocityField& b) {
    const GridSpec& g = a.grid();
    const double k2u = g.wavenumber_unit() * g.wavenumber_unit();
    double s = 0.0;
    for_each_mode(g, [&](int j1, int j2) {
        const double w = k2u * (double(j1) * j1 + double(j2) * j2);
        s += w * (std::norm(a.at(0, j1, j2) - b.at(0, j1, j2)) +
                  std::norm(a.at(1, j1, j2) - b.at(1, j1, j2)));
    });
    const double L = g.domain_length;
    return L * L * s;
}

void run_over_samples(int samples, int workers, const std::function<void(int)>& job) {
    if (workers <= 1) {
        for (int s = 0; s < samples; ++s) job(s);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int count = std::min(workers, samples);
    pool.reserve(count);
    for (int w = 0; w < count; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                const int s = next.fetch_add(1);
                if (s >= samples) break;
                job(s);
            }
        });
    for (auto& th : pool) th.join();
}

SchemeConfig config_for(const HarnessConfig& cfg, int n, std::uint64_t sample_seed) {
    SchemeConfig sc = cfg.scheme;
    sc.n = n;
    sc.seed = sample_seed;
    return sc;
}

Estimate estimate_of(const std::vector<double>& xs) {
    const MeanSe ms = mean_se(xs);
    return {ms.mean, ms.se};
}

// mean curve over per-row accumulations; returns (sup, se at the argmax)
Estimate sup_of_row_means(const std::vector<double>& sum, const std::vector<double>& sumsq,
                          int count) {
    Estimate e;
    if (count == 0 || sum.empty()) return e;
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < sum.size(); ++r) {
        const double mean = sum[r] / count;
        if (mean > best) {
            best = mean;
            arg = r;
        }
    }
    e.value = best;
    if (count > 1) {
        const double var =
            std::max(0.0, (sumsq[arg] - sum[arg] * sum[arg] / count) / (count - 1));
        e.se = std::sqrt(var / count);
    }
    return e;
}

std::vector<FittedSlope> fit_all(const std::vector<ReportRow>& rows,
                                 const std::vector<std::string>& stats) {
    std::vector<FittedSlope> out;
    if (rows.size() < 4) return out;
    for (const auto& name : stats) {
        std::vector<std::pair<double, double>> pairs;
        bool ok = true;
        for (const auto& row : rows) {
            const auto it = row.stats.find(name);
            if (it == row.stats.end() || !(it->second.value > 0.0)) {
                ok = false;
                break;
            }
            pairs.emplace_back(row.n, it->second.value);
        }
        if (ok) out.push_back({name, fit_rate(pairs)});
    }
    return out;
}

double pow_int(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

} // namespace

DiffReport diff_estimates(const HarnessConfig& cfg) {
    check_harness_config(cfg, false);
    const int m = cfg.scheme.inner_steps;
    const int n_max = cfg.n_list.back();
    const int finest = n_max * m;
    const int p = cfg.p;

    struct PerN {
        bool ok = false;
        double int_uy_h2 = 0, int_uy_v2 = 0, int_zu_v2 = 0, int_zy_v2 = 0, int_z_v2 = 0;
        std::vector<double> zu_h2p_rows;
    };
    std::vector<std::vector<PerN>> results(cfg.samples);

    TrajectoryOptions opts;
    opts.dense_norms = true;
    opts.y_norms = true;
    opts.pair_diffs = true;
    opts.grid_fields = false;

    run_over_samples(cfg.samples, cfg.workers, [&](int s) {
        const std::uint64_t seed = derive_seed(cfg.master_seed, s);
        const BrownianPath path =
            sample_path(cfg.scheme.diffusion.basis, finest, cfg.scheme.T, seed);
        const std::uint64_t expected_hash = path.content_hash();
        auto& per_sample = results[s];
        per_sample.resize(cfg.n_list.size());
        for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
            const SchemeConfig sc = config_for(cfg, cfg.n_list[ni], seed);
            const SchemeTrajectory traj = run_scheme(sc, path, opts);
            if (traj.path_hash != expected_hash)
                throw std::logic_error("diff_estimates: coupled-path hash mismatch");
            PerN& out = per_sample[ni];
            if (traj.failed()) continue;
            out.ok = true;
            out.int_uy_h2 = dense_integral(traj, [](const DenseRow& r) { return r.uy_h * r.uy_h; });
            out.int_uy_v2 = dense_integral(traj, [](const DenseRow& r) { return r.uy_v * r.uy_v; });
            out.int_zu_v2 = dense_integral(traj, [](const DenseRow& r) { return r.zu_v * r.zu_v; });
            out.int_zy_v2 = dense_integral(traj, [](const DenseRow& r) { return r.zy_v * r.zy_v; });
            out.int_z_v2 = out.int_zu_v2 + out.int_zy_v2;
            out.zu_h2p_rows.reserve(traj.dense.size());
            for (const auto& row : traj.dense)
                out.zu_h2p_rows.push_back(pow_int(row.zu_h * row.zu_h, p));
        }
    });

    DiffReport report;
    report.p = p;
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
        ReportRow row;
        row.n = cfg.n_list[ni];
        row.samples = cfg.samples;
        std::vector<double> a, b, c, d, e;
        std::vector<double> zsum, zsq;
        int ok = 0;
        for (int s = 0; s < cfg.samples; ++s) {
            const PerN& r = results[s][ni];
            if (!r.ok) {
                ++row.failed;
                continue;
            }
            ++ok;
            a.push_back(r.int_uy_h2);
            b.push_back(r.int_uy_v2);
            c.push_back(r.int_zu_v2);
            d.push_back(r.int_zy_v2);
            e.push_back(r.int_z_v2);
            if (zsum.empty()) {
                zsum.assign(r.zu_h2p_rows.size(), 0.0);
                zsq.assign(r.zu_h2p_rows.size(), 0.0);
            }
            for (std::size_t j = 0; j < r.zu_h2p_rows.size(); ++j) {
                zsum[j] += r.zu_h2p_rows[j];
                zsq[j] += r.zu_h2p_rows[j] * r.zu_h2p_rows[j];
            }
        }
        row.stats["int_uy_h2"] = estimate_of(a);
        row.stats["int_uy_v2"] = estimate_of(b);
        row.stats["int_zu_v2"] = estimate_of(c);
        row.stats["int_zy_v2"] = estimate_of(d);
        row.stats["int_z_v2"] = estimate_of(e);
        row.stats["sup_zu_h2p"] = sup_of_row_means(zsum, zsq, ok);
        report.rows.push_back(std::move(row));
    }
    report.slopes = fit_all(report.rows, {"int_uy_h2", "int_uy_v2", "sup_zu_h2p", "int_zu_v2",
                                          "int_zy_v2", "int_z_v2"});
    return report;
}

MomentReport moment_estimates(const HarnessConfig& cfg) {
    check_harness_config(cfg, false);
    const int m = cfg.scheme.inner_steps;
    const int n_max = cfg.n_list.back();
    const int finest = n_max * m;
    const int p = cfg.p;

    struct PerN {
        bool ok = false;
        double int_u_v2_h2pm2 = 0, int_u_da2_v2pm2 = 0, int_y_v2 = 0, int_y_da2_v2pm2 = 0;
        std::vector<double> y_h2p, u_v2p, y_v2p; // per dense row
        std::vector<double> u_int_h2p;           // per-interval sup
    };
    std::vector<std::vector<PerN>> results(cfg.samples);

    TrajectoryOptions opts;
    opts.dense_norms = true;
    opts.y_norms = true;
    opts.grid_fields = false;

    run_over_samples(cfg.samples, cfg.workers, [&](int s) {
        auto& per_sample = results[s];
        per_sample.resize(cfg.n_list.size());
        const std::uint64_t sample_seed = derive_seed(cfg.master_seed, s);
        for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
            // per-n expectations: the initial state is common to the row
            // while each (sample, n) cell draws an independent path, so
            // across-n comparisons carry the Monte-Carlo uncertainty of
            // the noise, not fake initial-condition variation
            const std::uint64_t path_seed = derive_seed(sample_seed, 0xB0 + ni);
            const BrownianPath path =
                sample_path(cfg.scheme.diffusion.basis, finest, cfg.scheme.T, path_seed);
            SchemeConfig sc = config_for(cfg, cfg.n_list[ni], sample_seed);
            const SchemeTrajectory traj = run_scheme(sc, path, opts);
            PerN& out = per_sample[ni];
            if (traj.failed()) continue;
            out.ok = true;
            out.int_u_v2_h2pm2 = dense_integral(traj, [](const DenseRow& r) { return r.u_v * r.u_v; });
            if (p > 1) {
                // recompute with the |u|^{2(p-1)} weight
                const int rows = traj.rows_per_interval();
                const double w = traj.mesh() / traj.inner_steps;
                double total = 0.0, total_da = 0.0, total_y_da = 0.0;
                auto f_u = [&](const DenseRow& r) {
                    return r.u_v * r.u_v * pow_int(r.u_h * r.u_h, p - 1);
                };
                auto f_da = [&](const DenseRow& r) {
                    return (1.0 + pow_int(r.u_v * r.u_v, p - 1)) * r.u_da * r.u_da;
                };
                auto f_yda = [&](const DenseRow& r) {
                    return (1.0 + pow_int(r.y_v * r.y_v, p - 1)) * r.y_da * r.y_da;
                };
                for (std::size_t start = 0; start + rows <= traj.dense.size(); start += rows)
                    for (int l = 0; l < rows - 1; ++l) {
                        const auto& ra = traj.dense[start + l];
                        const auto& rb = traj.dense[start + l + 1];
                        total += 0.5 * w * (f_u(ra) + f_u(rb));
                        total_da += 0.5 * w * (f_da(ra) + f_da(rb));
                        total_y_da += 0.5 * w * (f_yda(ra) + f_yda(rb));
                    }
                out.int_u_v2_h2pm2 = total;
                out.int_u_da2_v2pm2 = total_da;
                out.int_y_da2_v2pm2 = total_y_da;
            } else {
                out.int_u_da2_v2pm2 =
                    dense_integral(traj, [](const DenseRow& r) { return 2.0 * r.u_da * r.u_da; });
                out.int_y_da2_v2pm2 =
                    dense_integral(traj, [](const DenseRow& r) { return 2.0 * r.y_da * r.y_da; });
            }
            out.int_y_v2 = dense_integral(traj, [](const DenseRow& r) { return r.y_v * r.y_v; });
            out.y_h2p.reserve(traj.dense.size() + 1);
            // the noise-branch process equals the initial state on the
            // pre-initial interval; its sup includes that value
            out.y_h2p.push_back(pow_int(traj.dense.front().u_h * traj.dense.front().u_h, p));
            out.y_v2p.push_back(pow_int(traj.dense.front().u_v * traj.dense.front().u_v, p));
            for (const auto& row : traj.dense) {
                out.y_h2p.push_back(pow_int(row.y_h * row.y_h, p));
                out.u_v2p.push_back(pow_int(row.u_v * row.u_v, p));
                out.y_v2p.push_back(pow_int(row.y_v * row.y_v, p));
            }
            const int rows = traj.rows_per_interval();
            for (std::size_t start = 0; start + rows <= traj.dense.size(); start += rows) {
                double sup = 0.0;
                for (int l = 0; l < rows; ++l) {
                    const auto& r = traj.dense[start + l];
                    sup = std::max(sup, pow_int(r.u_h * r.u_h, p));
                }
                out.u_int_h2p.push_back(sup);
            }
        }
    });

    MomentReport report;
    report.p = p;
    const ValidationReport hypotheses = validate_assumptions(
        cfg.scheme.diffusion, cfg.scheme.coriolis, cfg.scheme.eps, std::max(2, p));
    for (const auto& item : hypotheses.items)
        if (!item.satisfied) report.warnings.push_back(item.name + ": " + item.inequality);
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
        ReportRow row;
        row.n = cfg.n_list[ni];
        row.samples = cfg.samples;
        std::vector<double> iu, ida, iy, iyda;
        std::vector<double> ysum, ysq, uvsum, uvsq, yvsum, yvsq, usupsum, usupsq;
        int ok = 0;
        for (int s = 0; s < cfg.samples; ++s) {
            const PerN& r = results[s][ni];
            if (!r.ok) {
                ++row.failed;
                continue;
            }
            ++ok;
            iu.push_back(r.int_u_v2_h2pm2);
            ida.push_back(r.int_u_da2_v2pm2);
            iy.push_back(r.int_y_v2);
            iyda.push_back(r.int_y_da2_v2pm2);
            auto accumulate = [](std::vector<double>& sum, std::vector<double>& sq,
                                 const std::vector<double>& vals) {
                if (sum.empty()) {
                    sum.assign(vals.size(), 0.0);
                    sq.assign(vals.size(), 0.0);
                }
                for (std::size_t j = 0; j < vals.size(); ++j) {
                    sum[j] += vals[j];
                    sq[j] += vals[j] * vals[j];
                }
            };
            accumulate(ysum, ysq, r.y_h2p);
            accumulate(uvsum, uvsq, r.u_v2p);
            accumulate(yvsum, yvsq, r.y_v2p);
            accumulate(usupsum, usupsq, r.u_int_h2p);
        }
        row.stats["sup_e_y_h2p"] = sup_of_row_means(ysum, ysq, ok);
        row.stats["sup_e_u_int_h2p"] = sup_of_row_means(usupsum, usupsq, ok);
        row.stats["int_u_v2_h2pm2"] = estimate_of(iu);
        row.stats["sup_e_u_v2p"] = sup_of_row_means(uvsum, uvsq, ok);
        row.stats["sup_e_y_v2p"] = sup_of_row_means(yvsum, yvsq, ok);
        row.stats["int_u_da2_v2pm2"] = estimate_of(ida);
        row.stats["int_y_v2"] = estimate_of(iy);
        row.stats["int_y_da2_v2pm2"] = estimate_of(iyda);
        report.rows.push_back(std::move(row));
    }

    const std::vector<std::string> tracked = {"sup_e_y_h2p",    "sup_e_u_int_h2p",
                                              "int_u_v2_h2pm2", "sup_e_u_v2p",
                                              "sup_e_y_v2p",    "int_u_da2_v2pm2"};
    std::vector<double> ns(report.rows.size());
    for (std::size_t i = 0; i < report.rows.size(); ++i) ns[i] = report.rows[i].n;
    for (const auto& stat : tracked) {
        MomentReport::Trend tr;
        tr.stat = stat;
        std::vector<double> vals;
        double lo = 0.0, hi = 0.0;
        for (const auto& row : report.rows) {
            const double v = row.stats.at(stat).value;
            vals.push_back(v);
            lo = vals.size() == 1 ? v : std::min(lo, v);
            hi = vals.size() == 1 ? v : std::max(hi, v);
        }
        tr.max_over_min = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        tr.bounded = hi <= 1.2 * lo;
        if (vals.size() >= 3) tr.kendall = kendall_tau(ns, vals);
        report.trends.push_back(std::move(tr));
    }
    return report;
}

RateReport rate_experiment(const HarnessConfig& cfg) {
    check_harness_config(cfg, true);
    const int m = cfg.scheme.inner_steps;
    const int n_max = cfg.n_list.back();
    const int n_ref = cfg.n_ref;
    const double T = cfg.scheme.T;
    const bool halving =
        cfg.reference_check && n_ref % 2 == 0 && (n_ref / 2) % n_max == 0 && n_ref / 2 > n_max;

    // union probe grid: dense nodes of the finest tested resolution
    std::vector<double> union_times(static_cast<std::size_t>(n_max) * m + 1);
    for (std::size_t j = 0; j < union_times.size(); ++j)
        union_times[j] = T * static_cast<double>(j) / (static_cast<double>(n_max) * m);

    struct PerN {
        bool ok = false;
        double sup_h2 = 0, int_u_v2 = 0, int_y_v2 = 0, x4_total = 0, e_tilde = 0;
        double sup_h2_half = 0, int_u_v2_half = 0, int_y_v2_half = 0;
    };
    struct PerSample {
        bool ref_ok = false;
        double x4_ref_total = 0;
        std::vector<double> ref_times, ref_x4;
        std::vector<PerN> per_n;
    };
    std::vector<PerSample> results(cfg.samples);

    run_over_samples(cfg.samples, cfg.workers, [&](int s) {
        const std::uint64_t seed = derive_seed(cfg.master_seed, s);
        const BrownianPath path =
            sample_path(cfg.scheme.diffusion.basis, n_ref, cfg.scheme.T, seed);
        PerSample& out = results[s];
        out.per_n.resize(cfg.n_list.size());

        TrajectoryOptions ref_opts;
        ref_opts.dense_norms = true;
        ref_opts.x_norms = true;
        ref_opts.grid_fields = false;
        ref_opts.snapshot_times = union_times;
        const std::uint64_t expected_hash = path.content_hash();
        const SchemeTrajectory ref = run_scheme(config_for(cfg, n_ref, seed), path, ref_opts);
        if (ref.path_hash != expected_hash)
            throw std::logic_error("rate_experiment: coupled-path hash mismatch");
        if (ref.failed()) return;
        out.ref_ok = true;
        out.ref_times.reserve(ref.dense.size());
        out.ref_x4.reserve(ref.dense.size());
        for (const auto& row : ref.dense) {
            out.ref_times.push_back(row.t);
            out.ref_x4.push_back(row.u_x * row.u_x * row.u_x * row.u_x);
        }
        out.x4_ref_total = dense_integral(ref, [](const DenseRow& r) {
            return r.u_x * r.u_x * r.u_x * r.u_x;
        });

        std::vector<VelocityField> ref2_snaps;
        if (halving) {
            TrajectoryOptions half_opts;
            half_opts.dense_norms = false;
            half_opts.grid_fields = false;
            half_opts.snapshot_times = union_times;
            const SchemeTrajectory ref2 =
                run_scheme(config_for(cfg, n_ref / 2, seed), path, half_opts);
            if (!ref2.failed()) ref2_snaps = ref2.snapshots;
        }

        TrajectoryOptions opts;
        opts.dense_norms = true;
        opts.y_norms = true;
        opts.x_norms = true;
        opts.dense_fields = true;
        opts.grid_fields = true;

        for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
            const int n = cfg.n_list[ni];
            const SchemeTrajectory traj = run_scheme(config_for(cfg, n, seed), path, opts);
            if (traj.path_hash != expected_hash)
                throw std::logic_error("rate_experiment: coupled-path hash mismatch");
            PerN& pn = out.per_n[ni];
            if (traj.failed()) continue;
            pn.ok = true;

            const int stride = n_max / n; // union nodes per tested node
            auto errors_against = [&](const std::vector<VelocityField>& snaps, double& sup_h2,
                                      double& int_u, double& int_y) {
                sup_h2 = 0.0;
                for (int k = 1; k <= n; ++k) {
                    const std::size_t uidx = static_cast<std::size_t>(k) * m * stride;
                    sup_h2 = std::max(sup_h2, h_dist_sq(traj.u_plus[k], snaps[uidx]));
                }
                int_u = 0.0;
                int_y = 0.0;
                const double w = traj.mesh() / m;
                for (int i = 0; i < n; ++i)
                    for (int l = 0; l < m; ++l) {
                        const std::size_t ra = static_cast<std::size_t>(i) * (m + 1) + l;
                        const std::size_t ua = (static_cast<std::size_t>(i) * m + l) * stride;
                        const std::size_t rb = ra + 1;
                        const std::size_t ub = ua + static_cast<std::size_t>(stride);
                        int_u += 0.5 * w *
                                 (v_dist_sq(traj.dense_u[ra], snaps[ua]) +
                                  v_dist_sq(traj.dense_u[rb], snaps[ub]));
                        int_y += 0.5 * w *
                                 (v_dist_sq(traj.dense_y[ra], snaps[ua]) +
                                  v_dist_sq(traj.dense_y[rb], snaps[ub]));
                    }
            };
            errors_against(ref.snapshots, pn.sup_h2, pn.int_u_v2, pn.int_y_v2);
            if (!ref2_snaps.empty())
                errors_against(ref2_snaps, pn.sup_h2_half, pn.int_u_v2_half, pn.int_y_v2_half);

            pn.x4_total = dense_integral(traj, [](const DenseRow& r) {
                return r.u_x * r.u_x * r.u_x * r.u_x;
            });
            pn.e_tilde =
                std::sqrt(pn.sup_h2) + std::sqrt(pn.int_u_v2) + std::sqrt(pn.int_y_v2);
        }
    });

    RateReport report;
    report.n_ref = n_ref;

    // localization budget: fixed M, or the percentile of the per-sample
    // worst localization functional over the tested resolutions (so every
    // per-n retained fraction is at least the percentile level)
    if (cfg.fixed_M.has_value()) {
        report.M = *cfg.fixed_M;
        report.m_rule = "fixed";
    } else {
        std::vector<double> worst_totals;
        for (const auto& ps : results) {
            if (!ps.ref_ok) continue;
            double worst = 0.0;
            bool all_ok = true;
            for (const auto& pn : ps.per_n) {
                if (!pn.ok) {
                    all_ok = false;
                    break;
                }
                worst = std::max(worst, ps.x4_ref_total + pn.x4_total);
            }
            if (all_ok) worst_totals.push_back(worst);
        }
        if (worst_totals.empty())
            throw std::runtime_error("rate_experiment: no surviving samples for the M rule");
        report.M = percentile(worst_totals, cfg.m_percentile);
        report.m_rule = "percentile:" + std::to_string(cfg.m_percentile);
    }

    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
        ReportRow row;
        row.n = cfg.n_list[ni];
        row.samples = cfg.samples;
        std::vector<double> loc_sup, loc_iu, loc_iy, loc_sum, retained;
        std::vector<double> half_sup, half_sum, full_sup, full_sum;
        RateReport::ExceedanceRow ex;
        ex.n = row.n;
        ex.threshold = z_threshold(cfg.z_schedule, cfg.z_scale, row.n) / std::sqrt(double(row.n));
        ex.samples = cfg.samples;
        int exceed = 0;
        const PerN failed_pn{};
        for (const auto& ps : results) {
            const PerN& pn = ps.per_n.empty() ? failed_pn : ps.per_n[ni];
            if (!ps.ref_ok || !pn.ok) {
                ++row.failed;
                retained.push_back(0.0);
                loc_sup.push_back(0.0);
                loc_iu.push_back(0.0);
                loc_iy.push_back(0.0);
                loc_sum.push_back(0.0);
                ++exceed; // a failed trajectory always counts as exceeding
                continue;
            }
            const bool inside = (ps.x4_ref_total + pn.x4_total) <= report.M;
            retained.push_back(inside ? 1.0 : 0.0);
            const double ind = inside ? 1.0 : 0.0;
            loc_sup.push_back(ind * pn.sup_h2);
            loc_iu.push_back(ind * pn.int_u_v2);
            loc_iy.push_back(ind * pn.int_y_v2);
            loc_sum.push_back(ind * (pn.int_u_v2 + pn.int_y_v2));
            if (pn.e_tilde >= ex.threshold) ++exceed;
            if (halving) {
                full_sup.push_back(ind * pn.sup_h2);
                half_sup.push_back(ind * pn.sup_h2_half);
                full_sum.push_back(ind * (pn.int_u_v2 + pn.int_y_v2));
                half_sum.push_back(ind * (pn.int_u_v2_half + pn.int_y_v2_half));
            }
        }
        row.stats["loc_sup_h2"] = estimate_of(loc_sup);
        row.stats["loc_int_u_v2"] = estimate_of(loc_iu);
        row.stats["loc_int_y_v2"] = estimate_of(loc_iy);
        row.stats["loc_int_v2"] = estimate_of(loc_sum);
        row.stats["retained"] = estimate_of(retained);
        ex.fraction = static_cast<double>(exceed) / cfg.samples;
        report.exceedance.push_back(ex);

        if (halving) {
            RateReport::ReferenceCheck rc;
            rc.n = row.n;
            rc.err_full = mean_se(full_sup).mean;
            rc.err_half = mean_se(half_sup).mean;
            rc.rel_gap = rc.err_full > 0.0 ? std::abs(rc.err_full - rc.err_half) / rc.err_full
                                           : 0.0;
            if (row.n <= n_ref / 8 && rc.rel_gap > 0.15) report.reference_check_passed = false;
            report.reference_checks.push_back(rc);
        }
        report.rows.push_back(std::move(row));
    }
    report.slopes =
        fit_all(report.rows, {"loc_sup_h2", "loc_int_u_v2", "loc_int_y_v2", "loc_int_v2"});
    return report;
}

} // namespace nsesplit
