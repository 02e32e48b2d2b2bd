#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nsesplit/cli.hpp"
#include "nsesplit/config.hpp"
#include "nsesplit/io.hpp"
#include "nsesplit/transform.hpp"
#include "nsesplit/validate.hpp"

namespace py = pybind11;
using namespace nsesplit;

namespace {

py::array_t<std::complex<double>> coeffs_array(const VelocityField& u) {
    const int N = u.modes();
    py::array_t<std::complex<double>> arr({2, N, N});
    auto a = arr.mutable_unchecked<3>();
    const int h = N / 2;
    for (int c = 0; c < 2; ++c)
        for (int j1 = -h; j1 < h; ++j1)
            for (int j2 = -h; j2 < h; ++j2) a(c, j1 + h, j2 + h) = u.at(c, j1, j2);
    return arr;
}

VelocityField field_from_array(const GridSpec& grid,
                               py::array_t<std::complex<double>, py::array::c_style> arr) {
    const int N = grid.modes_per_dim;
    if (arr.ndim() != 3 || arr.shape(0) != 2 || arr.shape(1) != N || arr.shape(2) != N)
        throw std::invalid_argument("expected coefficients of shape (2, N, N)");
    VelocityField u(grid);
    auto a = arr.unchecked<3>();
    const int h = N / 2;
    for (int c = 0; c < 2; ++c)
        for (int j1 = -h; j1 < h; ++j1)
            for (int j2 = -h; j2 < h; ++j2) u.at(c, j1, j2) = a(c, j1 + h, j2 + h);
    return u;
}

py::dict norms_dict(const VelocityField& u) {
    const NormBundle nb = norms(u);
    py::dict d;
    d["h"] = nb.h;
    d["v"] = nb.v;
    d["da"] = nb.da;
    d["x"] = nb.x;
    return d;
}

py::dict row_dict(const DenseRow& r) {
    py::dict d;
    d["t"] = r.t;
    d["u_h"] = r.u_h;
    d["u_v"] = r.u_v;
    d["u_da"] = r.u_da;
    d["u_x"] = r.u_x;
    d["y_h"] = r.y_h;
    d["y_v"] = r.y_v;
    d["y_da"] = r.y_da;
    d["uy_h"] = r.uy_h;
    d["uy_v"] = r.uy_v;
    d["zu_h"] = r.zu_h;
    d["zu_v"] = r.zu_v;
    d["zy_v"] = r.zy_v;
    return d;
}

py::dict rows_dict(const std::vector<ReportRow>& rows) {
    py::dict out;
    py::list ns, samples, failed;
    std::map<std::string, py::list> stats;
    for (const auto& row : rows) {
        ns.append(row.n);
        samples.append(row.samples);
        failed.append(row.failed);
        for (const auto& [k, v] : row.stats) {
            stats[k].append(v.value);
            stats[k + "_se"].append(v.se);
        }
    }
    out["n"] = ns;
    out["samples"] = samples;
    out["failed"] = failed;
    for (auto& [k, v] : stats) out[py::str(k)] = v;
    return out;
}

py::dict slopes_dict(const std::vector<FittedSlope>& slopes) {
    py::dict out;
    for (const auto& s : slopes) {
        py::dict d;
        d["slope"] = s.fit.slope;
        d["intercept"] = s.fit.intercept;
        d["half_width"] = s.fit.half_width;
        d["points"] = s.fit.points;
        out[py::str(s.stat)] = d;
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_nsesplit, m) {
    m.doc() = "pseudo-spectral splitting scheme for the stochastic Navier-Stokes "
              "equations on the 2D torus";

    py::class_<GridSpec>(m, "GridSpec")
        .def_readonly("modes_per_dim", &GridSpec::modes_per_dim)
        .def_readonly("domain_length", &GridSpec::domain_length)
        .def_readonly("dealias_cutoff", &GridSpec::dealias_cutoff)
        .def("__repr__", [](const GridSpec& g) {
            return "GridSpec(N=" + std::to_string(g.modes_per_dim) +
                   ", L=" + std::to_string(g.domain_length) +
                   ", kmax=" + std::to_string(g.dealias_cutoff) + ")";
        });
    m.def("make_grid", &make_grid, py::arg("modes_per_dim"),
          py::arg("domain_length") = 2.0 * M_PI);

    py::class_<VelocityField>(m, "VelocityField")
        .def_property_readonly("grid", &VelocityField::grid)
        .def("coeffs", &coeffs_array)
        .def("norms", &norms_dict)
        .def("__add__", [](const VelocityField& a, const VelocityField& b) { return a + b; })
        .def("__sub__", [](const VelocityField& a, const VelocityField& b) { return a - b; })
        .def("__rmul__", [](const VelocityField& a, double s) { return s * a; });
    m.def("field_from_coeffs", &field_from_array, py::arg("grid"), py::arg("coeffs"));

    py::class_<VorticityField>(m, "VorticityField")
        .def_property_readonly("grid", &VorticityField::grid);

    // operators
    m.def("leray_project", &leray_project);
    m.def("apply_A", &apply_A);
    m.def("bilinear_B", &bilinear_B);
    m.def("curl", &curl);
    m.def("velocity_from_vorticity", &velocity_from_vorticity);
    m.def("advect_scalar", &advect_scalar);
    m.def("h_norm", &h_norm);
    m.def("v_norm", &v_norm);
    m.def("da_norm", &da_norm);
    m.def("x_norm", &x_norm);
    m.def("vorticity_l2", &l2_norm);
    m.def("inner_h", &inner_h);
    m.def("inner_v", &inner_v);
    m.def("hermitian_defect", py::overload_cast<const VelocityField&>(&hermitian_defect));
    m.def("divergence_defect", &divergence_defect);

    // presets
    m.def("taylor_green", &taylor_green, py::arg("grid"), py::arg("amplitude") = 1.0);
    m.def("random_smooth", &random_smooth, py::arg("grid"), py::arg("decay_exponent"),
          py::arg("seed"), py::arg("h_norm_target") = 1.0);
    m.def("single_mode", &single_mode, py::arg("grid"), py::arg("j1"), py::arg("j2"),
          py::arg("amplitude") = 1.0);
    m.def("random_band_limited", &random_band_limited);

    // noise model
    py::class_<NoiseBasisSpec>(m, "NoiseBasisSpec")
        .def_readonly("n_modes", &NoiseBasisSpec::n_modes);
    m.def("make_noise_basis", &make_noise_basis);

    py::class_<GrowthConstants>(m, "GrowthConstants")
        .def_readonly("K0", &GrowthConstants::K0)
        .def_readonly("K1", &GrowthConstants::K1)
        .def_readonly("K2", &GrowthConstants::K2)
        .def_readonly("L1", &GrowthConstants::L1)
        .def_readonly("L2", &GrowthConstants::L2);

    py::class_<DiffusionSpec>(m, "DiffusionSpec")
        .def_readonly("amplitude", &DiffusionSpec::amplitude)
        .def_readonly("decay", &DiffusionSpec::decay)
        .def_readonly("grad_amplitude", &DiffusionSpec::grad_amplitude)
        .def_readonly("eps", &DiffusionSpec::eps)
        .def_readonly("g1", &DiffusionSpec::g1)
        .def_readonly("g2", &DiffusionSpec::g2)
        .def_property_readonly("family",
                               [](const DiffusionSpec& s) { return family_name(s.family); })
        .def_property_readonly("n_modes",
                               [](const DiffusionSpec& s) { return s.basis.n_modes; });
    m.def(
        "make_diffusion",
        [](const std::string& family, int n_modes, double amplitude, double decay,
           double grad_amplitude, double eps, double wavenumber_unit) {
            return make_diffusion(family_from_name(family), n_modes, amplitude, decay,
                                  grad_amplitude, eps, wavenumber_unit);
        },
        py::arg("family"), py::arg("n_modes"), py::arg("amplitude"), py::arg("decay") = 0.0,
        py::arg("grad_amplitude") = 0.0, py::arg("eps") = 0.0, py::arg("wavenumber_unit") = 1.0);

    py::class_<CoriolisSpec>(m, "CoriolisSpec")
        .def_readonly("c0", &CoriolisSpec::c0)
        .def_readonly("R0", &CoriolisSpec::declared_R0)
        .def_readonly("R1", &CoriolisSpec::declared_R1);
    m.def("make_coriolis", &make_coriolis);
    m.def("apply_R", &apply_R);

    py::class_<BrownianPath>(m, "BrownianPath")
        .def_readonly("finest_n", &BrownianPath::finest_n)
        .def_readonly("horizon", &BrownianPath::horizon)
        .def_readonly("seed", &BrownianPath::seed)
        .def_property_readonly("increments", [](const BrownianPath& p) {
            py::list out;
            for (const auto& mode : p.increments) out.append(py::cast(mode));
            return out;
        });
    m.def("sample_path", &sample_path);
    m.def("aggregate", &aggregate);
    m.def("derive_seed", &derive_seed);
    m.def("apply_G", [](const DiffusionSpec& spec, double t, const VelocityField& u,
                        const std::vector<double>& dW) {
        return apply_G(spec, t, u, std::span<const double>(dW.data(), dW.size()));
    });
    m.def("hs_norm_sq", &hs_norm_sq);
    m.def("hs_norm_sq_curl", &hs_norm_sq_curl);
    m.def("validate_assumptions",
          [](const DiffusionSpec& spec, const CoriolisSpec& cor, double eps, int p) {
              const ValidationReport rep = validate_assumptions(spec, cor, eps, p);
              py::list items;
              for (const auto& it : rep.items) {
                  py::dict d;
                  d["name"] = it.name;
                  d["inequality"] = it.inequality;
                  d["satisfied"] = it.satisfied;
                  items.append(d);
              }
              return items;
          });

    // splitting scheme
    m.def("grid_functions", [](double t, int n, double T) {
        const GridTimes g = grid_functions(t, n, T);
        return py::make_tuple(g.lower, g.upper);
    });

    py::class_<InitialConditionSpec>(m, "InitialConditionSpec")
        .def(py::init<>())
        .def_readwrite("kind", &InitialConditionSpec::kind)
        .def_readwrite("amplitude", &InitialConditionSpec::amplitude)
        .def_readwrite("decay_exponent", &InitialConditionSpec::decay_exponent)
        .def_readwrite("smooth_fraction", &InitialConditionSpec::smooth_fraction)
        .def_readwrite("j1", &InitialConditionSpec::j1)
        .def_readwrite("j2", &InitialConditionSpec::j2)
        .def_readwrite("seed", &InitialConditionSpec::seed)
        .def_readwrite("per_sample", &InitialConditionSpec::per_sample);

    py::class_<SchemeConfig>(m, "SchemeConfig")
        .def(py::init<>())
        .def_readwrite("T", &SchemeConfig::T)
        .def_readwrite("n", &SchemeConfig::n)
        .def_readwrite("eps", &SchemeConfig::eps)
        .def_readwrite("inner_steps", &SchemeConfig::inner_steps)
        .def_readwrite("grid", &SchemeConfig::grid)
        .def_readwrite("diffusion", &SchemeConfig::diffusion)
        .def_readwrite("coriolis", &SchemeConfig::coriolis)
        .def_readwrite("ic", &SchemeConfig::ic)
        .def_readwrite("seed", &SchemeConfig::seed);

    py::class_<TrajectoryOptions>(m, "TrajectoryOptions")
        .def(py::init<>())
        .def_readwrite("dense_norms", &TrajectoryOptions::dense_norms)
        .def_readwrite("y_norms", &TrajectoryOptions::y_norms)
        .def_readwrite("pair_diffs", &TrajectoryOptions::pair_diffs)
        .def_readwrite("x_norms", &TrajectoryOptions::x_norms)
        .def_readwrite("dense_fields", &TrajectoryOptions::dense_fields)
        .def_readwrite("grid_fields", &TrajectoryOptions::grid_fields)
        .def_readwrite("snapshot_times", &TrajectoryOptions::snapshot_times);

    py::class_<SchemeTrajectory>(m, "SchemeTrajectory")
        .def_readonly("T", &SchemeTrajectory::T)
        .def_readonly("n", &SchemeTrajectory::n)
        .def_readonly("inner_steps", &SchemeTrajectory::inner_steps)
        .def("failed", &SchemeTrajectory::failed)
        .def("u_plus", [](const SchemeTrajectory& t, int k) { return t.u_plus.at(k); })
        .def("u_minus", [](const SchemeTrajectory& t, int k) { return t.u_minus.at(k); })
        .def("z", [](const SchemeTrajectory& t, int k) { return t.z_at(k); })
        .def("dense_rows",
             [](const SchemeTrajectory& t) {
                 py::list out;
                 for (const auto& r : t.dense) out.append(row_dict(r));
                 return out;
             })
        .def("snapshot", [](const SchemeTrajectory& t, int i) { return t.snapshots.at(i); });

    m.def("deterministic_substep",
          [](const VelocityField& y_in, double t0, double h, double eps, int m,
             const CoriolisSpec& cor) {
              auto res = deterministic_substep(y_in, t0, h, eps, m, cor);
              if (!res.finite) throw std::runtime_error("substep blew up");
              return res.u_end;
          });
    m.def("stochastic_substep",
          [](const VelocityField& u_in, double t0, double h, double eps,
             const DiffusionSpec& spec, const std::vector<double>& dW) {
              return stochastic_substep(u_in, t0, h, eps, spec,
                                        std::span<const double>(dW.data(), dW.size()));
          });
    m.def("run_scheme", &run_scheme, py::arg("config"), py::arg("path"),
          py::arg("options") = TrajectoryOptions{});
    m.def("dense_z", &dense_z);

    // estimates harness
    py::class_<HarnessConfig>(m, "HarnessConfig")
        .def(py::init<>())
        .def_readwrite("scheme", &HarnessConfig::scheme)
        .def_readwrite("n_list", &HarnessConfig::n_list)
        .def_readwrite("n_ref", &HarnessConfig::n_ref)
        .def_readwrite("samples", &HarnessConfig::samples)
        .def_readwrite("p", &HarnessConfig::p)
        .def_readwrite("master_seed", &HarnessConfig::master_seed)
        .def_readwrite("workers", &HarnessConfig::workers)
        .def_readwrite("m_percentile", &HarnessConfig::m_percentile)
        .def_readwrite("reference_check", &HarnessConfig::reference_check)
        .def_readwrite("z_schedule", &HarnessConfig::z_schedule)
        .def_readwrite("z_scale", &HarnessConfig::z_scale)
        .def_property(
            "fixed_M",
            [](const HarnessConfig& h) {
                return h.fixed_M ? py::cast(*h.fixed_M) : py::none().cast<py::object>();
            },
            [](HarnessConfig& h, py::object v) {
                if (v.is_none()) h.fixed_M.reset();
                else h.fixed_M = v.cast<double>();
            });

    m.def("diff_estimates", [](const HarnessConfig& cfg) {
        const DiffReport rep = diff_estimates(cfg);
        py::dict out;
        out["p"] = rep.p;
        out["rows"] = rows_dict(rep.rows);
        out["slopes"] = slopes_dict(rep.slopes);
        return out;
    });
    m.def("moment_estimates", [](const HarnessConfig& cfg) {
        const MomentReport rep = moment_estimates(cfg);
        py::dict out;
        out["p"] = rep.p;
        out["rows"] = rows_dict(rep.rows);
        py::dict trends;
        for (const auto& t : rep.trends) {
            py::dict d;
            d["max_over_min"] = t.max_over_min;
            d["bounded"] = t.bounded;
            d["kendall_tau"] = t.kendall.tau;
            d["kendall_p_positive"] = t.kendall.p_positive;
            trends[py::str(t.stat)] = d;
        }
        out["trends"] = trends;
        return out;
    });
    m.def("rate_experiment", [](const HarnessConfig& cfg) {
        const RateReport rep = rate_experiment(cfg);
        py::dict out;
        out["n_ref"] = rep.n_ref;
        out["M"] = rep.M;
        out["m_rule"] = rep.m_rule;
        out["rows"] = rows_dict(rep.rows);
        out["slopes"] = slopes_dict(rep.slopes);
        out["reference_check_passed"] = rep.reference_check_passed;
        py::list checks;
        for (const auto& rc : rep.reference_checks) {
            py::dict d;
            d["n"] = rc.n;
            d["err_full"] = rc.err_full;
            d["err_half"] = rc.err_half;
            d["rel_gap"] = rc.rel_gap;
            checks.append(d);
        }
        out["reference_checks"] = checks;
        py::list exceed;
        for (const auto& ex : rep.exceedance) {
            py::dict d;
            d["n"] = ex.n;
            d["threshold"] = ex.threshold;
            d["fraction"] = ex.fraction;
            exceed.append(d);
        }
        out["exceedance"] = exceed;
        return out;
    });

    m.def("fit_rate", [](const std::vector<std::pair<double, double>>& pairs) {
        const RateFit f = fit_rate(pairs);
        py::dict d;
        d["slope"] = f.slope;
        d["intercept"] = f.intercept;
        d["half_width"] = f.half_width;
        d["points"] = f.points;
        return d;
    });
    m.def("kendall_tau", [](const std::vector<double>& x, const std::vector<double>& y) {
        const KendallResult r = kendall_tau(x, y);
        py::dict d;
        d["tau"] = r.tau;
        d["s"] = r.s_statistic;
        d["p_positive"] = r.p_positive;
        return d;
    });

    // files and configs
    m.def("write_field", [](const std::string& f, const VelocityField& u) {
        write_field(std::filesystem::path(f), u);
    });
    m.def("read_field",
          [](const std::string& f) { return read_field(std::filesystem::path(f)); });
    m.def("default_config_json", &default_config_json);
    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::vector<const char*> argv;
        argv.push_back("nse-split");
        for (const auto& a : args) argv.push_back(a.c_str());
        return run_cli(static_cast<int>(argv.size()), argv.data());
    });
}
