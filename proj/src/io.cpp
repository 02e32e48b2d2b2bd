#include "nsesplit/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nsesplit {

namespace {
constexpr char kMagic[8] = {'N', 'S', 'S', 'N', 'A', 'P', '0', '1'};
}

void write_field(const std::filesystem::path& file, const VelocityField& u) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
    os.write(kMagic, sizeof(kMagic));
    const std::uint32_t N = static_cast<std::uint32_t>(u.grid().modes_per_dim);
    const std::uint32_t ncomp = 2;
    const double L = u.grid().domain_length;
    os.write(reinterpret_cast<const char*>(&N), sizeof(N));
    os.write(reinterpret_cast<const char*>(&ncomp), sizeof(ncomp));
    os.write(reinterpret_cast<const char*>(&L), sizeof(L));
    // row-major over (j1, j2), components interleaved per mode
    const int h = u.grid().half();
    for (int j1 = -h; j1 < h; ++j1)
        for (int j2 = -h; j2 < h; ++j2)
            for (int c = 0; c < 2; ++c) {
                const Complex& v = u.at(c, j1, j2);
                const double re = v.real(), im = v.imag();
                os.write(reinterpret_cast<const char*>(&re), sizeof(re));
                os.write(reinterpret_cast<const char*>(&im), sizeof(im));
            }
    if (!os) throw std::runtime_error("short write to " + file.string());
}

VelocityField read_field(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + file.string());
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error(file.string() + ": not a field snapshot");
    std::uint32_t N = 0, ncomp = 0;
    double L = 0.0;
    is.read(reinterpret_cast<char*>(&N), sizeof(N));
    is.read(reinterpret_cast<char*>(&ncomp), sizeof(ncomp));
    is.read(reinterpret_cast<char*>(&L), sizeof(L));
    if (!is || ncomp != 2) throw std::runtime_error(file.string() + ": bad snapshot header");
    VelocityField u(make_grid(static_cast<int>(N), L));
    const int h = u.grid().half();
    for (int j1 = -h; j1 < h; ++j1)
        for (int j2 = -h; j2 < h; ++j2)
            for (int c = 0; c < 2; ++c) {
                double re = 0.0, im = 0.0;
                is.read(reinterpret_cast<char*>(&re), sizeof(re));
                is.read(reinterpret_cast<char*>(&im), sizeof(im));
                u.at(c, j1, j2) = Complex(re, im);
            }
    if (!is) throw std::runtime_error(file.string() + ": truncated snapshot");
    return u;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i)
        os << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << row[i] << (i + 1 < row.size() ? "," : "\n");
    }
    if (!os) throw std::runtime_error("short write to " + file.string());
}

namespace {

std::vector<std::string> stat_names(const std::vector<ReportRow>& rows) {
    std::vector<std::string> names;
    if (rows.empty()) return names;
    for (const auto& [k, v] : rows.front().stats) names.push_back(k);
    return names; // std::map iteration: stable sorted order
}

void rows_to_csv(const std::filesystem::path& file, const std::vector<ReportRow>& rows) {
    const auto names = stat_names(rows);
    std::vector<std::string> header = {"n", "samples", "failed"};
    for (const auto& s : names) {
        header.push_back(s);
        header.push_back(s + "_se");
    }
    std::vector<std::vector<std::string>> lines;
    for (const auto& row : rows) {
        std::vector<std::string> line = {std::to_string(row.n), std::to_string(row.samples),
                                         std::to_string(row.failed)};
        for (const auto& s : names) {
            const auto it = row.stats.find(s);
            const Estimate e = it == row.stats.end() ? Estimate{} : it->second;
            line.push_back(format_full(e.value));
            line.push_back(format_full(e.se));
        }
        lines.push_back(std::move(line));
    }
    write_csv(file, header, lines);
}

nlohmann::ordered_json rows_to_json(const std::vector<ReportRow>& rows) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json jr;
        jr["n"] = row.n;
        jr["samples"] = row.samples;
        jr["failed"] = row.failed;
        for (const auto& [k, v] : row.stats) {
            jr[k] = v.value;
            jr[k + "_se"] = v.se;
        }
        out.push_back(std::move(jr));
    }
    return out;
}

nlohmann::ordered_json slopes_to_json(const std::vector<FittedSlope>& slopes) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& s : slopes) {
        nlohmann::ordered_json js;
        js["stat"] = s.stat;
        js["slope"] = s.fit.slope;
        js["intercept"] = s.fit.intercept;
        js["half_width"] = s.fit.half_width;
        js["points"] = s.fit.points;
        out.push_back(std::move(js));
    }
    return out;
}

} // namespace

void write_report_csv(const std::filesystem::path& file, const DiffReport& r) {
    rows_to_csv(file, r.rows);
}
void write_report_csv(const std::filesystem::path& file, const MomentReport& r) {
    rows_to_csv(file, r.rows);
}
void write_report_csv(const std::filesystem::path& file, const RateReport& r) {
    rows_to_csv(file, r.rows);
}

void write_exceedance_csv(const std::filesystem::path& file, const RateReport& r) {
    std::vector<std::vector<std::string>> lines;
    for (const auto& ex : r.exceedance)
        lines.push_back({std::to_string(ex.n), format_full(ex.threshold),
                         format_full(ex.fraction), std::to_string(ex.samples)});
    write_csv(file, {"n", "threshold", "fraction", "samples"}, lines);
}

std::string report_json(const DiffReport& r) {
    nlohmann::ordered_json j;
    j["kind"] = "diffs";
    j["p"] = r.p;
    j["rows"] = rows_to_json(r.rows);
    j["slopes"] = slopes_to_json(r.slopes);
    return j.dump(2);
}

std::string report_json(const MomentReport& r) {
    nlohmann::ordered_json j;
    j["kind"] = "moments";
    j["p"] = r.p;
    j["warnings"] = r.warnings;
    j["rows"] = rows_to_json(r.rows);
    nlohmann::ordered_json trends = nlohmann::ordered_json::array();
    for (const auto& t : r.trends) {
        nlohmann::ordered_json jt;
        jt["stat"] = t.stat;
        jt["max_over_min"] = t.max_over_min;
        jt["bounded"] = t.bounded;
        jt["kendall_tau"] = t.kendall.tau;
        jt["kendall_p_positive"] = t.kendall.p_positive;
        trends.push_back(std::move(jt));
    }
    j["trends"] = trends;
    return j.dump(2);
}

std::string report_json(const RateReport& r) {
    nlohmann::ordered_json j;
    j["kind"] = "rate";
    j["n_ref"] = r.n_ref;
    j["M"] = r.M;
    j["m_rule"] = r.m_rule;
    j["rows"] = rows_to_json(r.rows);
    j["slopes"] = slopes_to_json(r.slopes);
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& rc : r.reference_checks) {
        nlohmann::ordered_json jc;
        jc["n"] = rc.n;
        jc["err_full"] = rc.err_full;
        jc["err_half"] = rc.err_half;
        jc["rel_gap"] = rc.rel_gap;
        checks.push_back(std::move(jc));
    }
    j["reference_checks"] = checks;
    j["reference_check_passed"] = r.reference_check_passed;
    nlohmann::ordered_json exceed = nlohmann::ordered_json::array();
    for (const auto& ex : r.exceedance) {
        nlohmann::ordered_json je;
        je["n"] = ex.n;
        je["threshold"] = ex.threshold;
        je["fraction"] = ex.fraction;
        je["samples"] = ex.samples;
        exceed.push_back(std::move(je));
    }
    j["exceedance"] = exceed;
    return j.dump(2);
}

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& out_dir,
                                              const std::string& report_kind,
                                              const std::vector<std::string>& csv_names,
                                              const std::vector<FittedSlope>& slopes) {
    if (csv_names.empty()) throw std::invalid_argument("emit_plots: no report files given");
    const std::filesystem::path plot_dir = out_dir / "plots";
    std::filesystem::create_directories(plot_dir);
    std::vector<std::filesystem::path> written;

    // 1-based gnuplot column of each statistic, from the report header
    auto columns_of = [&](const std::string& name) {
        std::ifstream is(out_dir / name);
        if (!is) throw std::runtime_error("emit_plots: missing report " + name);
        std::string header;
        std::getline(is, header);
        std::map<std::string, int> cols;
        std::stringstream ss(header);
        std::string field;
        int idx = 1;
        while (std::getline(ss, field, ',')) cols[field] = idx++;
        return cols;
    };

    if (report_kind == "rate" || report_kind == "diffs" || report_kind == "moments") {
        const auto cols = columns_of(csv_names.front());
        const std::filesystem::path script = plot_dir / (report_kind + "_loglog.gp");
        std::ofstream os(script);
        if (!os) throw std::runtime_error("cannot write " + script.string());
        os << "set datafile separator ','\n";
        os << "set logscale xy\n";
        os << "set xlabel 'n'\n";
        os << "set ylabel 'error'\n";
        os << "set key left bottom\n";
        os << "set title '" << report_kind << " estimates vs n'\n";
        os << "plot \\\n";
        bool first = true;
        for (const auto& s : slopes) {
            const auto it = cols.find(s.stat);
            if (it == cols.end()) continue;
            if (!first) os << ", \\\n";
            first = false;
            os << "  '../" << csv_names.front() << "' using 1:" << it->second
               << " with linespoints title '" << s.stat << " (slope "
               << format_full(s.fit.slope) << ")'";
        }
        if (first)
            os << "  '../" << csv_names.front() << "' using 1:4 with linespoints title 'estimate'";
        os << "\n";
        written.push_back(script);
    }
    if (report_kind == "rate" && csv_names.size() > 1) {
        columns_of(csv_names[1]); // existence check
        const std::filesystem::path script = plot_dir / "exceedance.gp";
        std::ofstream os(script);
        if (!os) throw std::runtime_error("cannot write " + script.string());
        os << "set datafile separator ','\n";
        os << "set logscale x\n";
        os << "set xlabel 'n'\n";
        os << "set ylabel 'empirical exceedance'\n";
        os << "set yrange [-0.05:1.05]\n";
        os << "plot '../" << csv_names[1] << "' using 1:3 with linespoints title 'P(e_n >= z(n)/sqrt(n))'\n";
        written.push_back(script);
    }
    return written;
}

} // namespace nsesplit
