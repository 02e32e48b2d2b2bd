#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nsesplit/field.hpp"
#include "nsesplit/harness.hpp"

namespace nsesplit {

// Field snapshot format (.snap): little-endian binary
//   magic  "NSSNAP01"           8 bytes
//   N      uint32, ncomp uint32 (2 velocity, 1 scalar)
//   L      float64
//   data   N*N*ncomp complex<double>, row-major over (j1, j2) with
//          j in [-N/2, N/2), components interleaved per mode.
void write_field(const std::filesystem::path& file, const VelocityField& u);
VelocityField read_field(const std::filesystem::path& file);

/// Full-precision (17 significant digits) number formatting used by
/// every CSV so reruns are byte-identical.
std::string format_full(double v);

void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Report emission: one CSV row per n plus a JSON twin with everything.
void write_report_csv(const std::filesystem::path& file, const DiffReport& r);
void write_report_csv(const std::filesystem::path& file, const MomentReport& r);
void write_report_csv(const std::filesystem::path& file, const RateReport& r);
void write_exceedance_csv(const std::filesystem::path& file, const RateReport& r);

std::string report_json(const DiffReport& r);
std::string report_json(const MomentReport& r);
std::string report_json(const RateReport& r);

/// Gnuplot scripts for the log-log error curves and the exceedance
/// curve; references data files by relative path only.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& out_dir,
                                              const std::string& report_kind,
                                              const std::vector<std::string>& csv_names,
                                              const std::vector<FittedSlope>& slopes);

} // namespace nsesplit
