// Deterministic report rendering: CSV and aligned-table emission with all
// reals at 12 significant digits and a '.' decimal separator.
#pragma once

#include "rcp/robust.hpp"

#include <string>
#include <vector>

namespace rcp {

// 12 significant digits, C locale, no trailing noise ("0.5", "1", "2.5e-05").
std::string format_real(double x);

// mechanism,K,c,lambda,a,alpha,method,grid,guarantee,refinement_delta,
// worst_support,worst_weights
extern const char* const kReportColumns[12];

// One row per report, in the pinned column order. worst_support joins points
// with ';' and components with '|'; worst_weights joins with ';'.
std::vector<std::string> report_row(const ProfitReport& report, const Scenario& scenario);

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

} // namespace rcp
