#include "rcp/report.hpp"

#include <algorithm>
#include <cstdio>

namespace rcp {

std::string format_real(double x) {
    if (x == 0.0) x = 0.0; // normalize -0
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", x);
    return buffer;
}

const char* const kReportColumns[12] = {
    "mechanism", "K",         "c",    "lambda",    "a",
    "alpha",     "method",    "grid", "guarantee", "refinement_delta",
    "worst_support", "worst_weights"};

std::vector<std::string> report_row(const ProfitReport& report, const Scenario& scenario) {
    std::string support;
    std::string weights;
    const DiscreteDistribution& worst = report.worst_distribution;
    for (std::size_t i = 0; i < worst.size(); ++i) {
        if (i > 0) {
            support += ';';
            weights += ';';
        }
        const TypeVector& point = worst.point(i);
        for (std::size_t j = 0; j < point.dimension(); ++j) {
            if (j > 0) support += '|';
            support += format_real(point[j]);
        }
        weights += format_real(worst.weight(i));
    }
    return {report.mechanism,
            std::to_string(scenario.num_services),
            format_real(scenario.unit_cost),
            format_real(scenario.mean_total_demand),
            format_real(scenario.utility.scale()),
            format_real(scenario.utility.exponent()),
            method_name(report.method),
            std::to_string(report.grid_points),
            format_real(report.guarantee),
            report.refinement_delta ? format_real(*report.refinement_delta) : std::string{},
            support,
            weights};
}

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    const auto append_line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    append_line(header);
    for (const auto& row : rows) append_line(row);
    return out;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths(header.size(), 0);
    const auto grow = [&widths](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            widths[i] = std::max(widths[i], cells[i].size());
    };
    grow(header);
    for (const auto& row : rows) grow(row);

    std::string out;
    const auto append_line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out += "  ";
            out += cells[i];
            if (i + 1 < cells.size()) out.append(widths[i] - cells[i].size(), ' ');
        }
        out += '\n';
    };
    append_line(header);
    for (const auto& row : rows) append_line(row);
    return out;
}

} // namespace rcp
