#include "rcp/cli.hpp"

#include "rcp/errors.hpp"
#include "rcp/report.hpp"
#include "rcp/verify.hpp"

#include <algorithm>
#include <stdexcept>

namespace rcp {

namespace {

const Mechanism& single_mechanism(const RunConfig& config) {
    if (config.mechanisms.empty())
        throw ConfigError("this command needs a [mechanism] section");
    return config.mechanisms.front();
}

void emit(const RunConfig& config, const std::vector<std::string>& header,
          const std::vector<std::vector<std::string>>& rows, std::ostream& out) {
    out << (config.output.format == "csv" ? render_csv(header, rows)
                                          : render_table(header, rows));
}

std::vector<std::string> report_header() {
    return std::vector<std::string>(std::begin(kReportColumns), std::end(kReportColumns));
}

} // namespace

int cmd_solve(const RunConfig& config, std::ostream& out) {
    const Scenario& scenario = config.scenario;
    const CommittedSpendContract contract = optimal_contract(scenario);
    const ConstantBundle bundle = optimal_constant(scenario);
    out << "q_bar=" << format_real(contract.committed_quantity)
        << " t_bar=" << format_real(contract.committed_payment)
        << " p=" << format_real(contract.overage_price)
        << " guarantee=" << format_real(guarantee_value(scenario))
        << " q_star=" << format_real(bundle.quantity_per_service) << "\n";
    return kExitOk;
}

int cmd_respond(const RunConfig& config, const std::vector<double>& theta, std::ostream& out) {
    const Scenario& scenario = config.scenario;
    if (theta.size() != std::size_t(scenario.num_services))
        throw ConfigError("--theta has " + std::to_string(theta.size()) +
                          " components, scenario has K = " +
                          std::to_string(scenario.num_services));
    const TypeVector type{std::vector<double>(theta)};
    const BuyerResponse response = respond(single_mechanism(config), type, scenario);

    out << "allocation=";
    for (std::size_t i = 0; i < response.allocation.size(); ++i) {
        if (i > 0) out << ',';
        out << format_real(response.allocation[i]);
    }
    out << " transfer=" << format_real(response.transfer) << " mu="
        << (response.shadow_price ? format_real(*response.shadow_price) : std::string("-"))
        << " floor_binding=" << (response.floor_binding ? "true" : "false") << "\n";
    return kExitOk;
}

int cmd_worst_case(const RunConfig& config, std::ostream& out) {
    const Mechanism& mechanism = single_mechanism(config);
    const auto reports =
        worst_case_refinement(mechanism, config.scenario, config.adversary.levels,
                              config.adversary.method, config.adversary.cap);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(reports.size());
    for (const ProfitReport& report : reports)
        rows.push_back(report_row(report, config.scenario));
    emit(config, report_header(), rows, out);
    return kExitOk;
}

int cmd_compare(const RunConfig& config, std::ostream& out) {
    if (config.mechanisms.empty())
        throw ConfigError("compare needs at least one [mechanism] section");
    std::vector<ProfitReport> reports;
    reports.reserve(config.mechanisms.size());
    for (const Mechanism& mechanism : config.mechanisms) {
        auto refinement =
            worst_case_refinement(mechanism, config.scenario, config.adversary.levels,
                                  config.adversary.method, config.adversary.cap);
        reports.push_back(std::move(refinement.back()));
    }
    std::stable_sort(reports.begin(), reports.end(),
                     [](const ProfitReport& a, const ProfitReport& b) {
                         return a.guarantee > b.guarantee;
                     });
    std::vector<std::vector<std::string>> rows;
    rows.reserve(reports.size());
    for (const ProfitReport& report : reports)
        rows.push_back(report_row(report, config.scenario));
    emit(config, report_header(), rows, out);
    return kExitOk;
}

int cmd_sweep(const RunConfig& config, const std::string& parameter,
              const std::vector<double>& values, std::ostream& out) {
    if (parameter != "lambda" && parameter != "c")
        throw ConfigError("sweep parameter must be \"lambda\" or \"c\", got '" + parameter +
                          "'");
    if (values.empty()) throw ConfigError("sweep needs at least one value");

    const std::vector<std::string> header = {"param",  "value", "q_bar",    "t_bar",
                                             "p",      "q_star", "guarantee"};
    std::vector<std::vector<std::string>> rows;
    rows.reserve(values.size());
    for (double value : values) {
        const Scenario& base = config.scenario;
        Scenario swept(base.num_services, parameter == "c" ? value : base.unit_cost,
                       parameter == "lambda" ? value : base.mean_total_demand, base.utility);
        const CommittedSpendContract contract = optimal_contract(swept);
        const ConstantBundle bundle = optimal_constant(swept);
        rows.push_back({parameter, format_real(value),
                        format_real(contract.committed_quantity),
                        format_real(contract.committed_payment),
                        format_real(contract.overage_price),
                        format_real(bundle.quantity_per_service),
                        format_real(guarantee_value(swept))});
    }
    emit(config, header, rows, out);
    return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out) {
    const std::vector<CheckOutcome> outcomes = run_verification(config);
    int passed = 0;
    for (const CheckOutcome& outcome : outcomes) {
        if (outcome.pass) ++passed;
        out << (outcome.pass ? "[PASS] " : "[FAIL] ") << outcome.name << ": "
            << outcome.checks << " checks, " << outcome.detail << "\n";
    }
    out << "verify: " << passed << "/" << outcomes.size() << " checks passed\n";
    return passed == int(outcomes.size()) ? kExitOk : kExitVerification;
}

} // namespace rcp
