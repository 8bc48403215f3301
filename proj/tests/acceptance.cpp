// Acceptance harness: exercises the full solver stack end to end and prints
// one pass/fail line per criterion. Usage: acceptance <path-to-rcp-cli>.
#include "rcp/report.hpp"
#include "rcp/robust.hpp"
#include "rcp/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace rcp;

namespace {

struct CriterionResult {
    std::string label;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::vector<CriterionResult> g_results;

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void record(const std::string& label, bool pass, const std::string& detail, double seconds,
            double budget_seconds) {
    CriterionResult result;
    result.label = label;
    result.pass = pass && seconds < budget_seconds;
    result.detail = detail;
    if (seconds >= budget_seconds)
        result.detail += " [over time budget " + format_real(budget_seconds) + "s]";
    result.seconds = seconds;
    g_results.push_back(result);
}

Scenario make_scenario(int K, double c, double lambda) {
    return Scenario(K, c, lambda, UtilityFunction::scaled_power(2.0, 0.5));
}

struct CliRun {
    int exit_code = -1;
    std::string output;
};

CliRun run_cli(const std::string& command) {
    CliRun run;
    FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
    if (!pipe) return run;
    char buffer[4096];
    while (std::fgets(buffer, sizeof(buffer), pipe)) run.output += buffer;
    const int status = pclose(pipe);
    run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return run;
}

// extracts the value following "key=" in a key=value line
double parse_field(const std::string& output, const std::string& key) {
    const auto pos = output.find(key + "=");
    if (pos == std::string::npos) return std::nan("");
    return std::strtod(output.c_str() + pos + key.size() + 1, nullptr);
}

std::string write_config(const std::filesystem::path& dir, const std::string& name,
                         const std::string& text) {
    const std::filesystem::path path = dir / name;
    std::ofstream file(path);
    file << text;
    return path.string();
}

void criterion_closed_form(const std::string& cli, const std::filesystem::path& dir) {
    Timer timer;
    const std::string two = write_config(dir, "k2.cfg", R"([scenario]
K = 2
c = 1.0
lambda = 1.0
utility.family = "scaled_power"
utility.a = 2.0
utility.alpha = 0.5
)");
    const std::string one = write_config(dir, "k1.cfg", R"([scenario]
K = 1
c = 1.0
lambda = 0.5
utility.family = "scaled_power"
utility.a = 2.0
utility.alpha = 0.5
)");

    const CliRun run2 = run_cli("\"" + cli + "\" solve --config \"" + two + "\"");
    const CliRun run1 = run_cli("\"" + cli + "\" solve --config \"" + one + "\"");

    double max_err = 0.0;
    bool pass = run2.exit_code == 0 && run1.exit_code == 0;
    const auto check = [&](const CliRun& run, const char* key, double expected) {
        const double actual = parse_field(run.output, key);
        if (std::isnan(actual)) {
            pass = false;
            return;
        }
        max_err = std::max(max_err, std::fabs(actual - expected));
        if (std::fabs(actual - expected) > 1e-10) pass = false;
    };
    check(run2, "q_bar", 0.5);
    check(run2, "t_bar", 1.0);
    check(run2, "p", 1.0);
    check(run2, "guarantee", 0.5);
    check(run1, "q_bar", 0.25);
    check(run1, "t_bar", 0.5);
    check(run1, "p", 1.0);
    check(run1, "guarantee", 0.25);

    record("criterion 1: closed-form reproduction via solve", pass,
           "max abs err " + format_real(max_err), timer.seconds(), 1.0);
}

void criterion_profit_identity() {
    Timer timer;
    bool pass = true;
    double worst = 0.0;
    std::string detail;
    for (int K : {1, 2, 3}) {
        const Scenario scenario = make_scenario(K, 1.0, 0.5 * K);
        const CheckOutcome outcome =
            check_profit_identity(scenario, optimal_contract(scenario), 10000, 100 + K);
        worst = std::max(worst, outcome.worst);
        if (!outcome.pass) {
            pass = false;
            detail = "K=" + std::to_string(K) + ": " + outcome.detail;
        }
    }
    if (detail.empty()) detail = "30000 types, max abs err " + format_real(worst);
    record("criterion 2: profit identity of the optimal contract", pass, detail,
           timer.seconds(), 5.0);
}

void criterion_adversary() {
    Timer timer;
    bool pass = true;
    double worst_delta = 0.0;
    std::string detail;
    const std::vector<int> levels = {51, 101, 201};
    for (int K : {1, 2}) {
        const Scenario scenario = make_scenario(K, 1.0, 0.5 * K);
        std::vector<Mechanism> mechanisms = {optimal_contract(scenario),
                                             optimal_constant(scenario)};
        for (double factor : {1.5, 2.0, 4.0})
            mechanisms.emplace_back(LinearTariff{factor * scenario.unit_cost});
        const CheckOutcome outcome =
            check_method_agreement(scenario, mechanisms, levels, 1'000'000);
        worst_delta = std::max(worst_delta, outcome.worst);
        if (!outcome.pass) {
            pass = false;
            detail = "K=" + std::to_string(K) + ": " + outcome.detail;
        }
    }

    // convex tariff profit: the worst case degenerates to the mean type
    const Scenario convex = make_scenario(1, 1.0, 0.5);
    const auto grid = adversary_grid(convex, 201);
    for (WorstCaseMethod method : {WorstCaseMethod::TwoPointSearch, WorstCaseMethod::GridLP}) {
        const ProfitReport report = worst_case_profit(LinearTariff{2.0}, convex, grid, method);
        if (std::fabs(report.guarantee - 0.0625) > 1e-10 ||
            report.worst_distribution.size() != 1 ||
            std::fabs(report.worst_distribution.point(0)[0] - 0.5) > 0.5 / 200.0) {
            pass = false;
            detail = "convex tariff case: got " + format_real(report.guarantee) + " via " +
                     method_name(method);
        }
    }
    if (detail.empty())
        detail = "30 comparisons, max method delta " + format_real(worst_delta) +
                 "; convex case pinned at Dirac(0.5)";
    record("criterion 3: adversary routes agree", pass, detail, timer.seconds(), 30.0);
}

void criterion_upper_bound() {
    Timer timer;
    const Scenario scenario = make_scenario(2, 1.0, 1.0);
    const CheckOutcome outcome = check_upper_bound(scenario, 1000, 20250808);
    record("criterion 4: random-menu upper-bound certification", outcome.pass, outcome.detail,
           timer.seconds(), 60.0);
}

void criterion_kkt() {
    Timer timer;
    const Scenario scenario = make_scenario(2, 1.0, 1.0);
    const CheckOutcome outcome = check_kkt_residuals(scenario, 10000, 100, 1000, 55);
    record("criterion 5: water-filling KKT and perturbation dominance", outcome.pass,
           outcome.detail, timer.seconds(), 30.0);
}

void criterion_derandomization() {
    Timer timer;
    const Scenario scenario = make_scenario(2, 1.0, 1.0);
    const CheckOutcome outcome = check_derandomization(scenario, 1000, 66);
    record("criterion 6: derandomization preserves utilities and cuts cost", outcome.pass,
           outcome.detail, timer.seconds(), 30.0);
}

void criterion_pushforward() {
    Timer timer;
    bool pass = true;
    double worst = 0.0;
    std::string detail;
    for (int K : {2, 3}) {
        const CheckOutcome outcome = check_pushforward(K, 1000, 700 + K);
        worst = std::max(worst, outcome.worst);
        if (!outcome.pass) {
            pass = false;
            detail = outcome.detail;
        }
    }
    if (detail.empty()) detail = "2000 distributions, max mean drift " + format_real(worst);
    record("criterion 7: diagonal projection preserves the demand-sum law", pass, detail,
           timer.seconds(), 30.0);
}

void criterion_efficiency() {
    Timer timer;
    const Scenario scenario = make_scenario(2, 1.0, 1.0);
    const CheckOutcome outcome = check_efficiency(scenario, 10000, 88);
    record("criterion 8: overage consumption is socially efficient", outcome.pass,
           outcome.detail, timer.seconds(), 30.0);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-rcp-cli>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "rcp_acceptance";
    std::filesystem::create_directories(dir);

    criterion_closed_form(cli, dir);
    criterion_profit_identity();
    criterion_adversary();
    criterion_upper_bound();
    criterion_kkt();
    criterion_derandomization();
    criterion_pushforward();
    criterion_efficiency();

    std::error_code ec;
    std::filesystem::remove_all(dir, ec);

    int failed = 0;
    for (const CriterionResult& result : g_results) {
        if (!result.pass) ++failed;
        std::ostringstream line;
        line << (result.pass ? "[PASS] " : "[FAIL] ") << result.label << ": " << result.detail
             << " (" << format_real(result.seconds) << "s)";
        std::cout << line.str() << "\n";
    }
    std::cout << "acceptance: " << (g_results.size() - std::size_t(failed)) << "/"
              << g_results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
