// rcp: solve, simulate and certify committed-spend pricing under demand
// uncertainty known only through the mean total demand.
#include "rcp/cli.hpp"
#include "rcp/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct GlobalOptions {
    std::string config_path;
    std::vector<double> theta;
    std::optional<std::uint64_t> seed;
    std::string format;
    std::string out_path;
    std::string sweep_param;
    std::vector<double> sweep_values;
    double sweep_from = 0.0;
    double sweep_to = 0.0;
    int sweep_steps = 0;
};

void apply_overrides(rcp::RunConfig& config, const GlobalOptions& options) {
    if (options.seed) config.verify.seed = *options.seed;
    if (!options.format.empty()) {
        if (options.format != "table" && options.format != "csv")
            throw rcp::ConfigError("--format must be table or csv");
        config.output.format = options.format;
    }
    if (!options.out_path.empty()) config.output.path = options.out_path;
}

std::vector<double> sweep_values(const GlobalOptions& options) {
    if (!options.sweep_values.empty()) return options.sweep_values;
    if (options.sweep_steps > 1) {
        std::vector<double> values;
        values.reserve(std::size_t(options.sweep_steps));
        for (int i = 0; i < options.sweep_steps; ++i)
            values.push_back(options.sweep_from + (options.sweep_to - options.sweep_from) *
                                                      double(i) /
                                                      double(options.sweep_steps - 1));
        return values;
    }
    throw rcp::ConfigError("sweep needs --values or --from/--to/--steps");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust committed-spend pricing toolkit"};
    app.require_subcommand(1);

    GlobalOptions options;

    const auto add_common = [&options](CLI::App* cmd) {
        cmd->add_option("--config", options.config_path, "config file path")->required();
        cmd->add_option("--seed", options.seed, "seed override for randomized checks");
        cmd->add_option("--format", options.format, "output format: table|csv");
        cmd->add_option("--out", options.out_path, "write output to this file");
    };

    CLI::App* solve = app.add_subcommand("solve", "optimal contract and guarantee");
    add_common(solve);

    CLI::App* respond = app.add_subcommand("respond", "buyer response at a demand type");
    add_common(respond);
    respond->add_option("--theta", options.theta, "demand components v1,v2,...")
        ->required()
        ->delimiter(',');

    CLI::App* worst = app.add_subcommand("worst-case", "worst-case profit of the mechanism");
    add_common(worst);

    CLI::App* compare = app.add_subcommand("compare", "rank mechanisms by guarantee");
    add_common(compare);

    CLI::App* sweep = app.add_subcommand("sweep", "guarantee across a parameter range");
    add_common(sweep);
    sweep->add_option("--param", options.sweep_param, "parameter: lambda|c")->required();
    sweep->add_option("--values", options.sweep_values, "explicit values v1,v2,...")
        ->delimiter(',');
    sweep->add_option("--from", options.sweep_from, "range start");
    sweep->add_option("--to", options.sweep_to, "range end");
    sweep->add_option("--steps", options.sweep_steps, "number of range points");

    CLI::App* verify = app.add_subcommand("verify", "run the invariant suite");
    add_common(verify);

    CLI11_PARSE(app, argc, argv);

    try {
        rcp::RunConfig config = rcp::load_config(options.config_path);
        apply_overrides(config, options);

        std::ofstream file;
        if (!config.output.path.empty()) {
            file.open(config.output.path);
            if (!file)
                throw rcp::ConfigError("cannot open output file '" + config.output.path + "'");
        }
        std::ostream& out = file.is_open() ? file : std::cout;

        if (solve->parsed()) return rcp::cmd_solve(config, out);
        if (respond->parsed()) return rcp::cmd_respond(config, options.theta, out);
        if (worst->parsed()) return rcp::cmd_worst_case(config, out);
        if (compare->parsed()) return rcp::cmd_compare(config, out);
        if (sweep->parsed())
            return rcp::cmd_sweep(config, options.sweep_param, sweep_values(options), out);
        if (verify->parsed()) return rcp::cmd_verify(config, out);
        std::cerr << "error: no command\n";
        return rcp::kExitValidation;
    } catch (const rcp::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return rcp::kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rcp::kExitValidation;
    }
}
