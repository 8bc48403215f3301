#include "rcp/verify.hpp"

#include "rcp/report.hpp"
#include "rcp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rcp {

namespace {

// Grids beyond this size are skipped by the quadratic two-point route during
// method agreement; the envelope route has no such budget.
constexpr std::size_t kTwoPointGridBudget = 20'000;

double rel_err(double actual, double expected) {
    const double scale = std::max(1e-300, std::fabs(expected));
    return std::fabs(actual - expected) / scale;
}

std::string format_type(const TypeVector& type) {
    std::string out = "(";
    for (std::size_t i = 0; i < type.dimension(); ++i) {
        if (i > 0) out += ", ";
        out += format_real(type[i]);
    }
    out += ")";
    return out;
}

TypeVector random_type(Rng& rng, std::size_t dim) {
    std::vector<double> components(dim);
    for (double& c : components) {
        c = rng.uniform();
        if (rng.uniform() < 0.1) c = 0.0; // exercise the zero-demand branches
    }
    return TypeVector(std::move(components));
}

double committed_objective(const CommittedSpendContract& contract, const TypeVector& type,
                           const UtilityFunction& u, std::span<const double> allocation) {
    double total = 0.0;
    double value = 0.0;
    for (std::size_t i = 0; i < allocation.size(); ++i) {
        total += allocation[i];
        if (type[i] > 0.0) value += type[i] * u.value(allocation[i]);
    }
    return value - contract.committed_payment -
           contract.overage_price * (total - contract.committed_quantity);
}

} // namespace

CheckOutcome check_utility_roundtrips(const Scenario& scenario, int samples,
                                      std::uint64_t seed) {
    CheckOutcome outcome;
    outcome.name = "utility_roundtrips";
    Rng rng(seed);

    std::vector<UtilityFunction> functions = {scenario.utility};
    for (int i = 0; i < 3; ++i)
        functions.push_back(
            UtilityFunction::scaled_power(rng.uniform(0.5, 4.0), rng.uniform(0.1, 0.9)));

    double worst = 0.0;
    bool pass = true;
    for (int s = 0; s < samples && pass; ++s) {
        const UtilityFunction& u = functions[std::size_t(s) % functions.size()];
        const double q = std::pow(10.0, rng.uniform(-3.0, 3.0));

        const double round_marginal = rel_err(u.marginal_inverse(u.marginal(q)), q);
        const double round_value = rel_err(u.inverse(u.value(q)), q);
        worst = std::max({worst, round_marginal, round_value});
        if (round_marginal > 1e-10 || round_value > 1e-10) pass = false;

        const double h = 1e-6 * q;
        const double central = (u.value(q + h) - u.value(q - h)) / (2.0 * h);
        if (rel_err(central, u.marginal(q)) > 1e-6) pass = false;

        if (rel_err(marginal_inverse_bisect(u, u.marginal(q)), q) > 1e-9) pass = false;

        const double q2 = q * std::pow(10.0, rng.uniform(0.1, 1.0));
        if (!(u.value(q2) > u.value(q)) || !(u.marginal(q2) < u.marginal(q))) pass = false;

        outcome.checks += 5;

        if (s % 10 == 0) {
            const int outcomes = int(rng.uniform_int(2, 4));
            std::vector<std::pair<double, double>> lottery(static_cast<std::size_t>(outcomes));
            double total_w = 0.0;
            for (auto& [quantity, weight] : lottery) {
                quantity = rng.uniform(0.0, 4.0);
                weight = rng.uniform(0.05, 1.0);
                total_w += weight;
            }
            double mean_quantity = 0.0;
            for (auto& [quantity, weight] : lottery) {
                weight /= total_w;
                mean_quantity += weight * quantity;
            }
            if (certainty_equivalent(u, lottery) > mean_quantity + 1e-12) pass = false;
            const std::pair<double, double> degenerate[] = {{q, 1.0}};
            if (rel_err(certainty_equivalent(u, degenerate), q) > 1e-12) pass = false;
            outcome.checks += 2;
        }
    }
    outcome.pass = pass;
    outcome.worst = worst;
    outcome.detail = "max round-trip rel err " + format_real(worst);
    return outcome;
}

CheckOutcome check_kkt_residuals(const Scenario& scenario, int samples, int perturb_cases,
                                 int perturbations, std::uint64_t seed) {
    CheckOutcome outcome;
    outcome.name = "kkt_residuals";
    Rng rng(seed);
    const UtilityFunction& u = scenario.utility;
    const std::size_t dim = std::size_t(scenario.num_services);
    const CommittedSpendContract reference = optimal_contract(scenario);

    double worst_residual = 0.0;
    double worst_gain = -std::numeric_limits<double>::infinity();
    bool pass = true;
    for (int s = 0; s < samples && pass; ++s) {
        CommittedSpendContract contract;
        contract.committed_quantity = rng.uniform(0.0, 2.0 * reference.committed_quantity);
        contract.committed_payment = rng.uniform(0.0, 2.0 * reference.committed_payment);
        contract.overage_price = rng.uniform(0.25, 4.0) * scenario.unit_cost;
        const TypeVector type = random_type(rng, dim);

        const BuyerResponse response = buyer_response_committed(contract, type, u);
        const double mu = *response.shadow_price;

        // tolerances scale with the contract so huge-quantity regimes are
        // judged at the same relative precision as unit-scale ones
        const double quantity_scale = std::max(1.0, contract.committed_quantity);
        if (response.total_quantity() <
            contract.committed_quantity - 1e-9 * quantity_scale) {
            pass = false;
            outcome.detail = "commitment shortfall at theta=" + format_type(type);
        }
        if (response.floor_binding) {
            if (mu > contract.overage_price * (1.0 + 1e-12)) pass = false;
        } else if (mu != contract.overage_price) {
            pass = false;
        }

        bool all_zero = true;
        for (std::size_t i = 0; i < dim; ++i)
            if (type[i] > 0.0) all_zero = false;
        for (std::size_t i = 0; i < dim; ++i) {
            if (type[i] > 0.0) {
                const double residual =
                    std::fabs(type[i] * u.marginal(response.allocation[i]) - mu);
                worst_residual = std::max(worst_residual, residual / mu);
                if (residual > 1e-8 * mu) {
                    pass = false;
                    outcome.detail = "stationarity residual " + format_real(residual / mu) +
                                     " at theta=" + format_type(type);
                }
            } else if (!all_zero && response.allocation[i] != 0.0) {
                pass = false;
            }
        }
        outcome.checks += long(dim) + 2;

        if (s < perturb_cases) {
            const double base = committed_objective(contract, type, u, response.allocation);
            const double gain_tol =
                1e-9 * std::max({1.0,
                                 contract.overage_price * contract.committed_quantity +
                                     contract.committed_payment,
                                 std::fabs(base)});
            for (int k = 0; k < perturbations; ++k) {
                std::vector<double> candidate(dim);
                if (k % 2 == 0) {
                    for (std::size_t i = 0; i < dim; ++i)
                        candidate[i] = std::max(
                            0.0, response.allocation[i] +
                                     rng.uniform(-0.2, 0.2) *
                                         std::max(response.allocation[i], 0.1));
                } else {
                    for (std::size_t i = 0; i < dim; ++i)
                        candidate[i] =
                            rng.uniform(0.0, 2.0 * std::max(contract.committed_quantity, 0.5));
                }
                double total = 0.0;
                for (double q : candidate) total += q;
                if (total < contract.committed_quantity) {
                    if (total <= 0.0) {
                        for (double& q : candidate)
                            q = contract.committed_quantity / double(dim);
                    } else {
                        const double scale_up = contract.committed_quantity / total;
                        for (double& q : candidate) q *= scale_up;
                    }
                }
                const double gain =
                    committed_objective(contract, type, u, candidate) - base;
                worst_gain = std::max(worst_gain, gain);
                if (gain > gain_tol) {
                    pass = false;
                    outcome.detail = "perturbation beats response by " + format_real(gain) +
                                     " at theta=" + format_type(type);
                }
            }
            outcome.checks += perturbations;
        }
    }
    outcome.pass = pass;
    outcome.worst = worst_residual;
    if (outcome.detail.empty())
        outcome.detail = "max stationarity rel residual " + format_real(worst_residual) +
                         ", best perturbation gain " + format_real(worst_gain);
    return outcome;
}

CheckOutcome check_derandomization(const Scenario& scenario, int mechanisms,
                                   std::uint64_t seed) {
    CheckOutcome outcome;
    outcome.name = "derandomization_dominance";
    Rng rng(seed);
    const UtilityFunction& u = scenario.utility;
    const std::size_t dim = std::size_t(scenario.num_services);

    double worst_utility_drift = 0.0;
    bool pass = true;
    for (int m = 0; m < mechanisms && pass; ++m) {
        std::vector<TypeVector> grid;
        for (int t = 0; t < 5; ++t) grid.push_back(random_type(rng, dim));

        RandomMechanism random_mechanism;
        for (int t = 0; t < 5; ++t) {
            AllocationLottery lottery;
            const int outcomes = int(rng.uniform_int(1, 4));
            double total_w = 0.0;
            for (int k = 0; k < outcomes; ++k) {
                MenuOption option;
                option.allocation.resize(dim);
                for (double& q : option.allocation) q = rng.uniform(0.0, 2.0);
                option.transfer = rng.uniform(0.0, 2.0);
                lottery.outcomes.push_back(std::move(option));
                lottery.weights.push_back(rng.uniform(0.05, 1.0));
                total_w += lottery.weights.back();
            }
            for (double& w : lottery.weights) w /= total_w;
            random_mechanism.per_type.push_back(std::move(lottery));
        }

        const DeterministicAssignment assignment = derandomize(random_mechanism, grid, u);

        for (std::size_t t = 0; t < grid.size(); ++t) {
            for (std::size_t r = 0; r < grid.size(); ++r) {
                const AllocationLottery& lottery = random_mechanism.per_type[r];
                double expected_utility = 0.0;
                for (std::size_t k = 0; k < lottery.outcomes.size(); ++k) {
                    double v = -lottery.outcomes[k].transfer;
                    for (std::size_t i = 0; i < dim; ++i)
                        if (grid[t][i] > 0.0)
                            v += grid[t][i] * u.value(lottery.outcomes[k].allocation[i]);
                    expected_utility += lottery.weights[k] * v;
                }
                double deterministic_utility = -assignment.per_type[r].transfer;
                for (std::size_t i = 0; i < dim; ++i)
                    if (grid[t][i] > 0.0)
                        deterministic_utility +=
                            grid[t][i] * u.value(assignment.per_type[r].allocation[i]);
                const double drift = std::fabs(deterministic_utility - expected_utility);
                worst_utility_drift = std::max(worst_utility_drift, drift);
                if (drift > 1e-10) {
                    pass = false;
                    outcome.detail = "interim utility drift " + format_real(drift) +
                                     " at type " + format_type(grid[t]);
                }
                ++outcome.checks;
            }
            const AllocationLottery& lottery = random_mechanism.per_type[t];
            double expected_total = 0.0;
            for (std::size_t k = 0; k < lottery.outcomes.size(); ++k)
                for (double q : lottery.outcomes[k].allocation)
                    expected_total += lottery.weights[k] * q;
            double deterministic_total = 0.0;
            for (double q : assignment.per_type[t].allocation) deterministic_total += q;
            if (deterministic_total > expected_total + 1e-12) {
                pass = false;
                outcome.detail = "allocation grew by " +
                                 format_real(deterministic_total - expected_total) +
                                 " at type " + format_type(grid[t]);
            }
            ++outcome.checks;
        }
    }
    outcome.pass = pass;
    outcome.worst = worst_utility_drift;
    if (outcome.detail.empty())
        outcome.detail = "max interim utility drift " + format_real(worst_utility_drift);
    return outcome;
}

CheckOutcome check_pushforward(int dimension, int samples, std::uint64_t seed) {
    CheckOutcome outcome;
    outcome.name = "pushforward_preservation";
    Rng rng(seed);
    const std::size_t dim = std::size_t(dimension);

    // mass of {demand sum <= s} at each distinct support sum
    const auto sum_cdf = [](const DiscreteDistribution& F) {
        std::vector<std::pair<double, double>> atoms;
        for (std::size_t i = 0; i < F.size(); ++i)
            atoms.emplace_back(F.point(i).sum(), F.weight(i));
        std::sort(atoms.begin(), atoms.end());
        std::vector<std::pair<double, double>> cdf;
        double running = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            running += atoms[i].second;
            if (i + 1 == atoms.size() || atoms[i + 1].first - atoms[i].first > 1e-12)
                cdf.emplace_back(atoms[i].first, running);
        }
        return cdf;
    };

    double worst_drift = 0.0;
    bool pass = true;
    for (int s = 0; s < samples && pass; ++s) {
        const int support_size = int(rng.uniform_int(1, 12));
        std::vector<TypeVector> support;
        std::vector<double> weights;
        double total_w = 0.0;
        for (int i = 0; i < support_size; ++i) {
            std::vector<double> components(dim);
            for (double& c : components) c = rng.uniform();
            support.emplace_back(std::move(components));
            weights.push_back(rng.uniform(0.01, 1.0));
            total_w += weights.back();
        }
        for (double& w : weights) w /= total_w;
        const DiscreteDistribution F(std::move(support), std::move(weights));

        const DiscreteDistribution G = diagonal_pushforward(F);

        const double mean_drift = std::fabs(mean_sum(G) - mean_sum(F));
        worst_drift = std::max(worst_drift, mean_drift);
        if (mean_drift > 1e-12) {
            pass = false;
            outcome.detail = "mean drift " + format_real(mean_drift);
        }

        const auto cdf_f = sum_cdf(F);
        const auto cdf_g = sum_cdf(G);
        if (cdf_f.size() != cdf_g.size()) {
            pass = false;
            outcome.detail = "sum support size changed";
        } else {
            for (std::size_t i = 0; i < cdf_f.size(); ++i) {
                if (std::fabs(cdf_f[i].first - cdf_g[i].first) > 2e-12 ||
                    std::fabs(cdf_f[i].second - cdf_g[i].second) > 1e-12) {
                    pass = false;
                    outcome.detail = "event mass mismatch at sum " + format_real(cdf_f[i].first);
                    break;
                }
            }
        }

        const DiscreteDistribution H = diagonal_pushforward(G);
        if (H.size() != G.size()) {
            pass = false;
            outcome.detail = "not idempotent (support size changed)";
        } else {
            for (std::size_t i = 0; i < G.size(); ++i) {
                if (std::fabs(H.weight(i) - G.weight(i)) > 1e-12 ||
                    std::fabs(H.point(i)[0] - G.point(i)[0]) > 1e-12) {
                    pass = false;
                    outcome.detail = "not idempotent at atom " + std::to_string(i);
                    break;
                }
            }
        }
        outcome.checks += 3;
    }
    outcome.pass = pass;
    outcome.worst = worst_drift;
    if (outcome.detail.empty())
        outcome.detail = "K=" + std::to_string(dimension) + ", max mean drift " +
                         format_real(worst_drift);
    return outcome;
}

CheckOutcome check_profit_identity(const Scenario& scenario,
                                   const CommittedSpendContract& contract, int samples,
                                   std::uint64_t seed) {
    CheckOutcome outcome;
    outcome.name = "profit_identity";
    Rng rng(seed);
    const double guarantee = guarantee_value(scenario);
    const double tol = 1e-9 * std::max(1.0, std::fabs(guarantee));
    const Mechanism mechanism = contract;

    double worst = 0.0;
    bool pass = true;
    for (int s = 0; s < samples; ++s) {
        const TypeVector type = random_type(rng, std::size_t(scenario.num_services));
        const double profit = seller_profit(mechanism, type, scenario);
        const double err = std::fabs(profit - guarantee);
        if (err > worst) {
            worst = err;
            if (err > tol && pass) {
                pass = false;
                outcome.detail = "witness theta=" + format_type(type) + " profit=" +
                                 format_real(profit) + " guarantee=" + format_real(guarantee);
            }
        }
        ++outcome.checks;
    }
    outcome.pass = pass;
    outcome.worst = worst;
    if (outcome.detail.empty()) outcome.detail = "max abs err " + format_real(worst);
    return outcome;
}

CheckOutcome check_method_agreement(const Scenario& scenario,
                                    std::span<const Mechanism> mechanisms,
                                    std::span<const int> levels, std::size_t cap) {
    CheckOutcome outcome;
    outcome.name = "method_agreement";

    double worst_delta = 0.0;
    int skipped = 0;
    bool pass = true;
    for (int level : levels) {
        const std::vector<TypeVector> grid = adversary_grid(scenario, level, cap);
        if (grid.size() > kTwoPointGridBudget) {
            ++skipped;
            continue;
        }
        for (const Mechanism& mechanism : mechanisms) {
            const ProfitReport two_point =
                worst_case_profit(mechanism, scenario, grid, WorstCaseMethod::TwoPointSearch);
            const ProfitReport envelope =
                worst_case_profit(mechanism, scenario, grid, WorstCaseMethod::GridLP);
            const double delta = std::fabs(two_point.guarantee - envelope.guarantee);
            const double scale = std::max(
                {1.0, std::fabs(two_point.guarantee), std::fabs(envelope.guarantee)});
            worst_delta = std::max(worst_delta, delta);
            if (delta > 1e-8 * scale) {
                pass = false;
                outcome.detail = "methods differ by " + format_real(delta) + " on " +
                                 two_point.mechanism + " at level " + std::to_string(level);
            }
            for (const ProfitReport* report : {&two_point, &envelope}) {
                const double attained =
                    expected_profit(mechanism, report->worst_distribution, scenario);
                if (std::fabs(attained - report->guarantee) > 1e-9 * scale ||
                    !validate_in_F(report->worst_distribution, scenario, 1e-9)) {
                    pass = false;
                    outcome.detail = "worst distribution fails to reproduce the guarantee on " +
                                     report->mechanism;
                }
            }
            ++outcome.checks;
        }
    }
    outcome.pass = pass;
    outcome.worst = worst_delta;
    if (outcome.detail.empty()) {
        outcome.detail = "max |two_point - grid_lp| " + format_real(worst_delta);
        if (skipped > 0)
            outcome.detail += " (" + std::to_string(skipped) +
                              " levels beyond the two-point grid budget skipped)";
    }
    return outcome;
}

CheckOutcome check_upper_bound(const Scenario& scenario, int n_menus, std::uint64_t seed) {
    CheckOutcome outcome;
    outcome.name = "upper_bound_certification";
    const MenuCertification certification = certify_upper_bound(scenario, n_menus, seed);
    outcome.pass = certification.ok();
    outcome.checks = certification.menus_checked;
    outcome.worst = certification.max_excess;
    if (outcome.pass) {
        outcome.detail = "max worst-case excess over guarantee " +
                         format_real(certification.max_excess);
    } else {
        outcome.detail = std::to_string(certification.violations) +
                         " violations; witness menu worst_case=" +
                         format_real(certification.witness_worst_case) +
                         " diagonal_profit=" + format_real(certification.witness_diagonal_profit) +
                         " guarantee=" + format_real(guarantee_value(scenario));
    }
    return outcome;
}

CheckOutcome check_efficiency(const Scenario& scenario, int samples, std::uint64_t seed) {
    CheckOutcome outcome;
    outcome.name = "efficiency";
    Rng rng(seed);
    const CommittedSpendContract contract = optimal_contract(scenario);
    const UtilityFunction& u = scenario.utility;
    const double c = scenario.unit_cost;

    double worst = 0.0;
    long unconstrained = 0;
    bool pass = true;
    for (int s = 0; s < samples; ++s) {
        const TypeVector type = random_type(rng, std::size_t(scenario.num_services));
        const BuyerResponse response = buyer_response_committed(contract, type, u);
        ++outcome.checks;
        if (response.floor_binding) continue;
        ++unconstrained;
        for (std::size_t i = 0; i < type.dimension(); ++i) {
            const double efficient = type[i] > 0.0 ? u.marginal_inverse(c / type[i]) : 0.0;
            const double err = std::fabs(response.allocation[i] - efficient);
            worst = std::max(worst, err);
            if (err > 1e-9 * std::max(1.0, efficient) && pass) {
                pass = false;
                outcome.detail = "inefficient allocation at theta=" + format_type(type);
            }
        }
    }
    outcome.pass = pass;
    outcome.worst = worst;
    if (outcome.detail.empty())
        outcome.detail = std::to_string(unconstrained) + "/" + std::to_string(samples) +
                         " responses above the floor, max deviation " + format_real(worst);
    return outcome;
}

CheckOutcome check_ir_slack(const RunConfig& config) {
    CheckOutcome outcome;
    outcome.name = "ir_slack";
    const Scenario& scenario = config.scenario;

    std::vector<Mechanism> mechanisms = config.mechanisms;
    if (mechanisms.empty()) {
        mechanisms.emplace_back(optimal_contract(scenario));
        mechanisms.emplace_back(optimal_constant(scenario));
    }
    std::vector<DiscreteDistribution> distributions;
    if (config.distribution) {
        distributions.push_back(*config.distribution);
    } else {
        distributions.push_back(diagonal_dirac(scenario));
        distributions.push_back(two_point(scenario, 0.0, 1.0));
        distributions.push_back(diagonal_grid(scenario, 5));
    }

    double min_slack = std::numeric_limits<double>::infinity();
    bool pass = true;
    for (const Mechanism& mechanism : mechanisms) {
        for (const DiscreteDistribution& F : distributions) {
            const IrCheckReport report = check_ir(mechanism, F, scenario);
            min_slack = std::min(min_slack, report.slack);
            if (!report.ok) {
                pass = false;
                outcome.detail = "IR violated by " + describe(mechanism) + " (slack " +
                                 format_real(report.slack) + ")";
            }
            ++outcome.checks;
        }
    }
    outcome.pass = pass;
    outcome.worst = min_slack;
    if (outcome.detail.empty()) outcome.detail = "min slack " + format_real(min_slack);
    return outcome;
}

std::vector<CheckOutcome> run_verification(const RunConfig& config) {
    const Scenario& scenario = config.scenario;
    const std::uint64_t seed = config.verify.seed;
    const int samples = config.verify.samples;

    CommittedSpendContract identity_contract = optimal_contract(scenario);
    for (const Mechanism& mechanism : config.mechanisms)
        if (const auto* contract = std::get_if<CommittedSpendContract>(&mechanism)) {
            identity_contract = *contract;
            break;
        }

    std::vector<Mechanism> agreement_mechanisms = config.mechanisms;
    agreement_mechanisms.emplace_back(optimal_contract(scenario));
    agreement_mechanisms.emplace_back(optimal_constant(scenario));
    for (double factor : {1.5, 2.0, 4.0})
        agreement_mechanisms.emplace_back(LinearTariff{factor * scenario.unit_cost});

    std::vector<CheckOutcome> outcomes;
    outcomes.push_back(check_utility_roundtrips(scenario, samples, seed + 1));
    outcomes.push_back(check_kkt_residuals(scenario, samples, std::min(100, samples), 1000,
                                           seed + 2));
    outcomes.push_back(check_derandomization(scenario, std::min(1000, samples), seed + 3));
    {
        // projection properties are dimension-specific, not scenario-specific
        CheckOutcome k2 = check_pushforward(2, std::min(1000, samples), seed + 4);
        const CheckOutcome k3 = check_pushforward(3, std::min(1000, samples), seed + 5);
        k2.pass = k2.pass && k3.pass;
        k2.checks += k3.checks;
        k2.worst = std::max(k2.worst, k3.worst);
        k2.detail = k3.pass ? "K=2,3, max mean drift " + format_real(k2.worst) : k3.detail;
        outcomes.push_back(std::move(k2));
    }
    outcomes.push_back(check_profit_identity(scenario, identity_contract, samples, seed + 6));
    outcomes.push_back(check_method_agreement(scenario, agreement_mechanisms,
                                              config.adversary.levels, config.adversary.cap));
    outcomes.push_back(check_upper_bound(scenario, config.verify.n_menus, seed + 7));
    outcomes.push_back(check_efficiency(scenario, samples, seed + 8));
    outcomes.push_back(check_ir_slack(config));
    return outcomes;
}

} // namespace rcp
