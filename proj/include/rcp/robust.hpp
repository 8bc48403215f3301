// Closed-form robustly optimal contracts, worst-case expected profit over the
// mean-constrained distribution set, and the random-menu upper-bound
// certification.
#pragma once

#include "rcp/distribution.hpp"
#include "rcp/mechanism.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rcp {

enum class WorstCaseMethod {
    TwoPointSearch, // exhaustive search over one- and two-atom supports
    GridLP,         // lower convex envelope of profit binned by demand sum
    Analytic,       // profit constant in the type; no search needed
};

const char* method_name(WorstCaseMethod method);

// Worst-case evaluation result. The guarantee always reproduces as
// expected_profit(mechanism, worst_distribution) within 1e-9.
struct ProfitReport {
    std::string mechanism;
    double guarantee = 0.0;
    DiscreteDistribution worst_distribution;
    WorstCaseMethod method = WorstCaseMethod::TwoPointSearch;
    std::size_t grid_points = 0;
    std::optional<double> refinement_delta;
};

// Constant bundle that is robustly optimal: q* = u'^{-1}(cK / lambda) of each
// service against the transfer lambda * u(q*).
ConstantBundle optimal_constant(const Scenario& scenario);

// Robustly optimal committed-spend contract: commitment K * q*, payment
// lambda * u(q*), overage priced at cost.
CommittedSpendContract optimal_contract(const Scenario& scenario);

// Profit guarantee of the optimal mechanisms: lambda * u(q*) - c K q*.
// Strictly positive on every valid scenario.
double guarantee_value(const Scenario& scenario);

// Profit when it is constant across types (committed spend priced at cost,
// constant bundles, marginal-cost linear tariffs); nullopt otherwise.
std::optional<double> constant_profit_value(const Mechanism& mechanism,
                                            const Scenario& scenario);

// Worst-case report without any grid, available only when the profit is
// provably constant in the type.
std::optional<ProfitReport> analytic_worst_case(const Mechanism& mechanism,
                                                const Scenario& scenario);

/**
 * Minimizes expected profit over distributions supported on the grid whose
 * mean total demand equals the scenario's: a linear program with two equality
 * constraints, so some optimum has at most two atoms.
 *
 * TwoPointSearch enumerates every feasible single atom and every straddling
 * pair with the weights solved from the moment constraint. GridLP bins the
 * per-type profit by demand sum, takes the bin minima, and evaluates the
 * lower convex envelope at the target mean. The two routes solve the same
 * program and must agree within 1e-8.
 *
 * The grid must contain sums on both sides of the target mean (or one equal
 * to it); otherwise the program is infeasible and a ConfigError is thrown.
 */
ProfitReport worst_case_profit(const Mechanism& mechanism, const Scenario& scenario,
                               std::span<const TypeVector> grid,
                               WorstCaseMethod method = WorstCaseMethod::TwoPointSearch);

// Product lattice sized so the demand sum takes about sum_points distinct
// values: points per dimension = ceil((sum_points - 1) / K) + 1.
std::vector<TypeVector> adversary_grid(const Scenario& scenario, int sum_points,
                                       std::size_t cap = 1'000'000);

// One report per resolution level, each with the change in guarantee from the
// previous level.
std::vector<ProfitReport> worst_case_refinement(const Mechanism& mechanism,
                                                const Scenario& scenario,
                                                std::span<const int> sum_levels,
                                                WorstCaseMethod method,
                                                std::size_t cap = 1'000'000);

// Outcome of the random-menu certification. A violation is a menu whose
// worst-case profit exceeds the scenario's guarantee by more than 1e-8, or
// one that breaks the chain worst case <= profit at the diagonal point mass.
struct MenuCertification {
    int menus_checked = 0;
    std::uint64_t seed = 0;
    int violations = 0;
    double max_excess = 0.0; // max over menus of worst case minus guarantee
    std::optional<FiniteMenu> witness_menu;
    double witness_worst_case = 0.0;
    double witness_diagonal_profit = 0.0;

    bool ok() const { return violations == 0; }
};

/**
 * Samples random finite menus (up to 8 options, allocations up to four times
 * the optimal commitment), shifts each menu's transfers so the diagonal mean
 * type is exactly willing to participate, and checks the bound chain
 *
 *   worst-case profit <= profit at the diagonal point mass
 *                     <= guarantee_value + 1e-8.
 *
 * The adversary grid always contains the diagonal mean type, so the first
 * inequality is a feasibility fact and any failure indicates a solver bug.
 */
MenuCertification certify_upper_bound(const Scenario& scenario, int n_menus,
                                      std::uint64_t seed, int points_per_dim = 0);

} // namespace rcp
