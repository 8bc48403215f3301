#include "rcp/robust.hpp"

#include "rcp/errors.hpp"
#include "rcp/parallel.hpp"
#include "rcp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace rcp {

namespace {

constexpr double kSumMergeTol = 1e-12;

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// Per-point profit across the grid, evaluated in parallel.
std::vector<double> profile(const Mechanism& mechanism, const Scenario& scenario,
                            std::span<const TypeVector> grid) {
    std::vector<double> profits(grid.size());
    std::exception_ptr failure;
    std::mutex failure_mutex;
    parallel_for(grid.size(), [&](std::size_t i) {
        try {
            profits[i] = seller_profit(mechanism, grid[i], scenario);
        } catch (...) {
            std::scoped_lock lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);
    return profits;
}

struct Candidate {
    double value = 0.0;
    std::size_t first = 0;
    std::size_t second = 0;
    double first_weight = 1.0;
    bool pair = false;
    bool valid = false;
};

DiscreteDistribution candidate_distribution(const Candidate& best,
                                            std::span<const TypeVector> grid) {
    if (!best.pair || best.first_weight >= 1.0 - 1e-15)
        return DiscreteDistribution({grid[best.first]}, {1.0});
    if (best.first_weight <= 1e-15)
        return DiscreteDistribution({grid[best.second]}, {1.0});
    return DiscreteDistribution({grid[best.first], grid[best.second]},
                                {best.first_weight, 1.0 - best.first_weight});
}

void check_feasible(double min_sum, double max_sum, double target) {
    if (min_sum > target + kSumMergeTol || max_sum < target - kSumMergeTol)
        throw ConfigError(
            "adversary grid infeasible: every demand sum lies on one side of lambda = " +
            std::to_string(target) + " (grid sums span [" + std::to_string(min_sum) + ", " +
            std::to_string(max_sum) + "]); use a grid whose sums straddle lambda");
}

Candidate two_point_search(std::span<const double> sums, std::span<const double> profits,
                           double target) {
    Candidate best;

    // single atoms whose sum already matches the target mean
    const double atom_tol = kSumMergeTol * std::max(1.0, std::fabs(target));
    for (std::size_t i = 0; i < sums.size(); ++i) {
        if (!near(sums[i], target, atom_tol)) continue;
        if (!best.valid || profits[i] < best.value) {
            best = Candidate{profits[i], i, i, 1.0, false, true};
        }
    }

    std::vector<std::size_t> lower, upper;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        if (sums[i] <= target) lower.push_back(i);
        if (sums[i] >= target) upper.push_back(i);
    }

    for (std::size_t i : lower) {
        const double s_lo = sums[i];
        const double pi_lo = profits[i];
        for (std::size_t j : upper) {
            const double width = sums[j] - s_lo;
            if (width <= 1e-15) continue;
            const double w = (sums[j] - target) / width;
            const double value = pi_lo * w + profits[j] * (1.0 - w);
            if (!best.valid || value < best.value) {
                best = Candidate{value, i, j, w, true, true};
            }
        }
    }
    return best;
}

Candidate envelope_search(std::span<const double> sums, std::span<const double> profits,
                          double target) {
    // bin the grid by demand sum; only the cheapest point per sum matters
    std::vector<std::size_t> order(sums.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return sums[a] < sums[b]; });

    struct Bin {
        double sum;
        double profit;
        std::size_t point;
    };
    std::vector<Bin> bins;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        Bin bin{sums[order[i]], profits[order[i]], order[i]};
        while (j + 1 < order.size() && sums[order[j + 1]] - sums[order[j]] <= kSumMergeTol) {
            ++j;
            if (profits[order[j]] < bin.profit) {
                bin.profit = profits[order[j]];
                bin.point = order[j];
            }
        }
        bins.push_back(bin);
        i = j + 1;
    }

    // lower convex hull over (sum, profit)
    std::vector<const Bin*> hull;
    for (const Bin& bin : bins) {
        while (hull.size() >= 2) {
            const Bin* a = hull[hull.size() - 2];
            const Bin* b = hull[hull.size() - 1];
            const double cross = (b->sum - a->sum) * (bin.profit - a->profit) -
                                 (b->profit - a->profit) * (bin.sum - a->sum);
            if (cross <= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(&bin);
    }

    const double vertex_tol = kSumMergeTol * std::max(1.0, std::fabs(target));
    for (const Bin* bin : hull)
        if (near(bin->sum, target, vertex_tol))
            return Candidate{bin->profit, bin->point, bin->point, 1.0, false, true};

    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        const Bin* a = hull[k];
        const Bin* b = hull[k + 1];
        if (a->sum <= target && target <= b->sum) {
            const double w = (b->sum - target) / (b->sum - a->sum);
            return Candidate{a->profit * w + b->profit * (1.0 - w), a->point, b->point, w, true,
                            true};
        }
    }
    // feasibility was checked before calling; a single bin must match the target
    return Candidate{hull.front()->profit, hull.front()->point, hull.front()->point, 1.0, false,
                    true};
}

TypeVector diagonal_mean_type(const Scenario& scenario) {
    return TypeVector(std::vector<double>(
        std::size_t(scenario.num_services),
        scenario.mean_total_demand / double(scenario.num_services)));
}

} // namespace

const char* method_name(WorstCaseMethod method) {
    switch (method) {
    case WorstCaseMethod::TwoPointSearch: return "two_point";
    case WorstCaseMethod::GridLP: return "grid_lp";
    case WorstCaseMethod::Analytic: return "analytic";
    }
    return "unknown";
}

ConstantBundle optimal_constant(const Scenario& scenario) {
    const double marginal_target =
        scenario.unit_cost * double(scenario.num_services) / scenario.mean_total_demand;
    const double quantity = scenario.utility.marginal_inverse(marginal_target);
    return ConstantBundle{quantity,
                          scenario.mean_total_demand * scenario.utility.value(quantity)};
}

CommittedSpendContract optimal_contract(const Scenario& scenario) {
    const ConstantBundle bundle = optimal_constant(scenario);
    return CommittedSpendContract{double(scenario.num_services) * bundle.quantity_per_service,
                                  bundle.transfer, scenario.unit_cost};
}

double guarantee_value(const Scenario& scenario) {
    const ConstantBundle bundle = optimal_constant(scenario);
    return bundle.transfer - scenario.unit_cost * double(scenario.num_services) *
                                 bundle.quantity_per_service;
}

std::optional<double> constant_profit_value(const Mechanism& mechanism,
                                            const Scenario& scenario) {
    if (const auto* contract = std::get_if<CommittedSpendContract>(&mechanism)) {
        // priced at cost, the overage revenue cancels the overage cost
        if (contract->overage_price == scenario.unit_cost)
            return contract->committed_payment - scenario.unit_cost * contract->committed_quantity;
        return std::nullopt;
    }
    if (const auto* bundle = std::get_if<ConstantBundle>(&mechanism))
        return bundle->transfer - scenario.unit_cost * double(scenario.num_services) *
                                      bundle->quantity_per_service;
    if (const auto* tariff = std::get_if<LinearTariff>(&mechanism)) {
        if (tariff->price == scenario.unit_cost) return 0.0;
        return std::nullopt;
    }
    return std::nullopt;
}

std::optional<ProfitReport> analytic_worst_case(const Mechanism& mechanism,
                                                const Scenario& scenario) {
    const auto constant = constant_profit_value(mechanism, scenario);
    if (!constant) return std::nullopt;
    return ProfitReport{describe(mechanism), *constant, diagonal_dirac(scenario),
                        WorstCaseMethod::Analytic, 0, std::nullopt};
}

ProfitReport worst_case_profit(const Mechanism& mechanism, const Scenario& scenario,
                               std::span<const TypeVector> grid, WorstCaseMethod method) {
    if (method == WorstCaseMethod::Analytic) {
        auto report = analytic_worst_case(mechanism, scenario);
        if (!report)
            throw std::invalid_argument("analytic worst case requires a constant-profit "
                                        "mechanism: " + describe(mechanism));
        return *report;
    }
    if (grid.empty()) throw std::invalid_argument("worst_case_profit: grid must be nonempty");
    for (const TypeVector& type : grid)
        if (type.dimension() != std::size_t(scenario.num_services))
            throw std::invalid_argument("worst_case_profit: grid dimension mismatch");

    std::vector<double> sums(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) sums[i] = grid[i].sum();
    const auto [min_it, max_it] = std::minmax_element(sums.begin(), sums.end());
    check_feasible(*min_it, *max_it, scenario.mean_total_demand);

    const std::vector<double> profits = profile(mechanism, scenario, grid);

    const Candidate best = method == WorstCaseMethod::TwoPointSearch
                               ? two_point_search(sums, profits, scenario.mean_total_demand)
                               : envelope_search(sums, profits, scenario.mean_total_demand);

    return ProfitReport{describe(mechanism), best.value, candidate_distribution(best, grid),
                        method, grid.size(), std::nullopt};
}

std::vector<TypeVector> adversary_grid(const Scenario& scenario, int sum_points,
                                       std::size_t cap) {
    if (sum_points < 2)
        throw ConfigError("adversary grid needs at least 2 sum points, got " +
                          std::to_string(sum_points));
    const int K = scenario.num_services;
    const int per_dim = int((sum_points - 2) / K) + 2; // ceil((sum_points-1)/K) + 1
    return product_grid(scenario, per_dim, cap);
}

std::vector<ProfitReport> worst_case_refinement(const Mechanism& mechanism,
                                                const Scenario& scenario,
                                                std::span<const int> sum_levels,
                                                WorstCaseMethod method, std::size_t cap) {
    if (sum_levels.empty())
        throw ConfigError("worst_case_refinement: at least one resolution level required");
    std::vector<ProfitReport> reports;
    reports.reserve(sum_levels.size());
    for (std::size_t level = 0; level < sum_levels.size(); ++level) {
        const auto grid = adversary_grid(scenario, sum_levels[level], cap);
        ProfitReport report = worst_case_profit(mechanism, scenario, grid, method);
        if (level > 0)
            report.refinement_delta = report.guarantee - reports.back().guarantee;
        reports.push_back(std::move(report));
    }
    return reports;
}

MenuCertification certify_upper_bound(const Scenario& scenario, int n_menus,
                                      std::uint64_t seed, int points_per_dim) {
    if (n_menus < 1) throw std::invalid_argument("certify_upper_bound: n_menus must be >= 1");
    if (points_per_dim <= 0) points_per_dim = scenario.num_services <= 2 ? 21 : 11;

    const CommittedSpendContract contract = optimal_contract(scenario);
    const double guarantee = guarantee_value(scenario);
    const double allocation_ceiling = 4.0 * contract.committed_quantity;
    const TypeVector diagonal = diagonal_mean_type(scenario);
    const DiscreteDistribution dirac = diagonal_dirac(scenario);

    // keep the diagonal mean type in the adversary grid so the point mass at
    // it is feasible for the worst-case program
    std::vector<TypeVector> grid = product_grid(scenario, points_per_dim);
    bool has_diagonal = false;
    for (const TypeVector& point : grid) {
        bool match = true;
        for (std::size_t i = 0; i < point.dimension(); ++i)
            if (std::fabs(point[i] - diagonal[i]) > 1e-12) {
                match = false;
                break;
            }
        if (match) {
            has_diagonal = true;
            break;
        }
    }
    if (!has_diagonal) grid.push_back(diagonal);

    Rng rng(seed);
    MenuCertification result;
    result.menus_checked = n_menus;
    result.seed = seed;
    result.max_excess = -std::numeric_limits<double>::infinity();

    const std::size_t dim = std::size_t(scenario.num_services);
    for (int m = 0; m < n_menus; ++m) {
        FiniteMenu menu;
        const int n_options = int(rng.uniform_int(1, 8));
        menu.options.reserve(std::size_t(n_options));
        for (int j = 0; j < n_options; ++j) {
            MenuOption option;
            option.allocation.resize(dim);
            for (double& q : option.allocation) q = rng.uniform(0.0, allocation_ceiling);
            option.transfer = rng.uniform(0.0, 2.0 * contract.committed_payment);
            menu.options.push_back(std::move(option));
        }

        // shift transfers so the diagonal mean type's best utility is exactly
        // zero: participation binds and the menu extracts all its surplus
        double best_utility = -std::numeric_limits<double>::infinity();
        for (const MenuOption& option : menu.options) {
            double v = -option.transfer;
            for (std::size_t i = 0; i < dim; ++i)
                v += diagonal[i] * scenario.utility.value(option.allocation[i]);
            best_utility = std::max(best_utility, v);
        }
        for (MenuOption& option : menu.options) option.transfer += best_utility;

        const Mechanism mechanism = menu;
        const double diagonal_profit = expected_profit(mechanism, dirac, scenario);
        const double worst =
            worst_case_profit(mechanism, scenario, grid, WorstCaseMethod::GridLP).guarantee;

        result.max_excess = std::max(result.max_excess, worst - guarantee);
        // tolerances scale with the profit magnitudes; at unit scale they are
        // the plain 1e-9 / 1e-8 bounds
        const bool chain_ok =
            worst <= diagonal_profit + 1e-9 * std::max(1.0, std::fabs(diagonal_profit));
        const bool bound_ok =
            diagonal_profit <= guarantee + 1e-8 * std::max(1.0, std::fabs(guarantee));
        if (!chain_ok || !bound_ok) {
            ++result.violations;
            if (!result.witness_menu) {
                result.witness_menu = menu;
                result.witness_worst_case = worst;
                result.witness_diagonal_profit = diagonal_profit;
            }
        }
    }
    return result;
}

} // namespace rcp
