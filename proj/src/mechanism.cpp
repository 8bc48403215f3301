#include "rcp/mechanism.hpp"

#include "rcp/errors.hpp"
#include "rcp/numeric.hpp"
#include "rcp/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rcp {

namespace {

constexpr double kFloorSlack = 1e-9;    // tolerated shortfall on the committed total
constexpr double kIcTolerance = 1e-10;

double option_utility(const MenuOption& option, const TypeVector& type,
                      const UtilityFunction& u) {
    double v = 0.0;
    for (std::size_t i = 0; i < option.allocation.size(); ++i)
        if (type[i] > 0.0) v += type[i] * u.value(option.allocation[i]);
    return v - option.transfer;
}

void check_dimension(const TypeVector& type, const Scenario& scenario) {
    if (type.dimension() != std::size_t(scenario.num_services))
        throw std::invalid_argument("type has dimension " + std::to_string(type.dimension()) +
                                    ", scenario has K = " +
                                    std::to_string(scenario.num_services));
}

} // namespace

void CommittedSpendContract::validate() const {
    if (committed_quantity < 0.0)
        throw std::invalid_argument("committed quantity q_bar must be nonnegative");
    if (committed_payment < 0.0)
        throw std::invalid_argument("committed payment t_bar must be nonnegative");
    if (!(overage_price > 0.0))
        throw std::invalid_argument("overage price p must be positive");
}

void ConstantBundle::validate() const {
    if (quantity_per_service < 0.0)
        throw std::invalid_argument("bundle quantity must be nonnegative");
}

void LinearTariff::validate() const {
    if (!(price > 0.0)) throw std::invalid_argument("tariff price must be positive");
}

void FiniteMenu::validate(std::size_t dimension) const {
    if (options.empty()) throw std::invalid_argument("menu must contain at least one option");
    for (const auto& option : options) {
        if (option.allocation.size() != dimension)
            throw std::invalid_argument("menu option allocation has wrong dimension");
        for (double q : option.allocation)
            if (q < 0.0) throw std::invalid_argument("menu allocations must be nonnegative");
    }
}

void AllocationLottery::validate(std::size_t dimension) const {
    if (outcomes.empty() || outcomes.size() != weights.size())
        throw std::invalid_argument("lottery outcomes and weights must match and be nonempty");
    double total = 0.0;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        if (outcomes[k].allocation.size() != dimension)
            throw std::invalid_argument("lottery outcome has wrong dimension");
        for (double q : outcomes[k].allocation)
            if (q < 0.0) throw std::invalid_argument("lottery allocations must be nonnegative");
        if (weights[k] < 0.0)
            throw std::invalid_argument("lottery weights must be nonnegative");
        total += weights[k];
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw std::invalid_argument("lottery weights sum to " + std::to_string(total) +
                                    ", expected 1");
}

std::string describe(const Mechanism& mechanism) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CommittedSpendContract>) {
                return "committed_spend(q_bar=" + format_real(m.committed_quantity) +
                       ";t_bar=" + format_real(m.committed_payment) +
                       ";p=" + format_real(m.overage_price) + ")";
            } else if constexpr (std::is_same_v<T, ConstantBundle>) {
                return "constant(q=" + format_real(m.quantity_per_service) +
                       ";t=" + format_real(m.transfer) + ")";
            } else if constexpr (std::is_same_v<T, LinearTariff>) {
                return "linear(p=" + format_real(m.price) + ")";
            } else {
                return "menu(" + std::to_string(m.options.size()) + " options)";
            }
        },
        mechanism);
}

double BuyerResponse::total_quantity() const {
    return std::accumulate(allocation.begin(), allocation.end(), 0.0);
}

BuyerResponse buyer_response_committed(const CommittedSpendContract& contract,
                                       const TypeVector& type, const UtilityFunction& u) {
    contract.validate();
    const std::size_t dim = type.dimension();
    const double q_bar = contract.committed_quantity;
    const double p = contract.overage_price;

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < dim; ++i)
        if (type[i] > 0.0) active.push_back(i);

    BuyerResponse response;
    response.allocation.assign(dim, 0.0);

    if (active.empty()) {
        // indifferent among all splits of the floor; equal split by convention
        for (double& q : response.allocation) q = q_bar / double(dim);
        response.transfer = contract.committed_payment;
        response.floor_binding = true;
        response.shadow_price = p;
        return response;
    }

    const auto demand_at = [&](double mu) {
        double total = 0.0;
        for (std::size_t i : active) total += u.marginal_inverse(mu / type[i]);
        return total;
    };

    const double unconstrained_total = demand_at(p);
    if (unconstrained_total >= q_bar) {
        for (std::size_t i : active) response.allocation[i] = u.marginal_inverse(p / type[i]);
        response.transfer = contract.committed_payment + p * (unconstrained_total - q_bar);
        response.floor_binding = false;
        response.shadow_price = p;
        return response;
    }

    // floor binds: find the shadow price mu < p with total demand q_bar; the
    // demand curve is strictly decreasing and diverges as mu -> 0
    double mu_lo = 0.5 * p;
    int guard = 0;
    while (demand_at(mu_lo) < q_bar) {
        mu_lo *= 0.5;
        if (++guard > 200)
            throw NumericError("buyer response: failed to bracket the shadow price (q_bar=" +
                               std::to_string(q_bar) + ", p=" + std::to_string(p) + ")");
    }
    // width backstop of a few ulps: the residual in total quantity is
    // amplified by 1/(1-alpha), so the mu bracket must close almost fully
    const double mu = bisect_decreasing(demand_at, q_bar, mu_lo, p,
                                        BisectionOptions{4e-16, 200});
    for (std::size_t i : active) response.allocation[i] = u.marginal_inverse(mu / type[i]);
    response.transfer = contract.committed_payment;
    response.floor_binding = true;
    response.shadow_price = mu;
    return response;
}

BuyerResponse respond(const Mechanism& mechanism, const TypeVector& type,
                      const Scenario& scenario) {
    check_dimension(type, scenario);
    const std::size_t dim = type.dimension();
    const UtilityFunction& u = scenario.utility;

    return std::visit(
        [&](const auto& m) -> BuyerResponse {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CommittedSpendContract>) {
                return buyer_response_committed(m, type, u);
            } else if constexpr (std::is_same_v<T, ConstantBundle>) {
                m.validate();
                BuyerResponse response;
                response.allocation.assign(dim, m.quantity_per_service);
                response.transfer = m.transfer;
                return response;
            } else if constexpr (std::is_same_v<T, LinearTariff>) {
                m.validate();
                BuyerResponse response;
                response.allocation.assign(dim, 0.0);
                double total = 0.0;
                for (std::size_t i = 0; i < dim; ++i)
                    if (type[i] > 0.0) {
                        response.allocation[i] = u.marginal_inverse(m.price / type[i]);
                        total += response.allocation[i];
                    }
                response.transfer = m.price * total;
                response.shadow_price = m.price;
                return response;
            } else {
                m.validate(dim);
                std::size_t best = 0;
                double best_utility = option_utility(m.options[0], type, u);
                for (std::size_t j = 1; j < m.options.size(); ++j) {
                    const double v = option_utility(m.options[j], type, u);
                    if (v > best_utility) {
                        best_utility = v;
                        best = j;
                    }
                }
                BuyerResponse response;
                response.allocation = m.options[best].allocation;
                response.transfer = m.options[best].transfer;
                return response;
            }
        },
        mechanism);
}

double seller_profit(const Mechanism& mechanism, const TypeVector& type,
                     const Scenario& scenario) {
    const BuyerResponse response = respond(mechanism, type, scenario);
    const double c = scenario.unit_cost;
    // transfer - c * total, rearranged per variant so margins never come out
    // of a cancellation between huge transfer and cost terms
    if (const auto* contract = std::get_if<CommittedSpendContract>(&mechanism)) {
        if (!response.floor_binding)
            return (contract->committed_payment - contract->overage_price *
                                                      contract->committed_quantity) +
                   (contract->overage_price - c) * response.total_quantity();
        return contract->committed_payment - c * response.total_quantity();
    }
    if (const auto* tariff = std::get_if<LinearTariff>(&mechanism))
        return (tariff->price - c) * response.total_quantity();
    return response.transfer - c * response.total_quantity();
}

double expected_profit(const Mechanism& mechanism, const DiscreteDistribution& F,
                       const Scenario& scenario) {
    double total = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i)
        total += F.weight(i) * seller_profit(mechanism, F.point(i), scenario);
    return total;
}

double buyer_surplus(const Mechanism& mechanism, const TypeVector& type,
                     const Scenario& scenario) {
    const BuyerResponse response = respond(mechanism, type, scenario);
    double value = 0.0;
    for (std::size_t i = 0; i < type.dimension(); ++i)
        if (type[i] > 0.0) value += type[i] * scenario.utility.value(response.allocation[i]);
    return value - response.transfer;
}

IcCheckReport check_ic_menu(const FiniteMenu& menu, std::span<const TypeVector> grid,
                            const UtilityFunction& u) {
    if (grid.empty()) throw std::invalid_argument("check_ic_menu: grid must be nonempty");
    menu.validate(grid.front().dimension());

    for (std::size_t t = 0; t < grid.size(); ++t) {
        std::size_t chosen = 0;
        double chosen_utility = option_utility(menu.options[0], grid[t], u);
        for (std::size_t j = 1; j < menu.options.size(); ++j) {
            const double v = option_utility(menu.options[j], grid[t], u);
            if (v > chosen_utility) {
                chosen_utility = v;
                chosen = j;
            }
        }
        for (std::size_t j = 0; j < menu.options.size(); ++j) {
            const double v = option_utility(menu.options[j], grid[t], u);
            if (v > chosen_utility + kIcTolerance)
                return {false, IcWitness{t, chosen, j, v - chosen_utility}};
        }
    }
    return {true, std::nullopt};
}

IrCheckReport check_ir(const Mechanism& mechanism, const DiscreteDistribution& F,
                       const Scenario& scenario) {
    double slack = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i)
        slack += F.weight(i) * buyer_surplus(mechanism, F.point(i), scenario);
    return {slack >= -1e-10, slack};
}

double equalize_allocation(std::span<const double> allocation, const UtilityFunction& u) {
    if (allocation.empty())
        throw std::invalid_argument("equalize_allocation: allocation must be nonempty");
    double mean_value = 0.0;
    for (double q : allocation) mean_value += u.value(q);
    mean_value /= double(allocation.size());
    return u.inverse(mean_value);
}

DeterministicAssignment derandomize(const RandomMechanism& mechanism,
                                    std::span<const TypeVector> grid,
                                    const UtilityFunction& u) {
    if (mechanism.per_type.size() != grid.size())
        throw std::invalid_argument("derandomize: one lottery per grid type required");
    const std::size_t dim = grid.empty() ? 0 : grid.front().dimension();

    DeterministicAssignment assignment;
    assignment.per_type.reserve(grid.size());
    for (const auto& lottery : mechanism.per_type) {
        lottery.validate(dim);
        MenuOption option;
        option.allocation.assign(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            double expected_value = 0.0;
            for (std::size_t k = 0; k < lottery.outcomes.size(); ++k)
                expected_value += lottery.weights[k] * u.value(lottery.outcomes[k].allocation[i]);
            option.allocation[i] = u.inverse(expected_value);
        }
        double expected_transfer = 0.0;
        for (std::size_t k = 0; k < lottery.outcomes.size(); ++k)
            expected_transfer += lottery.weights[k] * lottery.outcomes[k].transfer;
        option.transfer = expected_transfer;
        assignment.per_type.push_back(std::move(option));
    }
    return assignment;
}

} // namespace rcp
