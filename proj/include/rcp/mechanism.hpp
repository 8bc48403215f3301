// Pricing mechanisms, buyer best responses (including the water-filling
// problem with a committed total-quantity floor), profit evaluation, IC/IR
// checks, and the certainty-equivalent derandomization transform.
#pragma once

#include "rcp/distribution.hpp"
#include "rcp/utility.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rcp {

// Committed-spend contract: the buyer commits to a minimum total quantity
// q_bar and payment t_bar, splits the total freely across services, and pays
// overage_price per unit of total usage above the commitment.
struct CommittedSpendContract {
    double committed_quantity = 0.0; // q_bar
    double committed_payment = 0.0;  // t_bar
    double overage_price = 0.0;      // p

    void validate() const;
};

// Fixed bundle: every type gets the same per-service quantity and transfer.
struct ConstantBundle {
    double quantity_per_service = 0.0;
    double transfer = 0.0;

    void validate() const;
};

// Pure linear tariff at price p per unit, no commitment.
struct LinearTariff {
    double price = 0.0;

    void validate() const;
};

struct MenuOption {
    std::vector<double> allocation; // one quantity per service
    double transfer = 0.0;
};

// Finite menu of (allocation, transfer) options; the buyer picks the
// utility-maximizing option, ties broken by lowest index.
struct FiniteMenu {
    std::vector<MenuOption> options;

    void validate(std::size_t dimension) const;
};

// All variants ignore the buyer's reported demand distribution: the robustly
// optimal contract is distribution-free, so nothing here conditions on it.
using Mechanism = std::variant<CommittedSpendContract, ConstantBundle, LinearTariff, FiniteMenu>;

// Short descriptor such as "committed_spend(q_bar=0.5;t_bar=1;p=1)".
std::string describe(const Mechanism& mechanism);

// Consumption outcome. shadow_price is the multiplier on the total-quantity
// floor where one exists (committed-spend and linear responses); it has no
// meaning for bundle or menu responses.
struct BuyerResponse {
    std::vector<double> allocation;
    double transfer = 0.0;
    std::optional<double> shadow_price;
    bool floor_binding = false;

    double total_quantity() const;
};

/**
 * Buyer's optimal consumption under a committed-spend contract: maximizes
 * sum_i theta_i u(q_i) - t_bar - p (sum_i q_i - q_bar) subject to
 * sum_i q_i >= q_bar.
 *
 * Water-filling: services with theta_i > 0 consume where theta_i u'(q_i)
 * equals a common shadow price mu. Unconstrained demand at mu = p either
 * clears the floor (mu = p, overage billed) or the floor binds and mu < p is
 * found by bisection on the strictly decreasing total-demand curve. A type
 * with all-zero components is indifferent among splits of the floor and gets
 * the equal split q_bar / K.
 */
BuyerResponse buyer_response_committed(const CommittedSpendContract& contract,
                                       const TypeVector& type, const UtilityFunction& u);

// Best response to any mechanism variant.
BuyerResponse respond(const Mechanism& mechanism, const TypeVector& type,
                      const Scenario& scenario);

// transfer - c * total quantity at the buyer's best response.
double seller_profit(const Mechanism& mechanism, const TypeVector& type,
                     const Scenario& scenario);

double expected_profit(const Mechanism& mechanism, const DiscreteDistribution& F,
                       const Scenario& scenario);

// Buyer's realized surplus at the response: sum_i theta_i u(q_i) - transfer.
double buyer_surplus(const Mechanism& mechanism, const TypeVector& type,
                     const Scenario& scenario);

struct IcWitness {
    std::size_t type_index = 0;
    std::size_t chosen_option = 0;
    std::size_t better_option = 0;
    double gain = 0.0;
};

struct IcCheckReport {
    bool ok = false;
    std::optional<IcWitness> witness;
};

// The option picked for every grid type must weakly dominate every other
// option (tolerance 1e-10); a failure names the type and the better option.
IcCheckReport check_ic_menu(const FiniteMenu& menu, std::span<const TypeVector> grid,
                            const UtilityFunction& u);

struct IrCheckReport {
    bool ok = false;
    double slack = 0.0; // expected buyer surplus under truthful responses
};

IrCheckReport check_ir(const Mechanism& mechanism, const DiscreteDistribution& F,
                       const Scenario& scenario);

// Equal-treatment quantity: the q_d with u(q_d) equal to the mean of the
// u(q_j). Concavity gives K * q_d <= sum_j q_j.
double equalize_allocation(std::span<const double> allocation, const UtilityFunction& u);

// Finite lottery over (allocation, transfer) outcomes for one type.
struct AllocationLottery {
    std::vector<MenuOption> outcomes;
    std::vector<double> weights;

    void validate(std::size_t dimension) const;
};

// Random mechanism on a type grid: one lottery per grid type.
struct RandomMechanism {
    std::vector<AllocationLottery> per_type;
};

// Deterministic assignment on the same grid.
struct DeterministicAssignment {
    std::vector<MenuOption> per_type;
};

/**
 * Replaces each per-type lottery by its certainty equivalents: per service
 * q'_i = u^{-1}(E[u(q_i)]) and t' = E[t]. Every type's utility from every
 * report is unchanged, while concavity makes the assigned total quantity
 * weakly smaller, so the seller's cost weakly falls.
 */
DeterministicAssignment derandomize(const RandomMechanism& mechanism,
                                    std::span<const TypeVector> grid,
                                    const UtilityFunction& u);

} // namespace rcp
