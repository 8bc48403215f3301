#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rcp/mechanism.hpp"
#include "rcp/rng.hpp"
#include "rcp/robust.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace rcp;

namespace {

Scenario scenario_k2() {
    return Scenario(2, 1.0, 1.0, UtilityFunction::scaled_power(2.0, 0.5));
}

Scenario scenario_k1() {
    return Scenario(1, 1.0, 0.5, UtilityFunction::scaled_power(2.0, 0.5));
}

TypeVector tv(std::vector<double> components) { return TypeVector(std::move(components)); }

// closed-form shadow price when the commitment binds under a power utility:
// sum_i (mu / (a alpha theta_i))^{1/(alpha-1)} = q_bar solved for mu
double binding_shadow_price(const CommittedSpendContract& contract, const TypeVector& type,
                            const UtilityFunction& u) {
    double scale_sum = 0.0;
    for (std::size_t i = 0; i < type.dimension(); ++i)
        if (type[i] > 0.0)
            scale_sum += std::pow(type[i], 1.0 / (1.0 - u.exponent()));
    return u.scale() * u.exponent() *
           std::pow(contract.committed_quantity / scale_sum, u.exponent() - 1.0);
}

} // namespace

TEST_CASE("unconstrained response consumes where marginal value meets the price") {
    const CommittedSpendContract contract{0.5, 1.0, 1.0};
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    const BuyerResponse response = buyer_response_committed(contract, tv({1.0, 1.0}), u);
    CHECK(response.allocation[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(response.allocation[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(response.transfer == doctest::Approx(2.5).epsilon(1e-12));
    CHECK_FALSE(response.floor_binding);
    CHECK(*response.shadow_price == doctest::Approx(1.0));
}

TEST_CASE("a zero type consumes only the commitment, split equally") {
    const CommittedSpendContract contract{0.5, 1.0, 1.0};
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    const BuyerResponse response = buyer_response_committed(contract, tv({0.0, 0.0}), u);
    CHECK(response.allocation[0] == doctest::Approx(0.25));
    CHECK(response.allocation[1] == doctest::Approx(0.25));
    CHECK(response.transfer == doctest::Approx(1.0));
    CHECK(response.floor_binding);
}

TEST_CASE("binding floor water-fills to the bisected shadow price") {
    const CommittedSpendContract contract{0.5, 1.0, 1.0};
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    const TypeVector type = tv({0.1, 0.1});
    const BuyerResponse response = buyer_response_committed(contract, type, u);
    CHECK(response.floor_binding);
    // analytic cross-check: 2 (0.1/mu)^2 = 0.5 gives mu = 0.2
    CHECK(*response.shadow_price == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(*response.shadow_price ==
          doctest::Approx(binding_shadow_price(contract, type, u)).epsilon(1e-10));
    CHECK(response.allocation[0] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(response.allocation[1] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(response.transfer == doctest::Approx(1.0));
}

TEST_CASE("bisected shadow price matches the closed form on random binding cases") {
    Rng rng(31);
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    int binding = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const CommittedSpendContract contract{rng.uniform(0.5, 3.0), rng.uniform(0.0, 2.0),
                                              rng.uniform(0.5, 4.0)};
        std::vector<double> components(2);
        for (double& c : components) c = rng.uniform(0.01, 0.5);
        const TypeVector type = tv(components);
        const BuyerResponse response = buyer_response_committed(contract, type, u);
        CHECK(response.total_quantity() >= contract.committed_quantity - 1e-9);
        if (!response.floor_binding) continue;
        ++binding;
        CHECK(*response.shadow_price ==
              doctest::Approx(binding_shadow_price(contract, type, u)).epsilon(1e-9));
    }
    CHECK(binding > 100); // the sampled region triggers the floor often
}

TEST_CASE("KKT stationarity holds across random contracts and types") {
    Rng rng(32);
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    for (int trial = 0; trial < 500; ++trial) {
        const CommittedSpendContract contract{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0),
                                              rng.uniform(0.25, 4.0)};
        std::vector<double> components(3);
        for (double& c : components) c = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
        const TypeVector type = tv(components);
        const BuyerResponse response = buyer_response_committed(contract, type, u);
        const double mu = *response.shadow_price;
        if (response.floor_binding)
            CHECK(mu <= contract.overage_price * (1.0 + 1e-12));
        else
            CHECK(mu == contract.overage_price);
        bool all_zero = true;
        for (double c : components)
            if (c > 0.0) all_zero = false;
        for (std::size_t i = 0; i < 3; ++i) {
            if (type[i] > 0.0)
                CHECK(std::fabs(type[i] * u.marginal(response.allocation[i]) - mu) <=
                      1e-8 * mu);
            else if (!all_zero)
                CHECK(response.allocation[i] == 0.0);
        }
    }
}

TEST_CASE("response dominates random feasible perturbations") {
    Rng rng(33);
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    for (int trial = 0; trial < 50; ++trial) {
        const CommittedSpendContract contract{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0),
                                              rng.uniform(0.25, 4.0)};
        std::vector<double> components(2);
        for (double& c : components) c = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
        const TypeVector type = tv(components);
        const BuyerResponse response = buyer_response_committed(contract, type, u);

        const auto objective = [&](const std::vector<double>& allocation) {
            double total = 0.0, value = 0.0;
            for (std::size_t i = 0; i < allocation.size(); ++i) {
                total += allocation[i];
                if (type[i] > 0.0) value += type[i] * u.value(allocation[i]);
            }
            return value - contract.committed_payment -
                   contract.overage_price * (total - contract.committed_quantity);
        };
        const double base = objective(response.allocation);
        for (int k = 0; k < 200; ++k) {
            std::vector<double> candidate(2);
            for (std::size_t i = 0; i < 2; ++i)
                candidate[i] = k % 2 == 0
                                   ? std::max(0.0, response.allocation[i] +
                                                       rng.uniform(-0.3, 0.3))
                                   : rng.uniform(0.0, 3.0);
            double total = candidate[0] + candidate[1];
            if (total < contract.committed_quantity) {
                if (total <= 0.0) {
                    candidate[0] = candidate[1] = contract.committed_quantity / 2.0;
                } else {
                    for (double& q : candidate) q *= contract.committed_quantity / total;
                }
            }
            CHECK(objective(candidate) <= base + 1e-9);
        }
    }
}

TEST_CASE("respond handles every mechanism variant") {
    const Scenario scenario = scenario_k1();

    const Mechanism bundle = ConstantBundle{0.25, 0.5};
    const BuyerResponse bundle_response = respond(bundle, tv({0.7}), scenario);
    CHECK(bundle_response.allocation[0] == 0.25);
    CHECK(bundle_response.transfer == 0.5);

    const Mechanism tariff = LinearTariff{2.0};
    const BuyerResponse tariff_response = respond(tariff, tv({0.5}), scenario);
    CHECK(tariff_response.allocation[0] == doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(tariff_response.transfer == doctest::Approx(0.125).epsilon(1e-12));

    const Mechanism singleton = FiniteMenu{{MenuOption{{0.3}, 0.1}}};
    for (double theta : {0.0, 0.4, 1.0}) {
        const BuyerResponse menu_response = respond(singleton, tv({theta}), scenario);
        CHECK(menu_response.allocation[0] == 0.3);
        CHECK(menu_response.transfer == 0.1);
    }
}

TEST_CASE("respond validates dimensions and menus") {
    const Scenario scenario = scenario_k2();
    CHECK_THROWS_AS(respond(LinearTariff{2.0}, tv({0.5}), scenario), std::invalid_argument);
    CHECK_THROWS_AS(respond(FiniteMenu{}, tv({0.5, 0.5}), scenario), std::invalid_argument);
    CHECK_THROWS_AS(respond(LinearTariff{0.0}, tv({0.5, 0.5}), scenario),
                    std::invalid_argument);
}

TEST_CASE("seller profit of the optimal contract is flat across types") {
    const Scenario scenario = scenario_k2();
    const Mechanism contract = optimal_contract(scenario);
    Rng rng(34);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> components(2);
        for (double& c : components) c = rng.uniform();
        CHECK(seller_profit(contract, tv(components), scenario) ==
              doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("profit examples for bundles and tariffs") {
    const Scenario one = scenario_k1();
    const Mechanism bundle = ConstantBundle{0.25, 0.5};
    CHECK(seller_profit(bundle, tv({0.3}), one) == doctest::Approx(0.25));
    CHECK(seller_profit(bundle, tv({0.9}), one) == doctest::Approx(0.25));

    const Mechanism at_cost = LinearTariff{1.0};
    for (double theta : {0.0, 0.4, 1.0})
        CHECK(seller_profit(at_cost, tv({theta}), one) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("expected profit averages over the support") {
    const Scenario one = scenario_k1();
    const Mechanism tariff = LinearTariff{2.0};
    const DiscreteDistribution dirac({tv({0.5})}, {1.0});
    CHECK(expected_profit(tariff, dirac, one) == doctest::Approx(0.0625).epsilon(1e-12));

    const DiscreteDistribution spread({tv({0.0}), tv({1.0})}, {0.5, 0.5});
    CHECK(expected_profit(tariff, spread, one) == doctest::Approx(0.125).epsilon(1e-12));

    const Mechanism bundle = ConstantBundle{0.25, 0.5};
    CHECK(expected_profit(bundle, spread, one) == doctest::Approx(0.25));
}

TEST_CASE("menu incentive check accepts argmax selections") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    const std::vector<TypeVector> grid = {tv({0.0}), tv({0.25}), tv({0.5}), tv({1.0})};

    const FiniteMenu singleton{{MenuOption{{0.3}, 0.1}}};
    CHECK(check_ic_menu(singleton, grid, u).ok);

    // the pricier copy of the same allocation is never chosen
    const FiniteMenu dominated{{MenuOption{{1.0}, 0.0}, MenuOption{{1.0}, 1.0}}};
    CHECK(check_ic_menu(dominated, grid, u).ok);

    const FiniteMenu screen{{MenuOption{{0.1}, 0.1}, MenuOption{{0.8}, 0.9}}};
    CHECK(check_ic_menu(screen, grid, u).ok);
}

TEST_CASE("IR slack is zero for the optimal bundle under any feasible distribution") {
    const Scenario scenario = scenario_k2();
    const Mechanism bundle = optimal_constant(scenario);
    const std::vector<DiscreteDistribution> feasible = {
        diagonal_dirac(scenario),
        two_point(scenario, 0.0, 1.0),
        diagonal_grid(scenario, 7),
        DiscreteDistribution({tv({0.0, 1.0}), tv({1.0, 0.0})}, {0.5, 0.5}),
    };
    for (const DiscreteDistribution& F : feasible) {
        const IrCheckReport report = check_ir(bundle, F, scenario);
        CHECK(report.ok);
        CHECK(report.slack == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("IR holds for tariffs and fails for pure extraction") {
    const Scenario scenario = scenario_k2();
    const DiscreteDistribution F = two_point(scenario, 0.0, 1.0);
    CHECK(check_ir(LinearTariff{2.0}, F, scenario).ok);
    CHECK(check_ir(LinearTariff{2.0}, F, scenario).slack >= 0.0);

    const Mechanism extraction = ConstantBundle{0.0, 5.0}; // charges with no allocation
    const IrCheckReport report = check_ir(extraction, F, scenario);
    CHECK_FALSE(report.ok);
    CHECK(report.slack == doctest::Approx(-5.0));
}

TEST_CASE("equalize_allocation satisfies the equal-treatment cost inequality") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    const std::vector<double> allocation = {0.0, 1.0};
    // u(q_d) = (0 + 2)/2 = 1 so q_d = 0.25, and 2 * 0.25 <= 1
    CHECK(equalize_allocation(allocation, u) == doctest::Approx(0.25).epsilon(1e-12));

    Rng rng(35);
    for (int trial = 0; trial < 300; ++trial) {
        const auto v = UtilityFunction::scaled_power(rng.uniform(0.5, 4.0),
                                                     rng.uniform(0.1, 0.9));
        const int K = int(rng.uniform_int(2, 5));
        std::vector<double> q(static_cast<std::size_t>(K));
        double total = 0.0;
        for (double& x : q) {
            x = rng.uniform(0.0, 3.0);
            total += x;
        }
        CHECK(double(K) * equalize_allocation(q, v) <= total + 1e-12);
    }
}

TEST_CASE("derandomize takes certainty equivalents pointwise") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    const std::vector<TypeVector> grid = {tv({0.5})};

    RandomMechanism mechanism;
    AllocationLottery lottery;
    lottery.outcomes = {MenuOption{{0.0}, 0.0}, MenuOption{{1.0}, 2.0}};
    lottery.weights = {0.5, 0.5};
    mechanism.per_type = {lottery};

    const DeterministicAssignment assignment = derandomize(mechanism, grid, u);
    CHECK(assignment.per_type[0].allocation[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(assignment.per_type[0].allocation[0] <= 0.5); // at most the expected quantity
    CHECK(assignment.per_type[0].transfer == doctest::Approx(1.0));
}

TEST_CASE("derandomize is the identity on degenerate lotteries") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    const std::vector<TypeVector> grid = {tv({0.2, 0.8})};
    RandomMechanism mechanism;
    AllocationLottery lottery;
    lottery.outcomes = {MenuOption{{0.4, 0.9}, 1.5}};
    lottery.weights = {1.0};
    mechanism.per_type = {lottery};
    const DeterministicAssignment assignment = derandomize(mechanism, grid, u);
    CHECK(assignment.per_type[0].allocation[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(assignment.per_type[0].allocation[1] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(assignment.per_type[0].transfer == 1.5);
}

TEST_CASE("efficiency at the optimum: slack floor gives the surplus maximizer") {
    const Scenario scenario = scenario_k2();
    const CommittedSpendContract contract = optimal_contract(scenario);
    Rng rng(36);
    int unconstrained = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> components(2);
        for (double& c : components) c = rng.uniform();
        const TypeVector type = tv(components);
        const BuyerResponse response =
            buyer_response_committed(contract, type, scenario.utility);
        if (response.floor_binding) continue;
        ++unconstrained;
        for (std::size_t i = 0; i < 2; ++i) {
            const double efficient =
                type[i] > 0.0 ? scenario.utility.marginal_inverse(scenario.unit_cost / type[i])
                              : 0.0;
            CHECK(std::fabs(response.allocation[i] - efficient) <= 1e-9);
        }
    }
    CHECK(unconstrained > 100);
}
