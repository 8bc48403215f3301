#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rcp/rng.hpp"
#include "rcp/utility.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace rcp;

namespace {

double rel_err(double actual, double expected) {
    return std::fabs(actual - expected) / std::max(1e-300, std::fabs(expected));
}

// independent derivative oracle: symmetric difference quotient
double central_difference(const UtilityFunction& u, double q) {
    const double h = 1e-6 * q;
    return (u.value(q + h) - u.value(q - h)) / (2.0 * h);
}

} // namespace

TEST_CASE("value evaluates the scaled power form") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    CHECK(u.value(0.25) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.value(0.0) == 0.0);
    const auto unit = UtilityFunction::scaled_power(1.0, 0.5);
    CHECK(unit.value(4.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("value rejects negative quantities") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    CHECK_THROWS_AS(u.value(-0.1), std::domain_error);
}

TEST_CASE("construction enforces the family constraints") {
    CHECK_THROWS_AS(UtilityFunction::scaled_power(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(UtilityFunction::scaled_power(-1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(UtilityFunction::scaled_power(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(UtilityFunction::scaled_power(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(UtilityFunction::scaled_power(1.0, 1.5), std::invalid_argument);
}

TEST_CASE("marginal evaluates the derivative") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    CHECK(u.marginal(0.25) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(u.marginal(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    const auto unit = UtilityFunction::scaled_power(1.0, 0.5);
    CHECK(unit.marginal(1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(u.marginal(0.0), std::domain_error);
    CHECK_THROWS_AS(u.marginal(-1.0), std::domain_error);
}

TEST_CASE("marginal matches central differences across the range") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto u = UtilityFunction::scaled_power(rng.uniform(0.5, 4.0),
                                                     rng.uniform(0.15, 0.85));
        const double q = std::pow(10.0, rng.uniform(-3.0, 3.0));
        CHECK(rel_err(central_difference(u, q), u.marginal(q)) < 1e-6);
    }
}

TEST_CASE("marginal_inverse inverts the marginal") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    CHECK(u.marginal_inverse(2.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(u.marginal_inverse(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(u.marginal_inverse(0.0), std::domain_error);
    CHECK_THROWS_AS(u.marginal_inverse(-2.0), std::domain_error);
}

TEST_CASE("inverse inverts the value") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    CHECK(u.inverse(1.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(u.inverse(0.0) == 0.0);
    CHECK_THROWS_AS(u.inverse(-0.5), std::domain_error);
}

TEST_CASE("round-trips hold to 1e-10 on a log-spaced range") {
    Rng rng(12);
    for (int trial = 0; trial < 500; ++trial) {
        const auto u = UtilityFunction::scaled_power(rng.uniform(0.5, 4.0),
                                                     rng.uniform(0.1, 0.9));
        const double q = std::pow(10.0, rng.uniform(-3.0, 3.0));
        CHECK(rel_err(u.marginal_inverse(u.marginal(q)), q) < 1e-10);
        CHECK(rel_err(u.inverse(u.value(q)), q) < 1e-10);
        CHECK(rel_err(u.marginal(u.marginal_inverse(q)), q) < 1e-10);
    }
}

TEST_CASE("monotonicity: value increases, marginal decreases") {
    Rng rng(13);
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    for (int trial = 0; trial < 200; ++trial) {
        const double q1 = std::pow(10.0, rng.uniform(-3.0, 2.5));
        const double q2 = q1 * std::pow(10.0, rng.uniform(0.05, 0.5));
        CHECK(u.value(q2) > u.value(q1));
        CHECK(u.marginal(q2) < u.marginal(q1));
    }
}

TEST_CASE("bisection fallback agrees with the closed-form inverse") {
    Rng rng(14);
    for (int trial = 0; trial < 100; ++trial) {
        const auto u = UtilityFunction::scaled_power(rng.uniform(0.5, 4.0),
                                                     rng.uniform(0.15, 0.85));
        const double x = std::pow(10.0, rng.uniform(-2.0, 2.0));
        CHECK(rel_err(marginal_inverse_bisect(u, x), u.marginal_inverse(x)) < 1e-9);
    }
}

TEST_CASE("certainty equivalent of a two-outcome lottery") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    const std::vector<std::pair<double, double>> lottery = {{0.0, 0.5}, {1.0, 0.5}};
    const double ce = certainty_equivalent(u, lottery);
    CHECK(ce == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(ce <= 0.5); // below the expected quantity
}

TEST_CASE("certainty equivalent of degenerate lotteries is the quantity itself") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    const std::vector<std::pair<double, double>> degenerate = {{0.7, 1.0}};
    CHECK(certainty_equivalent(u, degenerate) == doctest::Approx(0.7).epsilon(1e-12));
    const auto unit = UtilityFunction::scaled_power(1.0, 0.5);
    const std::vector<std::pair<double, double>> one = {{1.0, 1.0}};
    CHECK(certainty_equivalent(unit, one) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("certainty equivalent validates the weights") {
    const auto u = UtilityFunction::scaled_power(2.0, 0.5);
    const std::vector<std::pair<double, double>> short_weights = {{0.0, 0.5}, {1.0, 0.4}};
    CHECK_THROWS_AS(certainty_equivalent(u, short_weights), std::invalid_argument);
    const std::vector<std::pair<double, double>> negative = {{0.0, -0.5}, {1.0, 1.5}};
    CHECK_THROWS_AS(certainty_equivalent(u, negative), std::invalid_argument);
}

TEST_CASE("Jensen: certainty equivalent never exceeds the expected quantity") {
    Rng rng(15);
    for (int trial = 0; trial < 300; ++trial) {
        const auto u = UtilityFunction::scaled_power(rng.uniform(0.5, 4.0),
                                                     rng.uniform(0.1, 0.9));
        const int outcomes = int(rng.uniform_int(2, 5));
        std::vector<std::pair<double, double>> lottery(static_cast<std::size_t>(outcomes));
        double total_w = 0.0;
        for (auto& [q, w] : lottery) {
            q = rng.uniform(0.0, 4.0);
            w = rng.uniform(0.05, 1.0);
            total_w += w;
        }
        double mean_q = 0.0;
        for (auto& [q, w] : lottery) {
            w /= total_w;
            mean_q += w * q;
        }
        CHECK(certainty_equivalent(u, lottery) <= mean_q + 1e-12);
        // distinct outcomes with interior weights: strictly below
        const std::vector<std::pair<double, double>> spread = {{0.1, 0.5}, {3.0, 0.5}};
        CHECK(certainty_equivalent(u, spread) < 0.5 * 0.1 + 0.5 * 3.0);
    }
}
