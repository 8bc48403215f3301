#include "rcp/utility.hpp"

#include "rcp/numeric.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rcp {

UtilityFunction::UtilityFunction(Family family, double scale, double exponent)
    : family_(family), scale_(scale), exponent_(exponent) {
    if (!(scale > 0.0))
        throw std::invalid_argument("utility scale must be positive, got " +
                                    std::to_string(scale));
    if (!(exponent > 0.0 && exponent < 1.0))
        throw std::invalid_argument("utility exponent must lie in (0, 1), got " +
                                    std::to_string(exponent));
}

UtilityFunction UtilityFunction::scaled_power(double scale, double exponent) {
    return UtilityFunction(Family::ScaledPower, scale, exponent);
}

double UtilityFunction::value(double q) const {
    if (q < 0.0) throw std::domain_error("utility value: quantity must be nonnegative");
    if (q == 0.0) return 0.0;
    return scale_ * std::pow(q, exponent_);
}

double UtilityFunction::marginal(double q) const {
    if (!(q > 0.0)) throw std::domain_error("marginal utility: quantity must be positive");
    return scale_ * exponent_ * std::pow(q, exponent_ - 1.0);
}

double UtilityFunction::marginal_inverse(double x) const {
    if (!(x > 0.0))
        throw std::domain_error("marginal_inverse: marginal value must be positive");
    return std::pow(x / (scale_ * exponent_), 1.0 / (exponent_ - 1.0));
}

double UtilityFunction::inverse(double v) const {
    if (v < 0.0) throw std::domain_error("utility inverse: value must be nonnegative");
    if (v == 0.0) return 0.0;
    return std::pow(v / scale_, 1.0 / exponent_);
}

double marginal_inverse_bisect(const UtilityFunction& u, double x) {
    if (!(x > 0.0))
        throw std::domain_error("marginal_inverse_bisect: marginal value must be positive");
    // u' is strictly decreasing and spans (0, inf), so a bracket always exists.
    return solve_decreasing([&u](double q) { return u.marginal(q); }, x, 1.0);
}

double certainty_equivalent(const UtilityFunction& u,
                            std::span<const std::pair<double, double>> lottery) {
    if (lottery.empty())
        throw std::invalid_argument("certainty_equivalent: lottery must be nonempty");
    double total_weight = 0.0;
    double expected_value = 0.0;
    for (const auto& [quantity, weight] : lottery) {
        if (weight < 0.0)
            throw std::invalid_argument("certainty_equivalent: weights must be nonnegative");
        total_weight += weight;
        expected_value += weight * u.value(quantity);
    }
    if (std::fabs(total_weight - 1.0) > 1e-12)
        throw std::invalid_argument("certainty_equivalent: weights must sum to 1, got " +
                                    std::to_string(total_weight));
    return u.inverse(expected_value);
}

} // namespace rcp
