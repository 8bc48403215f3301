// Per-service valuation curves: strictly increasing, strictly concave, with
// unbounded marginal value at zero and vanishing marginal value at infinity.
#pragma once

#include <span>
#include <utility>

namespace rcp {

/**
 * Scaled-power valuation u(q) = a * q^alpha with a > 0 and 0 < alpha < 1.
 *
 * The family satisfies u(0) = 0, u'(0+) = inf and u'(q) -> 0 as q -> inf,
 * and every branch (value, marginal, both inverses) has a closed form, which
 * lets numeric solvers be cross-checked exactly.
 */
class UtilityFunction {
  public:
    enum class Family { ScaledPower };

    static UtilityFunction scaled_power(double scale, double exponent);

    // u(q); requires q >= 0
    double value(double q) const;

    // u'(q); requires q > 0 (the marginal diverges at 0)
    double marginal(double q) const;

    // unique q with u'(q) = x; requires x > 0
    double marginal_inverse(double x) const;

    // unique q with u(q) = v; requires v >= 0
    double inverse(double v) const;

    Family family() const { return family_; }
    double scale() const { return scale_; }
    double exponent() const { return exponent_; }

  private:
    UtilityFunction(Family family, double scale, double exponent);

    Family family_;
    double scale_;
    double exponent_;
};

// Bisection route to u'^{-1}(x): bracket expansion followed by bisection to
// relative tolerance 1e-12. Agrees with the closed form; kept as the
// independent cross-check and as the fallback for families without one.
double marginal_inverse_bisect(const UtilityFunction& u, double x);

/**
 * Certainty equivalent of a finite lottery over quantities: the deterministic
 * q' with u(q') equal to the lottery's expected utility. Concavity puts q' at
 * or below the lottery's expected quantity.
 *
 * @param lottery (quantity, weight) pairs; weights must be nonnegative and
 *                sum to 1 within 1e-12.
 */
double certainty_equivalent(const UtilityFunction& u,
                            std::span<const std::pair<double, double>> lottery);

} // namespace rcp
