// Invariant suite: seeded, tolerance-based checks over the solver's exact
// identities and dominance properties. Shared by the verify command and the
// acceptance harness.
#pragma once

#include "rcp/config.hpp"
#include "rcp/distribution.hpp"
#include "rcp/mechanism.hpp"
#include "rcp/robust.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rcp {

struct CheckOutcome {
    std::string name;
    bool pass = false;
    long checks = 0;    // individual assertions evaluated
    double worst = 0.0; // largest residual / excess observed
    std::string detail; // deterministic summary; includes a witness on failure
};

// Closed-form evaluation against the numeric routes: inverse round-trips,
// central-difference derivative agreement, monotonicity, the bisection
// fallback, and certainty-equivalent dominance.
CheckOutcome check_utility_roundtrips(const Scenario& scenario, int samples,
                                      std::uint64_t seed);

// Random (contract, type) pairs: stationarity residual <= 1e-8 * mu,
// commitment shortfall <= 1e-9, and for a subsample the response beats random
// feasible perturbations.
CheckOutcome check_kkt_residuals(const Scenario& scenario, int samples, int perturb_cases,
                                 int perturbations, std::uint64_t seed);

// Random lottery mechanisms on small type grids: certainty equivalents keep
// every (type, report) utility within 1e-10 and weakly shrink each type's
// total allocation.
CheckOutcome check_derandomization(const Scenario& scenario, int mechanisms,
                                   std::uint64_t seed);

// Random finite distributions: the diagonal projection preserves the demand
// sum distribution and the mean, and is idempotent.
CheckOutcome check_pushforward(int dimension, int samples, std::uint64_t seed);

// Per-type profit of a committed-spend contract equals the scenario's
// guarantee (max abs error 1e-9); detects any corruption of the contract.
CheckOutcome check_profit_identity(const Scenario& scenario,
                                   const CommittedSpendContract& contract, int samples,
                                   std::uint64_t seed);

// Both worst-case routes agree within 1e-8 on every mechanism and resolution
// level, and each reported distribution reproduces its guarantee.
CheckOutcome check_method_agreement(const Scenario& scenario,
                                    std::span<const Mechanism> mechanisms,
                                    std::span<const int> levels, std::size_t cap);

// Random IR-calibrated menus never beat the guarantee (wraps
// certify_upper_bound).
CheckOutcome check_upper_bound(const Scenario& scenario, int n_menus, std::uint64_t seed);

// Whenever the optimal contract's floor is slack, the response equals the
// surplus-maximizing allocation u'^{-1}(c / theta_i) componentwise.
CheckOutcome check_efficiency(const Scenario& scenario, int samples, std::uint64_t seed);

// IR slack of every configured (or default) mechanism under the configured
// (or default) distributions.
CheckOutcome check_ir_slack(const RunConfig& config);

// The full suite in a fixed order, honoring the config's mechanism,
// distribution, adversary, and verify blocks.
std::vector<CheckOutcome> run_verification(const RunConfig& config);

} // namespace rcp
