// Demand types, finite-support type distributions, the mean-total-demand
// constraint set, and named distribution families.
#pragma once

#include "rcp/utility.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rcp {

// Realized demand vector, one component per service, each in [0, 1].
class TypeVector {
  public:
    explicit TypeVector(std::vector<double> components);

    std::size_t dimension() const { return components_.size(); }
    double operator[](std::size_t i) const { return components_[i]; }
    const std::vector<double>& components() const { return components_; }
    double sum() const;

  private:
    std::vector<double> components_;
};

/**
 * Finite-support probability measure over the type space [0,1]^K.
 *
 * Weights are nonnegative and sum to 1 within 1e-12; all support points share
 * one dimension; support points must be distinct after rounding coordinates
 * to the nearest multiple of 1e-12.
 */
class DiscreteDistribution {
  public:
    DiscreteDistribution(std::vector<TypeVector> support, std::vector<double> weights);

    std::size_t size() const { return support_.size(); }
    std::size_t dimension() const { return support_.front().dimension(); }
    const TypeVector& point(std::size_t i) const { return support_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<TypeVector>& support() const { return support_; }
    const std::vector<double>& weights() const { return weights_; }

  private:
    std::vector<TypeVector> support_;
    std::vector<double> weights_;
};

// Problem instance: K services, unit cost, known mean total demand, valuation.
struct Scenario {
    int num_services;         // K
    double unit_cost;         // cost per unit of total quantity
    double mean_total_demand; // expected sum of demands, in (0, K)
    UtilityFunction utility;

    Scenario(int num_services, double unit_cost, double mean_total_demand,
             UtilityFunction utility);
};

// E_F[theta_1 + ... + theta_K]
double mean_sum(const DiscreteDistribution& F);

// Membership in the moment set: mean total demand matches the scenario's
// within tol and the dimension matches K.
bool validate_in_F(const DiscreteDistribution& F, const Scenario& scenario, double tol);

// Point mass at the diagonal type with every component lambda / K.
DiscreteDistribution diagonal_dirac(const Scenario& scenario);

/**
 * Projects a distribution onto the diagonal while preserving the distribution
 * of the total demand: each support point maps to (s/K, ..., s/K) where s is
 * its component sum, and points whose sums agree within 1e-12 are merged.
 * Preserves mean total demand and is idempotent.
 */
DiscreteDistribution diagonal_pushforward(const DiscreteDistribution& F);

// Two diagonal atoms at component values s_lo and s_hi, weighted so the mean
// total demand equals the scenario's. Requires lambda/K in [s_lo, s_hi].
DiscreteDistribution two_point(const Scenario& scenario, double s_lo, double s_hi);

// n diagonal atoms on an even grid over [0, 1], exponentially tilted so the
// mean total demand equals the scenario's. Requires n >= 2.
DiscreteDistribution diagonal_grid(const Scenario& scenario, int n);

// Product measure of K iid marginals on an n-point grid over [0, 1], each
// marginal tilted to mean lambda/K so the total hits the scenario's mean.
DiscreteDistribution independent_discrete_uniform(const Scenario& scenario, int n,
                                                  std::size_t cap = 1'000'000);

// Uniform lattice on [0,1]^K including all corners. Errors when
// points_per_dim^K exceeds the cap.
std::vector<TypeVector> product_grid(const Scenario& scenario, int points_per_dim,
                                     std::size_t cap = 1'000'000);

} // namespace rcp
