#include "rcp/distribution.hpp"

#include "rcp/errors.hpp"
#include "rcp/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace rcp {

namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr double kMergeTol = 1e-12;

std::int64_t canonical_key(double x) { return std::llround(x * 1e12); }

// Weights proportional to exp(eta * values[j]), with eta chosen so the
// weighted mean of values equals target. The attainable means span the open
// interval (min value, max value); eta = 0 recovers uniform weights.
std::vector<double> tilted_weights(const std::vector<double>& values, double target) {
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (target < lo - 1e-12 || target > hi + 1e-12)
        throw ConfigError("tilted weights: target mean " + std::to_string(target) +
                          " outside the grid range [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");

    const auto weights_for = [&](double eta) {
        // anchor at the dominating end so every factor is <= 1
        const double ref = eta > 0.0 ? hi : lo;
        std::vector<double> w(values.size());
        double total = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) {
            w[j] = std::exp(eta * (values[j] - ref));
            total += w[j];
        }
        for (double& x : w) x /= total;
        return w;
    };
    const auto mean_for = [&](double eta) {
        const auto w = weights_for(eta);
        double m = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) m += w[j] * values[j];
        return m;
    };

    if (std::fabs(mean_for(0.0) - target) <= 1e-13) return weights_for(0.0);

    // mean_for is strictly increasing in eta; expand a bracket then bisect
    double eta_lo = -1.0, eta_hi = 1.0;
    int guard = 0;
    while (mean_for(eta_lo) > target) {
        eta_lo *= 2.0;
        if (++guard > 200) throw NumericError("tilted weights: bracket expansion failed (low)");
    }
    guard = 0;
    while (mean_for(eta_hi) < target) {
        eta_hi *= 2.0;
        if (++guard > 200) throw NumericError("tilted weights: bracket expansion failed (high)");
    }
    double eta = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
        eta = 0.5 * (eta_lo + eta_hi);
        const double m = mean_for(eta);
        if (std::fabs(m - target) <= 1e-14 * std::max(1.0, std::fabs(target))) break;
        if (m < target)
            eta_lo = eta;
        else
            eta_hi = eta;
    }
    return weights_for(eta);
}

TypeVector diagonal_point(std::size_t dimension, double component) {
    return TypeVector(std::vector<double>(dimension, component));
}

} // namespace

TypeVector::TypeVector(std::vector<double> components) : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("type vector must be nonempty");
    for (double c : components_)
        if (!(c >= 0.0 && c <= 1.0))
            throw std::invalid_argument("type component " + std::to_string(c) +
                                        " outside [0, 1]");
}

double TypeVector::sum() const {
    return std::accumulate(components_.begin(), components_.end(), 0.0);
}

DiscreteDistribution::DiscreteDistribution(std::vector<TypeVector> support,
                                           std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
    if (support_.empty()) throw std::invalid_argument("distribution support must be nonempty");
    if (support_.size() != weights_.size())
        throw std::invalid_argument("distribution support and weights differ in length");
    const std::size_t dim = support_.front().dimension();
    double total = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
        if (support_[i].dimension() != dim)
            throw std::invalid_argument("distribution support points differ in dimension");
        if (weights_[i] < 0.0)
            throw std::invalid_argument("distribution weights must be nonnegative");
        total += weights_[i];
    }
    if (std::fabs(total - 1.0) > kWeightSumTol)
        throw std::invalid_argument("distribution weights sum to " + std::to_string(total) +
                                    ", expected 1");
    std::set<std::vector<std::int64_t>> seen;
    for (const auto& point : support_) {
        std::vector<std::int64_t> key(dim);
        for (std::size_t i = 0; i < dim; ++i) key[i] = canonical_key(point[i]);
        if (!seen.insert(std::move(key)).second)
            throw std::invalid_argument("distribution support contains duplicate points");
    }
}

Scenario::Scenario(int num_services_, double unit_cost_, double mean_total_demand_,
                   UtilityFunction utility_)
    : num_services(num_services_), unit_cost(unit_cost_),
      mean_total_demand(mean_total_demand_), utility(utility_) {
    if (num_services < 1) throw std::invalid_argument("K must be a positive integer");
    if (!(unit_cost > 0.0)) throw std::invalid_argument("unit cost c must be positive");
    if (!(mean_total_demand > 0.0 && mean_total_demand < double(num_services)))
        throw std::invalid_argument("mean total demand must satisfy 0 < lambda < K, got "
                                    "lambda = " + std::to_string(mean_total_demand) +
                                    " with K = " + std::to_string(num_services));
}

double mean_sum(const DiscreteDistribution& F) {
    double m = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) m += F.weight(i) * F.point(i).sum();
    return m;
}

bool validate_in_F(const DiscreteDistribution& F, const Scenario& scenario, double tol) {
    if (tol < 0.0) throw std::invalid_argument("validate_in_F: tolerance must be nonnegative");
    if (F.dimension() != std::size_t(scenario.num_services)) return false;
    return std::fabs(mean_sum(F) - scenario.mean_total_demand) <= tol;
}

DiscreteDistribution diagonal_dirac(const Scenario& scenario) {
    const double component = scenario.mean_total_demand / scenario.num_services;
    return DiscreteDistribution({diagonal_point(std::size_t(scenario.num_services), component)},
                                {1.0});
}

DiscreteDistribution diagonal_pushforward(const DiscreteDistribution& F) {
    const std::size_t dim = F.dimension();

    struct Atom {
        double diagonal_component;
        double weight;
    };
    std::vector<Atom> atoms;
    atoms.reserve(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
        const TypeVector& point = F.point(i);
        // an already-diagonal point keeps its component bitwise so repeated
        // application is an exact fixed point
        bool diagonal = true;
        for (std::size_t j = 1; j < dim; ++j)
            if (point[j] != point[0]) {
                diagonal = false;
                break;
            }
        const double component = diagonal ? point[0] : point.sum() / double(dim);
        atoms.push_back({component, F.weight(i)});
    }

    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
        return a.diagonal_component < b.diagonal_component;
    });

    // merge atoms whose sums agree within the tolerance; the representative is
    // the weighted mean so the total-demand mean is preserved
    std::vector<TypeVector> support;
    std::vector<double> weights;
    std::size_t i = 0;
    while (i < atoms.size()) {
        std::size_t j = i + 1;
        while (j < atoms.size() && double(dim) * (atoms[j].diagonal_component -
                                                  atoms[j - 1].diagonal_component) <= kMergeTol)
            ++j;
        double cluster_weight = 0.0;
        double weighted_component = 0.0;
        for (std::size_t k = i; k < j; ++k) {
            cluster_weight += atoms[k].weight;
            weighted_component += atoms[k].weight * atoms[k].diagonal_component;
        }
        const double component =
            cluster_weight > 0.0 ? weighted_component / cluster_weight
                                 : atoms[i].diagonal_component;
        support.push_back(diagonal_point(dim, std::min(1.0, std::max(0.0, component))));
        weights.push_back(cluster_weight);
        i = j;
    }
    return DiscreteDistribution(std::move(support), std::move(weights));
}

DiscreteDistribution two_point(const Scenario& scenario, double s_lo, double s_hi) {
    if (!(s_lo >= 0.0 && s_hi <= 1.0 && s_lo <= s_hi))
        throw ConfigError("two_point: component values must satisfy 0 <= s_lo <= s_hi <= 1");
    const double K = double(scenario.num_services);
    const double target = scenario.mean_total_demand;
    if (target < K * s_lo - 1e-12 || target > K * s_hi + 1e-12)
        throw ConfigError("two_point: mean lambda/K = " + std::to_string(target / K) +
                          " outside [s_lo, s_hi] = [" + std::to_string(s_lo) + ", " +
                          std::to_string(s_hi) + "]");
    const std::size_t dim = std::size_t(scenario.num_services);
    if (s_hi == s_lo) return DiscreteDistribution({diagonal_point(dim, s_lo)}, {1.0});

    const double w_lo = (K * s_hi - target) / (K * s_hi - K * s_lo);
    if (w_lo <= 1e-15) return DiscreteDistribution({diagonal_point(dim, s_hi)}, {1.0});
    if (w_lo >= 1.0 - 1e-15) return DiscreteDistribution({diagonal_point(dim, s_lo)}, {1.0});
    return DiscreteDistribution({diagonal_point(dim, s_lo), diagonal_point(dim, s_hi)},
                                {w_lo, 1.0 - w_lo});
}

DiscreteDistribution diagonal_grid(const Scenario& scenario, int n) {
    if (n < 2) throw ConfigError("diagonal_grid: need at least 2 grid points");
    const std::size_t dim = std::size_t(scenario.num_services);
    std::vector<double> components(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) components[std::size_t(j)] = double(j) / double(n - 1);
    const auto weights =
        tilted_weights(components, scenario.mean_total_demand / double(scenario.num_services));
    std::vector<TypeVector> support;
    support.reserve(components.size());
    for (double c : components) support.push_back(diagonal_point(dim, c));
    return DiscreteDistribution(std::move(support), weights);
}

DiscreteDistribution independent_discrete_uniform(const Scenario& scenario, int n,
                                                  std::size_t cap) {
    if (n < 2) throw ConfigError("independent_discrete_uniform: need at least 2 grid points");
    const int K = scenario.num_services;
    double size_check = 1.0;
    for (int i = 0; i < K; ++i) size_check *= double(n);
    if (size_check > double(cap))
        throw ConfigError("independent_discrete_uniform: " + std::to_string(n) + "^" +
                          std::to_string(K) + " support points exceed the cap of " +
                          std::to_string(cap) + "; use a coarser grid");

    std::vector<double> marginal_values(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) marginal_values[std::size_t(j)] = double(j) / double(n - 1);
    const auto marginal_weights =
        tilted_weights(marginal_values, scenario.mean_total_demand / double(K));

    std::vector<TypeVector> support;
    std::vector<double> weights;
    std::vector<int> index(std::size_t(K), 0);
    while (true) {
        std::vector<double> components(static_cast<std::size_t>(K));
        double w = 1.0;
        for (int i = 0; i < K; ++i) {
            components[std::size_t(i)] = marginal_values[std::size_t(index[std::size_t(i)])];
            w *= marginal_weights[std::size_t(index[std::size_t(i)])];
        }
        support.emplace_back(std::move(components));
        weights.push_back(w);
        int pos = K - 1;
        while (pos >= 0 && ++index[std::size_t(pos)] == n) {
            index[std::size_t(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    // renormalize away accumulated rounding in the weight products
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= total;
    return DiscreteDistribution(std::move(support), std::move(weights));
}

std::vector<TypeVector> product_grid(const Scenario& scenario, int points_per_dim,
                                     std::size_t cap) {
    if (points_per_dim < 2) throw ConfigError("product_grid: need at least 2 points per dim");
    const int K = scenario.num_services;
    double size_check = 1.0;
    for (int i = 0; i < K; ++i) size_check *= double(points_per_dim);
    if (size_check > double(cap))
        throw ConfigError("product_grid: " + std::to_string(points_per_dim) + "^" +
                          std::to_string(K) + " lattice points exceed the cap of " +
                          std::to_string(cap) + "; use a coarser grid");

    std::vector<TypeVector> grid;
    grid.reserve(std::size_t(size_check));
    std::vector<int> index(std::size_t(K), 0);
    while (true) {
        std::vector<double> components(static_cast<std::size_t>(K));
        for (int i = 0; i < K; ++i)
            components[std::size_t(i)] =
                double(index[std::size_t(i)]) / double(points_per_dim - 1);
        grid.emplace_back(std::move(components));
        int pos = K - 1;
        while (pos >= 0 && ++index[std::size_t(pos)] == points_per_dim) {
            index[std::size_t(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return grid;
}

} // namespace rcp
