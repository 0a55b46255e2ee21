#ifndef BATTPOA_ORACLE_HPP
#define BATTPOA_ORACLE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "battpoa/demand.hpp"
#include "battpoa/market.hpp"

namespace battpoa {

// Independent numerical checks of the closed-form regime results.

struct ScenarioBranch {
    double d2 = 0.0;
    double prob = 0.0;  // conditional on the parent node
};

struct ScenarioNode {
    double d1 = 0.0;
    double prob = 0.0;
    std::vector<ScenarioBranch> branches;
};

// Two-stage discretization of (D1, D2): period-1 nodes, each carrying the
// conditional distribution of D2.
class ScenarioTree {
public:
    // Throws std::invalid_argument if probabilities are negative or a level
    // does not sum to 1 within 1e-12.
    explicit ScenarioTree(std::vector<ScenarioNode> nodes);

    std::span<const ScenarioNode> nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }

    double mean_d1() const { return mean_d1_; }
    double mean_d2() const { return mean_d2_; }
    double conditional_mean(std::size_t node) const { return cond_mean_[node]; }

private:
    std::vector<ScenarioNode> nodes_;
    std::vector<double> cond_mean_;
    double mean_d1_ = 0.0;
    double mean_d2_ = 0.0;
};

struct QuadratureRule {
    std::vector<double> nodes;    // standard normal abscissae, ascending
    std::vector<double> weights;  // sum to 1
};

// Gauss-Hermite rule for E[f(Z)], Z ~ N(0, 1). Exact for polynomials of
// degree <= 2n - 1.
QuadratureRule gauss_hermite(std::size_t n);

// Product rule: D1 on n nodes, D2 | D1 on n nodes. A zero standard
// deviation collapses that level to a single node.
ScenarioTree gauss_hermite_tree(const NormalJointDemand& dist, std::size_t n = 16);

// Exact support: one node per distinct d1, one branch per observation.
ScenarioTree support_tree(const EmpiricalJointDemand& dist);

ScenarioTree scenario_tree(const JointDemand& dist, std::size_t n = 16);

struct NumericSolution {
    double z1_da = 0.0;
    std::vector<double> z1_rt_per_node;
    double objective = 0.0;         // expected cost ($) or profit ($)
    double foc_residual_max = 0.0;  // first-order conditions at the solution
    // The optimum is not unique (beta = 0, or k_f = 1 for the centralized
    // problem). The optimal schedule with the least expected squared
    // real-time discharge is returned; all zeros when beta = 0.
    bool degenerate = false;
};

// Minimizes the tree-discretized generation cost over z1_da and one
// real-time discharge per period-1 node.
NumericSolution solve_centralized(const SupplyCurve& curve, const ScenarioTree& tree);

// Maximizes the battery's tree-discretized profit with full price impact.
NumericSolution solve_decentralized(const SupplyCurve& curve, const ScenarioTree& tree);

enum class Regime { centralized, decentralized };

// Maximum absolute residual over the first-order conditions (one per node
// plus the day-ahead equation), written in MW as in the derivations:
//
//   centralized, node i:  -k_f dmu + 2 k_f z_da - (d1_i - mu1) + (m_i - mu2) + 2 z_i
//   centralized, DA:      (mu2 - mu1 + 2 z_da) + 2 E[z]
//   decentralized, node:  k_f (dmu - 2 z_da) + (d1_i - mu1) - (m_i - mu2) - 4 z_i
//   decentralized, DA:    (dmu - 4 z_da) - 2 E[z]
//
// with m_i the tree's conditional mean and mu the tree's means.
double foc_residuals(const SupplyCurve& curve, const ScenarioTree& tree, double z1_da,
                     std::span<const double> z1_rt_per_node, Regime regime);

// Evaluates the schedule's policy at each node using the tree's conditional mean.
double foc_residuals(const SupplyCurve& curve, const DispatchSchedule& schedule,
                     const ScenarioTree& tree, Regime regime);

// Direct scenario sums, used to cross-check the assembled quadratic models.
double discretized_cost(const SupplyCurve& curve, const ScenarioTree& tree, double z1_da,
                        std::span<const double> z1_rt_per_node);
double discretized_profit(const SupplyCurve& curve, const ScenarioTree& tree, double z1_da,
                          std::span<const double> z1_rt_per_node);

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

// Any measurable real-time rule d1 -> z1_rt.
using RtRule = std::function<double(double d1)>;

MonteCarloEstimate monte_carlo_cost(const SupplyCurve& curve, const DispatchSchedule& schedule,
                                    const JointDemand& dist, std::size_t n, std::uint64_t seed);
MonteCarloEstimate monte_carlo_cost(const SupplyCurve& curve, double z1_da, const RtRule& rule,
                                    const JointDemand& dist, std::size_t n, std::uint64_t seed);
MonteCarloEstimate monte_carlo_profit(const SupplyCurve& curve, const DispatchSchedule& schedule,
                                      const JointDemand& dist, std::size_t n, std::uint64_t seed);

struct IdentityCheck {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double expected = 0.0;

    // |estimate - expected| <= sigmas * std_error, plus a rounding floor.
    bool passes(double sigmas) const;
};

// Monte Carlo estimates of the seven conditional-moment identities.
std::vector<IdentityCheck> check_conditional_identities(const JointDemand& dist, std::size_t n,
                                                        std::uint64_t seed);

// Random parameter sets for the closed-form cross-check: alpha in [0, 50],
// beta in (0, 5], k_f in [0.05, 1], mu in [0, 5e4], sigma in [0, 5e3],
// rho in [-0.95, 0.95]. Deterministic in seed.
struct OracleFixture {
    double alpha = 0.0;
    double beta = 0.0;
    double k_f = 1.0;
    DemandMoments moments;
};

std::vector<OracleFixture> random_fixtures(std::uint64_t seed, std::size_t count);

// Closed-form schedules and costs against the Gauss-Hermite numeric optimum.
// Schedule errors are per node, relative to max(1 MW, largest closed-form
// decision); cost errors are relative to max(1, |closed-form cost|).
struct FixtureComparison {
    double schedule_rel_cn = 0.0;
    double schedule_rel_dcn = 0.0;
    double cost_rel_cn = 0.0;
    double cost_rel_dcn = 0.0;
    double foc_cn = 0.0;   // residual of the closed-form centralized schedule
    double foc_dcn = 0.0;  // residual of the closed-form decentralized schedule
};

FixtureComparison compare_closed_form(const OracleFixture& fixture, std::size_t gh_nodes = 16);

}  // namespace battpoa

#endif  // BATTPOA_ORACLE_HPP
