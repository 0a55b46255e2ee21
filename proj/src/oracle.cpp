#include "battpoa/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>

#include "battpoa/regimes.hpp"

namespace battpoa {

ScenarioTree::ScenarioTree(std::vector<ScenarioNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::invalid_argument("scenario tree needs at least one node");
    double total = 0.0;
    for (const auto& n : nodes_) {
        if (!(n.prob >= 0.0) || !std::isfinite(n.d1))
            throw std::invalid_argument("scenario node probabilities must be >= 0");
        if (n.branches.empty()) throw std::invalid_argument("scenario node has no branches");
        total += n.prob;
        double sub = 0.0, cm = 0.0;
        for (const auto& b : n.branches) {
            if (!(b.prob >= 0.0) || !std::isfinite(b.d2))
                throw std::invalid_argument("scenario branch probabilities must be >= 0");
            sub += b.prob;
            cm += b.prob * b.d2;
        }
        if (std::abs(sub - 1.0) > 1e-12)
            throw std::invalid_argument("branch probabilities of a node must sum to 1");
        cond_mean_.push_back(cm);
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("node probabilities must sum to 1");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        mean_d1_ += nodes_[i].prob * nodes_[i].d1;
        mean_d2_ += nodes_[i].prob * cond_mean_[i];
    }
}

QuadratureRule gauss_hermite(std::size_t n) {
    if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
    for (Eigen::Index k = 0; k < sub.size(); ++k) sub[k] = std::sqrt(static_cast<double>(k + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) throw std::runtime_error("Gauss-Hermite eigensolve failed");

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        rule.nodes[i] = eig.eigenvalues()[ii];
        const double v = eig.eigenvectors()(0, ii);
        rule.weights[i] = v * v;
    }
    // The rule is symmetric about 0; enforce it so odd moments vanish exactly.
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (double& w : rule.weights) w /= total;
    return rule;
}

ScenarioTree gauss_hermite_tree(const NormalJointDemand& dist, std::size_t n) {
    const auto& m = dist.moments();
    const auto rule = gauss_hermite(n);
    const QuadratureRule point{{0.0}, {1.0}};
    const auto& outer = m.sigma1 == 0.0 ? point : rule;
    const double cond_sd = m.sigma2 * std::sqrt(std::max(0.0, 1.0 - m.rho * m.rho));
    const auto& inner = cond_sd == 0.0 ? point : rule;

    std::vector<ScenarioNode> nodes;
    nodes.reserve(outer.nodes.size());
    for (std::size_t i = 0; i < outer.nodes.size(); ++i) {
        ScenarioNode node;
        node.d1 = m.mu1 + m.sigma1 * outer.nodes[i];
        node.prob = outer.weights[i];
        const double cm = m.mu2 + m.rho * m.sigma2 * outer.nodes[i];
        for (std::size_t j = 0; j < inner.nodes.size(); ++j)
            node.branches.push_back({cm + cond_sd * inner.nodes[j], inner.weights[j]});
        nodes.push_back(std::move(node));
    }
    return ScenarioTree(std::move(nodes));
}

ScenarioTree support_tree(const EmpiricalJointDemand& dist) {
    std::map<double, std::vector<double>> by_d1;
    for (const auto& p : dist.pairs()) by_d1[p.d1].push_back(p.d2);
    const double n = static_cast<double>(dist.pairs().size());
    std::vector<ScenarioNode> nodes;
    for (const auto& [d1, d2s] : by_d1) {
        ScenarioNode node;
        node.d1 = d1;
        node.prob = static_cast<double>(d2s.size()) / n;
        for (double d2 : d2s)
            node.branches.push_back({d2, 1.0 / static_cast<double>(d2s.size())});
        nodes.push_back(std::move(node));
    }
    return ScenarioTree(std::move(nodes));
}

ScenarioTree scenario_tree(const JointDemand& dist, std::size_t n) {
    if (const auto* normal = std::get_if<NormalJointDemand>(&dist))
        return gauss_hermite_tree(*normal, n);
    return support_tree(std::get<EmpiricalJointDemand>(dist));
}

namespace {

// c0 + sum coef_k x_k over a sparse set of decision variables.
struct Linear {
    double c0 = 0.0;
    std::vector<std::pair<Eigen::Index, double>> terms;
};

// f(x) = 1/2 x'Hx + g'x + c
class QuadraticModel {
public:
    explicit QuadraticModel(Eigen::Index n)
        : h_(Eigen::MatrixXd::Zero(n, n)), g_(Eigen::VectorXd::Zero(n)) {}

    // w (alpha e + beta/2 e^2)
    void add_stage_cost(double w, double alpha, double beta, const Linear& e) {
        for (const auto& [i, a] : e.terms) {
            for (const auto& [j, b] : e.terms) h_(i, j) += w * beta * a * b;
            g_[i] += w * (alpha + beta * e.c0) * a;
        }
        c_ += w * (alpha * e.c0 + 0.5 * beta * e.c0 * e.c0);
    }

    // w p q
    void add_product(double w, const Linear& p, const Linear& q) {
        for (const auto& [i, a] : p.terms)
            for (const auto& [j, b] : q.terms) {
                h_(i, j) += w * a * b;
                h_(j, i) += w * a * b;
            }
        for (const auto& [i, a] : p.terms) g_[i] += w * q.c0 * a;
        for (const auto& [j, b] : q.terms) g_[j] += w * p.c0 * b;
        c_ += w * p.c0 * q.c0;
    }

    // Stationary point Hx = -g. Returns false if it is not unique; then the
    // stationary point minimizing sum_k w_k x_k^2 is returned (zero if H = 0
    // or the system is inconsistent).
    bool stationary_point(Eigen::VectorXd& x, const Eigen::VectorXd& tie_weights) const {
        const Eigen::Index n = g_.size();
        x = Eigen::VectorXd::Zero(n);
        if (h_.cwiseAbs().maxCoeff() == 0.0) return false;
        Eigen::VectorXd scale(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double d = std::abs(h_(k, k));
            scale[k] = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
        }
        const Eigen::MatrixXd a = scale.asDiagonal() * h_ * scale.asDiagonal();
        const Eigen::VectorXd b = -(scale.asDiagonal() * g_);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.rank() == n) {
            x = scale.asDiagonal() * lu.solve(b);
            return true;
        }
        const Eigen::VectorXd xp = lu.solve(b);
        if ((a * xp - b).norm() > 1e-9 * (1.0 + b.norm())) return false;
        const Eigen::MatrixXd null = lu.kernel();
        const Eigen::VectorXd w = (tie_weights.array().sqrt() * scale.array()).matrix();
        const Eigen::MatrixXd lhs = w.asDiagonal() * null;
        const Eigen::VectorXd rhs = -(w.asDiagonal() * xp);
        const Eigen::VectorXd y = lhs.completeOrthogonalDecomposition().solve(rhs);
        x = scale.asDiagonal() * (xp + null * y);
        return false;
    }

private:
    Eigen::MatrixXd h_;
    Eigen::VectorXd g_;
    double c_ = 0.0;
};

// Decision vector layout: x[0] = z1_da, x[1 + i] = z1_rt at node i.
Eigen::Index rt_index(std::size_t node) { return static_cast<Eigen::Index>(node) + 1; }

// Tie-break weights: the expected squared real-time discharge.
Eigen::VectorXd rt_weights(const ScenarioTree& tree) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tree.size()) + 1);
    for (std::size_t i = 0; i < tree.size(); ++i) w[rt_index(i)] = tree.nodes()[i].prob;
    return w;
}

NumericSolution unpack(const Eigen::VectorXd& x, bool ok) {
    NumericSolution s;
    s.z1_da = x[0];
    s.z1_rt_per_node.assign(x.data() + 1, x.data() + x.size());
    s.degenerate = !ok;
    return s;
}

std::vector<double> policy_at_nodes(const DispatchSchedule& schedule, const ScenarioTree& tree) {
    std::vector<double> z(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i)
        z[i] = schedule.z1_rt(tree.nodes()[i].d1, tree.conditional_mean(i));
    return z;
}

void check_sizes(const ScenarioTree& tree, std::span<const double> z) {
    if (z.size() != tree.size())
        throw std::invalid_argument("one real-time discharge per scenario node is required");
}

}  // namespace

NumericSolution solve_centralized(const SupplyCurve& curve, const ScenarioTree& tree) {
    const double mu1 = tree.mean_d1(), mu2 = tree.mean_d2();
    const double kf = curve.k_f(), ks = curve.k_s();
    const double a = curve.alpha(), b = curve.beta();
    const auto n = static_cast<Eigen::Index>(tree.size()) + 1;
    QuadraticModel model(n);

    model.add_stage_cost(ks, a, b, Linear{mu1, {{0, -1.0}}});
    model.add_stage_cost(ks, a, b, Linear{mu2, {{0, 1.0}}});
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& node = tree.nodes()[i];
        const auto r = rt_index(i);
        model.add_stage_cost(kf * node.prob, a, b,
                             Linear{mu1 + (node.d1 - mu1) / kf, {{0, -1.0}, {r, -1.0 / kf}}});
        for (const auto& br : node.branches)
            model.add_stage_cost(kf * node.prob * br.prob, a, b,
                                 Linear{mu2 + (br.d2 - mu2) / kf, {{0, 1.0}, {r, 1.0 / kf}}});
    }

    Eigen::VectorXd x;
    const bool ok = model.stationary_point(x, rt_weights(tree));
    auto s = unpack(x, ok);
    s.objective = discretized_cost(curve, tree, s.z1_da, s.z1_rt_per_node);
    s.foc_residual_max = foc_residuals(curve, tree, s.z1_da, s.z1_rt_per_node, Regime::centralized);
    return s;
}

NumericSolution solve_decentralized(const SupplyCurve& curve, const ScenarioTree& tree) {
    const double mu1 = tree.mean_d1(), mu2 = tree.mean_d2();
    const double kf = curve.k_f();
    const double a = curve.alpha(), b = curve.beta();
    const auto n = static_cast<Eigen::Index>(tree.size()) + 1;
    QuadraticModel model(n);

    // Day ahead: lambda1 z1 + lambda2 z2 with z2 = -z1.
    model.add_product(1.0, Linear{a + b * mu1, {{0, -b}}}, Linear{0.0, {{0, 1.0}}});
    model.add_product(1.0, Linear{a + b * mu2, {{0, b}}}, Linear{0.0, {{0, -1.0}}});
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& node = tree.nodes()[i];
        const auto r = rt_index(i);
        const Linear lambda1{a + b * (mu1 + (node.d1 - mu1) / kf), {{0, -b}, {r, -b / kf}}};
        model.add_product(node.prob, lambda1, Linear{0.0, {{r, 1.0}}});
        for (const auto& br : node.branches) {
            const Linear lambda2{a + b * (mu2 + (br.d2 - mu2) / kf), {{0, b}, {r, b / kf}}};
            model.add_product(node.prob * br.prob, lambda2, Linear{0.0, {{r, -1.0}}});
        }
    }

    Eigen::VectorXd x;
    const bool ok = model.stationary_point(x, rt_weights(tree));
    auto s = unpack(x, ok);
    s.objective = discretized_profit(curve, tree, s.z1_da, s.z1_rt_per_node);
    s.foc_residual_max =
        foc_residuals(curve, tree, s.z1_da, s.z1_rt_per_node, Regime::decentralized);
    return s;
}

double foc_residuals(const SupplyCurve& curve, const ScenarioTree& tree, double z1_da,
                     std::span<const double> z, Regime regime) {
    check_sizes(tree, z);
    const double mu1 = tree.mean_d1(), mu2 = tree.mean_d2();
    const double dmu = mu1 - mu2;
    const double kf = curve.k_f();
    double worst = 0.0, mean_rt = 0.0;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const double y = tree.nodes()[i].d1 - mu1;
        const double m = tree.conditional_mean(i) - mu2;
        const double r = regime == Regime::centralized
                             ? -kf * dmu + 2.0 * kf * z1_da - y + m + 2.0 * z[i]
                             : kf * (dmu - 2.0 * z1_da) + y - m - 4.0 * z[i];
        worst = std::max(worst, std::abs(r));
        mean_rt += tree.nodes()[i].prob * z[i];
    }
    const double da = regime == Regime::centralized ? (-dmu + 2.0 * z1_da) + 2.0 * mean_rt
                                                    : (dmu - 4.0 * z1_da) - 2.0 * mean_rt;
    return std::max(worst, std::abs(da));
}

double foc_residuals(const SupplyCurve& curve, const DispatchSchedule& schedule,
                     const ScenarioTree& tree, Regime regime) {
    const auto z = policy_at_nodes(schedule, tree);
    return foc_residuals(curve, tree, schedule.z1_da, z, regime);
}

double discretized_cost(const SupplyCurve& curve, const ScenarioTree& tree, double z1_da,
                        std::span<const double> z) {
    check_sizes(tree, z);
    const double mu1 = tree.mean_d1(), mu2 = tree.mean_d2();
    double total = 0.0;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& node = tree.nodes()[i];
        double inner = 0.0;
        for (const auto& br : node.branches)
            inner += br.prob *
                     realized_cost(curve, outcome(curve, z1_da, z[i], mu1, mu2, node.d1, br.d2));
        total += node.prob * inner;
    }
    return total;
}

double discretized_profit(const SupplyCurve& curve, const ScenarioTree& tree, double z1_da,
                          std::span<const double> z) {
    check_sizes(tree, z);
    const double mu1 = tree.mean_d1(), mu2 = tree.mean_d2();
    double total = 0.0;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& node = tree.nodes()[i];
        double inner = 0.0;
        for (const auto& br : node.branches)
            inner += br.prob * realized_profit(
                                   outcome(curve, z1_da, z[i], mu1, mu2, node.d1, br.d2), z1_da,
                                   z[i]);
        total += node.prob * inner;
    }
    return total;
}

namespace {

// Welford running mean and variance; exact for constant streams.
class RunningStats {
public:
    void push(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }
    double mean() const { return mean_; }
    double std_error() const {
        if (n_ < 2) return 0.0;
        const double var = m2_ / static_cast<double>(n_ - 1);
        return std::sqrt(std::max(0.0, var) / static_cast<double>(n_));
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

void check_count(std::size_t n) {
    if (n < 2) throw std::invalid_argument("Monte Carlo needs at least 2 samples");
}

RtRule schedule_rule(const DispatchSchedule& schedule, const JointDemand& dist) {
    return [&schedule, &dist](double d1) {
        return schedule.z1_rt(d1, conditional_moments(dist, d1).mu2_given_d1);
    };
}

}  // namespace

MonteCarloEstimate monte_carlo_cost(const SupplyCurve& curve, double z1_da, const RtRule& rule,
                                    const JointDemand& dist, std::size_t n, std::uint64_t seed) {
    check_count(n);
    const auto m = moments(dist);
    RunningStats stats;
    for (const auto& p : sample(dist, seed, n))
        stats.push(realized_cost(curve, outcome(curve, z1_da, rule(p.d1), m.mu1, m.mu2, p.d1, p.d2)));
    return {stats.mean(), stats.std_error()};
}

MonteCarloEstimate monte_carlo_cost(const SupplyCurve& curve, const DispatchSchedule& schedule,
                                    const JointDemand& dist, std::size_t n, std::uint64_t seed) {
    return monte_carlo_cost(curve, schedule.z1_da, schedule_rule(schedule, dist), dist, n, seed);
}

MonteCarloEstimate monte_carlo_profit(const SupplyCurve& curve, const DispatchSchedule& schedule,
                                      const JointDemand& dist, std::size_t n, std::uint64_t seed) {
    check_count(n);
    const auto m = moments(dist);
    const auto rule = schedule_rule(schedule, dist);
    RunningStats stats;
    for (const auto& p : sample(dist, seed, n)) {
        const double z_rt = rule(p.d1);
        stats.push(realized_profit(outcome(curve, schedule.z1_da, z_rt, m.mu1, m.mu2, p.d1, p.d2),
                                   schedule.z1_da, z_rt));
    }
    return {stats.mean(), stats.std_error()};
}

bool IdentityCheck::passes(double sigmas) const {
    const double floor = 1e-12 * std::max(1.0, std::abs(expected));
    return std::abs(estimate - expected) <= sigmas * std_error + floor;
}

std::vector<IdentityCheck> check_conditional_identities(const JointDemand& dist, std::size_t n,
                                                        std::uint64_t seed) {
    check_count(n);
    const auto m = moments(dist);
    const double v2 = m.sigma2 * m.sigma2;
    const double rs2 = m.rho_s * m.rho_s;

    std::vector<RunningStats> stats(7);
    for (const auto& p : sample(dist, seed, n)) {
        const auto c = conditional_moments(dist, p.d1);
        const double y = p.d1 - m.mu1;
        const double x = p.d2 - m.mu2;
        const double mc = c.mu2_given_d1 - m.mu2;
        const double resid = p.d2 - c.mu2_given_d1;
        stats[0].push(mc * mc);
        stats[1].push(c.var2_given_d1);
        stats[2].push(resid);
        stats[3].push(resid * y);
        stats[4].push(resid * x);
        stats[5].push(y * mc);
        stats[6].push(x * mc);
    }

    const std::pair<const char*, double> targets[] = {
        {"E[(mu2|D1 - mu2)^2] = rho_s^2 sigma2^2", rs2 * v2},
        {"E[var2|D1] = (1 - rho_s^2) sigma2^2", (1.0 - rs2) * v2},
        {"E[D2 - mu2|D1] = 0", 0.0},
        {"E[(D2 - mu2|D1)(D1 - mu1)] = 0", 0.0},
        {"E[(D2 - mu2|D1)(D2 - mu2)] = (1 - rho_s^2) sigma2^2", (1.0 - rs2) * v2},
        {"E[(D1 - mu1)(mu2|D1 - mu2)] = rho sigma1 sigma2", m.rho * m.sigma1 * m.sigma2},
        {"E[(D2 - mu2)(mu2|D1 - mu2)] = rho_s^2 sigma2^2", rs2 * v2},
    };
    std::vector<IdentityCheck> out;
    for (std::size_t k = 0; k < 7; ++k)
        out.push_back({targets[k].first, stats[k].mean(), stats[k].std_error(), targets[k].second});
    return out;
}

}  // namespace battpoa

namespace battpoa {

std::vector<OracleFixture> random_fixtures(std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<OracleFixture> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        OracleFixture f;
        f.alpha = 50.0 * u(rng);
        f.beta = 5.0 * (1.0 - u(rng));
        f.k_f = 0.05 + 0.95 * u(rng);
        auto& m = f.moments;
        m.mu1 = 5e4 * u(rng);
        m.mu2 = 5e4 * u(rng);
        m.sigma1 = 5e3 * u(rng);
        m.sigma2 = 5e3 * u(rng);
        m.rho = -0.95 + 1.9 * u(rng);
        m.rho_s = std::abs(m.rho);
        out.push_back(f);
    }
    return out;
}

namespace {

double schedule_error(const ScenarioTree& tree, const DispatchSchedule& closed,
                      const NumericSolution& numeric) {
    const auto z = policy_at_nodes(closed, tree);
    double scale = std::max(1.0, std::abs(closed.z1_da));
    for (double v : z) scale = std::max(scale, std::abs(v));
    double worst = std::abs(numeric.z1_da - closed.z1_da);
    for (std::size_t i = 0; i < z.size(); ++i)
        worst = std::max(worst, std::abs(numeric.z1_rt_per_node[i] - z[i]));
    return worst / scale;
}

double relative(double value, double reference) {
    return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

}  // namespace

FixtureComparison compare_closed_form(const OracleFixture& f, std::size_t gh_nodes) {
    const SupplyCurve curve(f.alpha, f.beta, f.k_f);
    const NormalJointDemand dist(f.moments);
    const auto& m = dist.moments();
    const auto tree = gauss_hermite_tree(dist, gh_nodes);

    const auto cn = centralized_schedule(JointDemand{dist});
    const auto dcn = decentralized_schedule(curve, JointDemand{dist});
    const auto num_cn = solve_centralized(curve, tree);
    const auto num_dcn = solve_decentralized(curve, tree);

    FixtureComparison c;
    c.schedule_rel_cn = schedule_error(tree, cn, num_cn);
    c.schedule_rel_dcn = schedule_error(tree, dcn, num_dcn);
    c.cost_rel_cn = relative(num_cn.objective, cost_centralized(curve, m));
    c.cost_rel_dcn = relative(discretized_cost(curve, tree, num_dcn.z1_da, num_dcn.z1_rt_per_node),
                              cost_decentralized(curve, m));
    c.foc_cn = foc_residuals(curve, cn, tree, Regime::centralized);
    c.foc_dcn = foc_residuals(curve, dcn, tree, Regime::decentralized);
    return c;
}

}  // namespace battpoa
