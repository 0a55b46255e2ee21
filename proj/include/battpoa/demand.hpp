#ifndef BATTPOA_DEMAND_HPP
#define BATTPOA_DEMAND_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace battpoa {

// Marginal moments of the peak (period 1) and off-peak (period 2) net
// demand, in MW. rho is the Pearson correlation; rho_s is the sequential
// correlation, Var(E[D2|D1]) = rho_s^2 sigma2^2.
struct DemandMoments {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double rho = 0.0;
    double rho_s = 0.0;

    double delta_mu() const { return mu1 - mu2; }
};

// Throws std::invalid_argument if the moments violate their invariants.
void validate(const DemandMoments& m);

struct ConditionalMoments {
    double mu2_given_d1 = 0.0;
    double var2_given_d1 = 0.0;
};

struct DemandPair {
    double d1 = 0.0;
    double d2 = 0.0;

    friend bool operator==(const DemandPair&, const DemandPair&) = default;
};

// Bivariate normal (D1, D2). The sequential correlation equals rho.
class NormalJointDemand {
public:
    // A zero standard deviation forces rho to 0. rho_s in the argument is
    // ignored and replaced by rho.
    explicit NormalJointDemand(const DemandMoments& m);
    NormalJointDemand(double mu1, double mu2, double sigma1, double sigma2, double rho);

    const DemandMoments& moments() const { return moments_; }
    ConditionalMoments conditional(double d1) const;

private:
    DemandMoments moments_;
};

// The uniform distribution over a finite list of observed day pairs.
//
// E[D2 | D1] is estimated on K equal-mass quantile bins of d1. Tied d1
// values never straddle a bin boundary. Inside each bin d2 is regressed on
// d1 by least squares, so the residual D2 - E[D2|D1] is orthogonal to every
// function of D1 that is affine within bins. This makes the conditional
// identities E[(D2 - m(D1)) f(D1)] = 0 hold exactly on the sample.
class EmpiricalJointDemand {
public:
    static constexpr std::size_t kDefaultBins = 10;

    // bin_count = 0 selects min(kDefaultBins, distinct d1 values).
    explicit EmpiricalJointDemand(std::vector<DemandPair> pairs, std::size_t bin_count = 0);

    std::span<const DemandPair> pairs() const { return pairs_; }
    std::size_t bin_count() const { return bins_.size(); }
    const DemandMoments& moments() const { return moments_; }

    // Out-of-sample d1 uses the fit of the nearest bin.
    ConditionalMoments conditional(double d1) const;

    // Conditional mean evaluated at each stored pair, in pair order.
    std::span<const double> fitted_conditional_means() const { return fitted_; }

private:
    struct Bin {
        double lo = 0.0;  // smallest d1 in bin
        double hi = 0.0;  // largest d1 in bin
        double intercept = 0.0;
        double slope = 0.0;
        double residual_var = 0.0;
    };

    const Bin& bin_for(double d1) const;

    std::vector<DemandPair> pairs_;
    std::vector<Bin> bins_;
    std::vector<double> fitted_;
    DemandMoments moments_;
};

using JointDemand = std::variant<NormalJointDemand, EmpiricalJointDemand>;

ConditionalMoments conditional_moments(const JointDemand& dist, double d1);

// Returns 0 when sigma2 = 0.
double sequential_correlation(const JointDemand& dist);

// Deterministic for a fixed (dist, seed, n). Empirical sampling draws
// stored pairs uniformly with replacement.
std::vector<DemandPair> sample(const JointDemand& dist, std::uint64_t seed, std::size_t n);

// Exact for the normal case; population (1/n) moments for empirical data.
DemandMoments moments(const JointDemand& dist);

}  // namespace battpoa

#endif  // BATTPOA_DEMAND_HPP
