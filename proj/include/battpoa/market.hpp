#ifndef BATTPOA_MARKET_HPP
#define BATTPOA_MARKET_HPP

#include "battpoa/demand.hpp"

namespace battpoa {

// Linear inverse supply G^-1(x) = alpha + beta x, split into a fast share
// k_f (cleared in real time) and a slow share k_s = 1 - k_f (cleared day
// ahead only).
class SupplyCurve {
public:
    // Throws std::invalid_argument unless alpha >= 0, beta >= 0, k_f in (0, 1].
    SupplyCurve(double alpha, double beta, double k_f);

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double k_f() const { return k_f_; }
    double k_s() const { return 1.0 - k_f_; }

    double price(double quantity) const { return alpha_ + beta_ * quantity; }

private:
    double alpha_;
    double beta_;
    double k_f_;
};

// Real-time discharge in period 1 as an affine function of the realized
// peak demand and of the conditional off-peak mean:
//
//   z1_rt(d1) = offset + d1_slope (d1 - mu1) + cond_slope (mu_{2|d1} - mu2)
//
// mu1 and mu2 are the reference means the policy was built against.
struct RtPolicy {
    double offset = 0.0;
    double d1_slope = 0.0;
    double cond_slope = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;

    double operator()(double d1, double mu2_given_d1) const {
        return offset + d1_slope * (d1 - mu1) + cond_slope * (mu2_given_d1 - mu2);
    }
};

// Period-2 decisions are implied: z2_da = -z1_da and z2_rt = -z1_rt.
struct DispatchSchedule {
    double z1_da = 0.0;
    RtPolicy z1_rt;

    static DispatchSchedule idle() { return {}; }
};

struct MarketOutcome {
    double d1_da = 0.0, d2_da = 0.0;
    double d1_rt = 0.0, d2_rt = 0.0;
    double lambda1_da = 0.0, lambda2_da = 0.0;
    double lambda1_rt = 0.0, lambda2_rt = 0.0;
    double dtilde1_da = 0.0, dtilde2_da = 0.0;
    double dtilde1_rt = 0.0, dtilde2_rt = 0.0;
};

// Clears both settlements for one realized day given the battery's
// period-1 decisions.
MarketOutcome outcome(const SupplyCurve& curve, double z1_da, double z1_rt, double mu1, double mu2,
                      double d1, double d2);

// Same, evaluating the schedule's policy against the distribution's means
// and conditional mean at d1.
MarketOutcome outcome(const SupplyCurve& curve, const DispatchSchedule& schedule,
                      const JointDemand& dist, double d1, double d2);

// Generation cost of one realized day.
double realized_cost(const SupplyCurve& curve, const MarketOutcome& o);

// Battery revenue of one realized day.
double realized_profit(const MarketOutcome& o, double z1_da, double z1_rt);

// Expected generation cost. Exact: closed-form second moments for normal
// demand, a finite sum over the observations for empirical demand.
double generation_cost(const SupplyCurve& curve, const DispatchSchedule& schedule,
                       const JointDemand& dist);

// Expected battery profit E[(l1_da - l2_da) z1_da + (l1_rt - l2_rt) z1_rt].
double battery_profit(const SupplyCurve& curve, const DispatchSchedule& schedule,
                      const JointDemand& dist);

}  // namespace battpoa

#endif  // BATTPOA_MARKET_HPP
