#include "battpoa/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace battpoa {

void validate(const DemandMoments& m) {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(m.mu1) || !finite(m.mu2) || !finite(m.sigma1) || !finite(m.sigma2) ||
        !finite(m.rho) || !finite(m.rho_s))
        throw std::invalid_argument("demand moments must be finite");
    if (m.sigma1 < 0.0 || m.sigma2 < 0.0)
        throw std::invalid_argument("demand standard deviations must be >= 0");
    if (m.rho < -1.0 || m.rho > 1.0)
        throw std::invalid_argument("rho must lie in [-1, 1]");
    if (m.rho_s < 0.0 || m.rho_s > 1.0)
        throw std::invalid_argument("rho_s must lie in [0, 1]");
    if ((m.sigma1 == 0.0 || m.sigma2 == 0.0) && (m.rho != 0.0 || m.rho_s != 0.0))
        throw std::invalid_argument("rho and rho_s must be 0 when a standard deviation is 0");
}

NormalJointDemand::NormalJointDemand(const DemandMoments& m) : moments_(m) {
    if (moments_.sigma1 == 0.0 || moments_.sigma2 == 0.0) moments_.rho = 0.0;
    // rho_s only enters through rho_s^2, so a negative rho maps to |rho|.
    moments_.rho_s = std::abs(moments_.rho);
    validate(moments_);
}

NormalJointDemand::NormalJointDemand(double mu1, double mu2, double sigma1, double sigma2,
                                     double rho)
    : NormalJointDemand(DemandMoments{mu1, mu2, sigma1, sigma2, rho, 0.0}) {}

ConditionalMoments NormalJointDemand::conditional(double d1) const {
    const auto& m = moments_;
    if (m.sigma1 == 0.0) return {m.mu2, m.sigma2 * m.sigma2};
    return {m.mu2 + m.rho * (m.sigma2 / m.sigma1) * (d1 - m.mu1),
            (1.0 - m.rho * m.rho) * m.sigma2 * m.sigma2};
}

EmpiricalJointDemand::EmpiricalJointDemand(std::vector<DemandPair> pairs, std::size_t bin_count)
    : pairs_(std::move(pairs)) {
    const std::size_t n = pairs_.size();
    if (n < 2) throw std::invalid_argument("empirical demand needs at least 2 observations");
    for (const auto& p : pairs_)
        if (!std::isfinite(p.d1) || !std::isfinite(p.d2))
            throw std::invalid_argument("empirical demand observations must be finite");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pairs_[a].d1 < pairs_[b].d1; });

    // Runs of equal d1 in sorted order.
    std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) into order
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && pairs_[order[j]].d1 == pairs_[order[i]].d1) ++j;
        groups.emplace_back(i, j);
        i = j;
    }
    const std::size_t distinct = groups.size();
    std::size_t k = bin_count == 0 ? std::min(kDefaultBins, distinct) : bin_count;
    if (k < 1 || k > distinct)
        throw std::invalid_argument("bin count must be in [1, " + std::to_string(distinct) +
                                    "], got " + std::to_string(k));

    // Equal-mass assignment of whole groups to bins; every bin gets >= 1 group.
    std::vector<std::size_t> group_bin(distinct);
    std::size_t bin = 0, cum = 0;
    for (std::size_t g = 0; g < distinct; ++g) {
        group_bin[g] = bin;
        cum += groups[g].second - groups[g].first;
        const std::size_t groups_left = distinct - g - 1;
        const std::size_t bins_left = k - 1 - bin;
        if (bins_left > 0 && (cum * k >= n * (bin + 1) || groups_left == bins_left)) ++bin;
    }

    bins_.resize(k);
    fitted_.assign(n, 0.0);
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t g = 0; g < distinct; ++g)
        for (std::size_t i = groups[g].first; i < groups[g].second; ++i)
            members[group_bin[g]].push_back(order[i]);

    for (std::size_t b = 0; b < k; ++b) {
        const auto& idx = members[b];
        const double cnt = static_cast<double>(idx.size());
        double xbar = 0.0, ybar = 0.0;
        for (auto i : idx) {
            xbar += pairs_[i].d1;
            ybar += pairs_[i].d2;
        }
        xbar /= cnt;
        ybar /= cnt;
        double sxx = 0.0, sxy = 0.0;
        for (auto i : idx) {
            const double dx = pairs_[i].d1 - xbar;
            sxx += dx * dx;
            sxy += dx * (pairs_[i].d2 - ybar);
        }
        Bin& out = bins_[b];
        out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
        out.intercept = ybar - out.slope * xbar;
        out.lo = pairs_[idx.front()].d1;
        out.hi = pairs_[idx.back()].d1;
        double ss = 0.0;
        for (auto i : idx) {
            fitted_[i] = ybar + out.slope * (pairs_[i].d1 - xbar);
            const double r = pairs_[i].d2 - fitted_[i];
            ss += r * r;
        }
        out.residual_var = ss / cnt;
    }

    // Population moments.
    const double nn = static_cast<double>(n);
    double m1 = 0.0, m2 = 0.0;
    for (const auto& p : pairs_) {
        m1 += p.d1;
        m2 += p.d2;
    }
    m1 /= nn;
    m2 /= nn;
    double v1 = 0.0, v2 = 0.0, c12 = 0.0, vm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = pairs_[i].d1 - m1, c = pairs_[i].d2 - m2, f = fitted_[i] - m2;
        v1 += a * a;
        v2 += c * c;
        c12 += a * c;
        vm += f * f;
    }
    v1 /= nn;
    v2 /= nn;
    c12 /= nn;
    vm /= nn;
    moments_.mu1 = m1;
    moments_.mu2 = m2;
    moments_.sigma1 = std::sqrt(v1);
    moments_.sigma2 = std::sqrt(v2);
    if (v1 > 0.0 && v2 > 0.0) {
        moments_.rho = std::clamp(c12 / (moments_.sigma1 * moments_.sigma2), -1.0, 1.0);
        moments_.rho_s = std::sqrt(std::clamp(vm / v2, 0.0, 1.0));
    }
}

const EmpiricalJointDemand::Bin& EmpiricalJointDemand::bin_for(double d1) const {
    auto it = std::upper_bound(bins_.begin(), bins_.end(), d1,
                               [](double v, const Bin& b) { return v < b.lo; });
    if (it == bins_.begin()) return bins_.front();
    auto cur = std::prev(it);
    if (d1 <= cur->hi || it == bins_.end()) return *cur;
    return (d1 - cur->hi) <= (it->lo - d1) ? *cur : *it;
}

ConditionalMoments EmpiricalJointDemand::conditional(double d1) const {
    const Bin& b = bin_for(d1);
    return {b.intercept + b.slope * d1, b.residual_var};
}

ConditionalMoments conditional_moments(const JointDemand& dist, double d1) {
    return std::visit([d1](const auto& d) { return d.conditional(d1); }, dist);
}

double sequential_correlation(const JointDemand& dist) {
    const auto& m = moments(dist);
    return m.sigma2 == 0.0 ? 0.0 : m.rho_s;
}

std::vector<DemandPair> sample(const JointDemand& dist, std::uint64_t seed, std::size_t n) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<DemandPair> out;
    out.reserve(n);
    if (const auto* normal = std::get_if<NormalJointDemand>(&dist)) {
        const auto& m = normal->moments();
        const double tail = std::sqrt(std::max(0.0, 1.0 - m.rho * m.rho));
        std::normal_distribution<double> z;
        for (std::size_t i = 0; i < n; ++i) {
            const double z1 = z(rng);
            const double z2 = z(rng);
            out.push_back({m.mu1 + m.sigma1 * z1, m.mu2 + m.sigma2 * (m.rho * z1 + tail * z2)});
        }
    } else {
        const auto pairs = std::get<EmpiricalJointDemand>(dist).pairs();
        std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
        for (std::size_t i = 0; i < n; ++i) out.push_back(pairs[pick(rng)]);
    }
    return out;
}

DemandMoments moments(const JointDemand& dist) {
    return std::visit([](const auto& d) { return d.moments(); }, dist);
}

}  // namespace battpoa
