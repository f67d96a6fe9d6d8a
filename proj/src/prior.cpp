#include "slhvb/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slhvb/errors.hpp"

namespace slhvb {

namespace {

constexpr int kQuadPoints = 10000;

// Midpoint rule; avoids evaluating Beta pdfs at singular endpoints.
template <class F>
double midpoint_integral(F f, double lo, double hi, int m) {
    const double h = (hi - lo) / m;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += f(lo + (j + 0.5) * h);
    return acc * h;
}

double beta_log_norm(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double beta_pdf(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) return 0.0;
    if (x == 0.0) {
        if (a < 1.0) return std::numeric_limits<double>::infinity();
        if (a > 1.0) return 0.0;
        return std::exp(-beta_log_norm(a, b)) * std::pow(1.0 - x, b - 1.0);
    }
    if (x == 1.0) {
        if (b < 1.0) return std::numeric_limits<double>::infinity();
        if (b > 1.0) return 0.0;
        return std::exp(-beta_log_norm(a, b)) * std::pow(x, a - 1.0);
    }
    return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - beta_log_norm(a, b));
}

} // namespace

PriorSpec PriorSpec::uniform() {
    PriorSpec p;
    p.family_ = PriorFamily::Uniform;
    p.lo_ = 0.0;
    p.hi_ = 1.0;
    return p;
}

PriorSpec PriorSpec::truncated_beta(double alpha, double beta, double lo, double hi) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        raise(Err::BadConfig, "truncated_beta: alpha and beta must be positive");
    if (!(0.0 <= lo && lo < hi && hi <= 1.0))
        raise(Err::BadConfig, "truncated_beta: need 0 <= lo < hi <= 1");
    PriorSpec p;
    p.family_ = PriorFamily::TruncatedBeta;
    p.alpha_ = alpha;
    p.beta_ = beta;
    p.lo_ = lo;
    p.hi_ = hi;
    p.beta_norm_ = midpoint_integral([&](double x) { return beta_pdf(alpha, beta, x); }, lo, hi,
                                     kQuadPoints);
    if (!(p.beta_norm_ > 0.0))
        raise(Err::BadConfig, "truncated_beta: support carries no mass");
    p.build_beta_cdf_();
    p.check_normalized_();
    return p;
}

PriorSpec PriorSpec::piecewise_constant(std::vector<double> breakpoints,
                                        std::vector<double> densities) {
    if (breakpoints.size() < 2 || densities.size() + 1 != breakpoints.size())
        raise(Err::BadConfig, "piecewise_constant: need n+1 breakpoints for n densities");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (!(breakpoints[i] < breakpoints[i + 1]))
            raise(Err::BadConfig, "piecewise_constant: breakpoints must be strictly increasing");
    if (breakpoints.front() < 0.0 || breakpoints.back() > 1.0)
        raise(Err::BadConfig, "piecewise_constant: breakpoints must lie in [0,1]");
    for (double d : densities)
        if (d < 0.0) raise(Err::BadConfig, "piecewise_constant: densities must be nonnegative");

    PriorSpec p;
    p.family_ = PriorFamily::PiecewiseConstant;
    p.breakpoints_ = std::move(breakpoints);
    p.densities_ = std::move(densities);
    p.lo_ = p.breakpoints_.front();
    p.hi_ = p.breakpoints_.back();
    p.seg_cum_.resize(p.densities_.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.densities_.size(); ++i) {
        const double mass = p.densities_[i] * (p.breakpoints_[i + 1] - p.breakpoints_[i]);
        p.seg_cum_[i + 1] = p.seg_cum_[i] + mass;
    }
    p.check_normalized_();
    return p;
}

PriorSpec& PriorSpec::declare_bounds(double c1, double c2) {
    if (!(c1 > 0.0) || !(c2 >= c1))
        raise(Err::BadConfig, "declare_bounds: need 0 < C1 <= C2");
    const int m = kQuadPoints;
    for (int j = 0; j < m; ++j) {
        const double x = lo_ + (hi_ - lo_) * j / (m - 1);
        const double f = density(x);
        if (f < c1 - 1e-12 || f > c2 + 1e-12)
            raise(Err::BadConfig, "declare_bounds: density leaves [C1, C2] at x=" + std::to_string(x));
    }
    declared_ = {c1, c2};
    return *this;
}

void PriorSpec::check_normalized_() const {
    double total = 0.0;
    switch (family_) {
        case PriorFamily::Uniform:
            total = 1.0;
            break;
        case PriorFamily::TruncatedBeta:
            // density() divides by the same midpoint-rule mass, so this is 1 by
            // construction up to rounding.
            total = midpoint_integral([&](double x) { return density(x); }, lo_, hi_, kQuadPoints);
            break;
        case PriorFamily::PiecewiseConstant:
            total = seg_cum_.back();
            break;
    }
    if (std::abs(total - 1.0) > 1e-9)
        raise(Err::BadConfig,
              "prior density integrates to " + std::to_string(total) + ", expected 1");
}

void PriorSpec::build_beta_cdf_() {
    const int m = kQuadPoints;
    beta_cdf_.assign(m + 1, 0.0);
    const double h = (hi_ - lo_) / m;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        acc += beta_pdf(alpha_, beta_, lo_ + (j + 0.5) * h) * h;
        beta_cdf_[j + 1] = acc;
    }
    for (auto& c : beta_cdf_) c /= acc;
}

double PriorSpec::density(double x) const {
    if (x < lo_ || x > hi_) return 0.0;
    switch (family_) {
        case PriorFamily::Uniform:
            return 1.0;
        case PriorFamily::TruncatedBeta:
            return beta_pdf(alpha_, beta_, x) / beta_norm_;
        case PriorFamily::PiecewiseConstant: {
            auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
            std::size_t idx = static_cast<std::size_t>(it - breakpoints_.begin());
            if (idx == 0) return 0.0;
            if (idx >= breakpoints_.size()) idx = breakpoints_.size() - 1; // x == hi
            return densities_[idx - 1];
        }
    }
    return 0.0;
}

double PriorSpec::sample(Rng& rng) const {
    switch (family_) {
        case PriorFamily::Uniform:
            return uniform01(rng);
        case PriorFamily::TruncatedBeta: {
            // Inverse transform through the precomputed CDF table.
            const double u = uniform01(rng);
            auto it = std::upper_bound(beta_cdf_.begin(), beta_cdf_.end(), u);
            std::size_t j = static_cast<std::size_t>(it - beta_cdf_.begin());
            if (j == 0) j = 1;
            if (j >= beta_cdf_.size()) j = beta_cdf_.size() - 1;
            const double c0 = beta_cdf_[j - 1], c1 = beta_cdf_[j];
            const double h = (hi_ - lo_) / (beta_cdf_.size() - 1);
            const double frac = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.5;
            return lo_ + (static_cast<double>(j - 1) + frac) * h;
        }
        case PriorFamily::PiecewiseConstant: {
            const double u = uniform01(rng) * seg_cum_.back();
            auto it = std::upper_bound(seg_cum_.begin(), seg_cum_.end(), u);
            std::size_t j = static_cast<std::size_t>(it - seg_cum_.begin());
            if (j == 0) j = 1;
            if (j >= seg_cum_.size()) j = seg_cum_.size() - 1;
            const double a = breakpoints_[j - 1], b = breakpoints_[j];
            return a + uniform01(rng) * (b - a);
        }
    }
    return 0.0;
}

std::pair<double, double> validate_bounded_density(const PriorSpec& p, int grid_points) {
    if (grid_points < 100) raise(Err::BadConfig, "validate_bounded_density: grid_points >= 100");
    const auto [lo, hi] = p.support();
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (int j = 0; j < grid_points; ++j) {
        const double x = lo + (hi - lo) * j / (grid_points - 1);
        const double f = p.density(x);
        dmin = std::min(dmin, f);
        dmax = std::max(dmax, f);
    }
    if (!(dmin > 0.0))
        raise(Err::DensityUnbounded, "density reaches 0 on its support; truncate the family");
    return {dmin, dmax};
}

std::vector<double> sample_means(const PriorSpec& p, long long count, Rng& rng) {
    if (count < 1) raise(Err::BadConfig, "sample_means: count >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (auto& x : out) x = p.sample(rng);
    return out;
}

BetaParams fit_beta_moments(double mean, double variance) {
    if (!(mean > 0.0 && mean < 1.0))
        raise(Err::BadConfig, "fit_beta_moments: mean must lie strictly inside (0,1)");
    if (!(variance > 0.0)) raise(Err::BadConfig, "fit_beta_moments: variance must be positive");
    if (variance >= mean * (1.0 - mean))
        raise(Err::InfeasibleMoments, "fit_beta_moments: variance >= mean*(1-mean)");
    const double alpha = mean * (mean * (1.0 - mean) / variance - 1.0);
    const double beta = (1.0 - mean) / mean * alpha;
    return {alpha, beta};
}

std::optional<double> gap_reciprocal(std::span<const double> values) {
    if (values.size() < 2) raise(Err::BadConfig, "gap_reciprocal: need at least 2 values");
    double best = -std::numeric_limits<double>::infinity();
    double second = best;
    for (double v : values) {
        if (v > best) {
            second = best;
            best = v;
        } else if (v > second) {
            second = v;
        }
    }
    if (best == second) return std::nullopt; // ZeroGap
    return 1.0 / (best - second);
}

std::optional<double> gap_reciprocal_sample(const PriorSpec& p, int m, Rng& rng) {
    if (m < 2) raise(Err::BadConfig, "gap_reciprocal_sample: m >= 2");
    double best = -std::numeric_limits<double>::infinity();
    double second = best;
    for (int i = 0; i < m; ++i) {
        const double v = p.sample(rng);
        if (v > best) {
            second = best;
            best = v;
        } else if (v > second) {
            second = v;
        }
    }
    if (best == second) return std::nullopt;
    return 1.0 / (best - second);
}

} // namespace slhvb
