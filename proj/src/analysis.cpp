#include "slhvb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slhvb/errors.hpp"

namespace slhvb {

namespace {

// Solve A x = b for a 4x4 system via Gaussian elimination with partial
// pivoting; A is modified in place. Returns false when singular.
bool solve4(std::array<std::array<double, 4>, 4>& a, std::array<double, 4>& b) {
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int i = 0; i < 4; ++i) b[i] /= a[i][i];
    return true;
}

} // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

DidFit did_ols(const std::vector<ObsRow>& table) {
    std::array<long long, 4> cell_counts{};
    for (const auto& row : table) {
        if ((row.t != 0 && row.t != 1) || (row.i != 0 && row.i != 1))
            raise(Err::BadConfig, "did_ols: indicators must be 0/1");
        ++cell_counts[static_cast<std::size_t>(cell_index(row.t == 1, row.i == 1))];
    }
    for (int c = 0; c < 4; ++c)
        if (cell_counts[static_cast<std::size_t>(c)] == 0)
            raise(Err::RankDeficient, "did_ols: empty design cell " + std::to_string(c));

    // Normal equations on regressors x = (1, t, i, t*i).
    std::array<std::array<double, 4>, 4> xtx{};
    std::array<double, 4> xty{};
    for (const auto& row : table) {
        const double x[4] = {1.0, static_cast<double>(row.t), static_cast<double>(row.i),
                             static_cast<double>(row.t * row.i)};
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) xtx[r][c] += x[r] * x[c];
            xty[r] += x[r] * row.y;
        }
    }

    DidFit fit;
    fit.n_obs = static_cast<long long>(table.size());
    auto a = xtx;
    auto beta = xty;
    if (!solve4(a, beta)) raise(Err::RankDeficient, "did_ols: singular normal equations");
    fit.beta = beta;

    double rss = 0.0;
    for (const auto& row : table) {
        const double yhat = beta[0] + beta[1] * row.t + beta[2] * row.i +
                            beta[3] * static_cast<double>(row.t * row.i);
        rss += (row.y - yhat) * (row.y - yhat);
    }
    const long long dof = fit.n_obs - 4;
    fit.sigma2 = dof > 0 ? rss / static_cast<double>(dof) : 0.0;

    for (int j = 0; j < 4; ++j) {
        // j-th column of (X'X)^{-1} via one solve per coefficient.
        auto m = xtx;
        std::array<double, 4> e{};
        e[static_cast<std::size_t>(j)] = 1.0;
        if (!solve4(m, e)) raise(Err::RankDeficient, "did_ols: singular normal equations");
        const double var = fit.sigma2 * e[static_cast<std::size_t>(j)];
        const double se = var > 0.0 ? std::sqrt(var) : 0.0;
        fit.se[static_cast<std::size_t>(j)] = se;
        if (se > 0.0) {
            const double t = beta[static_cast<std::size_t>(j)] / se;
            fit.t_stat[static_cast<std::size_t>(j)] = t;
            fit.p_value[static_cast<std::size_t>(j)] = 2.0 * (1.0 - normal_cdf(std::abs(t)));
        } else {
            fit.t_stat[static_cast<std::size_t>(j)] = 0.0;
            fit.p_value[static_cast<std::size_t>(j)] = 1.0;
        }
        fit.ci95[static_cast<std::size_t>(j)] = {beta[static_cast<std::size_t>(j)] - 1.96 * se,
                                                 beta[static_cast<std::size_t>(j)] + 1.96 * se};
    }
    return fit;
}

std::pair<double, double> did_z_test(const std::array<CellStats, 4>& cells) {
    std::array<const CellStats*, 4> by_index{};
    for (const auto& c : cells) {
        auto& slot = by_index[static_cast<std::size_t>(cell_index(c.post, c.treatment))];
        if (slot) raise(Err::BadConfig, "did_z_test: duplicate cell");
        slot = &c;
    }
    for (const auto* c : by_index)
        if (!c) raise(Err::BadConfig, "did_z_test: missing cell");

    const double dbar = (by_index[3]->mean - by_index[2]->mean) -
                        (by_index[1]->mean - by_index[0]->mean);
    double var = 0.0;
    for (const auto* c : by_index) var += c->se_mean * c->se_mean;
    const double z = dbar / std::sqrt(var);
    return {z, 1.0 - normal_cdf(z)};
}

std::pair<double, double> bootstrap_did(const std::array<std::vector<double>, 4>& samples,
                                        long long draws_B, long long resample_size, Rng& rng) {
    if (draws_B < 100) raise(Err::BadConfig, "bootstrap_did: need B >= 100");
    if (resample_size < 1) raise(Err::BadConfig, "bootstrap_did: resample_size >= 1");
    for (const auto& s : samples)
        if (s.empty()) raise(Err::BadConfig, "bootstrap_did: empty cell sample");

    std::array<CellStats, 4> cells{};
    for (int c = 0; c < 4; ++c) {
        const auto& pop = samples[static_cast<std::size_t>(c)];
        std::vector<double> replicate_means(static_cast<std::size_t>(draws_B));
        for (auto& rm : replicate_means) {
            double acc = 0.0;
            for (long long i = 0; i < resample_size; ++i)
                acc += pop[uniform_index(rng, pop.size())];
            rm = acc / static_cast<double>(resample_size);
        }
        double grand = 0.0;
        for (double rm : replicate_means) grand += rm;
        grand /= static_cast<double>(draws_B);
        double ss = 0.0;
        for (double rm : replicate_means) ss += (rm - grand) * (rm - grand);
        const double se = std::sqrt(ss / static_cast<double>(draws_B - 1));
        if (!(se > 0.0))
            raise(Err::DegenerateVariance, "bootstrap_did: zero bootstrap spread in a cell");
        cells[static_cast<std::size_t>(c)] = {/*treatment=*/(c % 2) == 1, /*post=*/c >= 2,
                                              resample_size, grand, se};
    }
    return did_z_test(cells);
}

double lift_percentage(const DidFit& fit) {
    const double baseline = fit.beta[0] + fit.beta[1];
    if (baseline == 0.0) raise(Err::ZeroBaseline, "lift_percentage: beta0 + beta1 == 0");
    return fit.beta[3] / baseline;
}

} // namespace slhvb
