// Tests for the two-layer gamma observation model: closed-form marginal
// densities against direct numerical quadrature, symmetry and determinism
// properties, the sampler's moments, and maximum-likelihood recovery of the
// observation parameters.
#include <catch2/catch_amalgamated.hpp>

#include "stmrf/gamma_gamma.hpp"
#include "stmrf/rng.hpp"
#include "stmrf/simulate.hpp"
#include "stmrf/state_matrix.hpp"

#include <cmath>
#include <vector>

using namespace stmrf;

namespace {

// Density of Gamma(shape, rate) at y, in log space.
double log_gamma_rate_pdf(double y, double shape, double rate) {
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(y) - rate * y;
}

// Marginal density of a block of observations sharing one latent rate:
//   integral over lambda of  prod_i Gamma(y_i | alpha, rate lambda)
//                            * Gamma(lambda | alpha0, rate nu)  d lambda
// computed by trapezoid quadrature on the log scale (lambda = exp(u)).
double quadrature_block_log_density(const std::vector<double>& ys, const GGParams& th) {
    const double lo = -40.0, hi = 25.0;
    const int n = 20000;
    const double h = (hi - lo) / n;
    std::vector<double> terms;
    terms.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double u = lo + h * i;
        const double lambda = std::exp(u);
        double lp = log_gamma_rate_pdf(lambda, th.alpha0, th.nu) + u;  // + u: Jacobian d lambda = e^u du
        for (double y : ys) lp += log_gamma_rate_pdf(y, th.alpha, lambda);
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        terms.push_back(lp + std::log(w));
    }
    return log_sum_exp(terms) + std::log(h);
}

double quadrature_cell_log_density(const std::vector<double>& g1, const std::vector<double>& g2,
                                   bool de, const GGParams& th) {
    if (de) return quadrature_block_log_density(g1, th) + quadrature_block_log_density(g2, th);
    std::vector<double> all = g1;
    all.insert(all.end(), g2.begin(), g2.end());
    return quadrature_block_log_density(all, th);
}

}  // namespace

TEST_CASE("closed-form cell density matches direct quadrature, m=n=1") {
    const std::vector<GGParams> thetas = {
        {10.0, 0.9, 0.5}, {5.0, 2.0, 1.0}, {15.0, 1.2, 0.3}};
    // 20 observation pairs spanning three decades.
    std::vector<std::pair<double, double>> pairs;
    Rng rng(99);
    for (int i = 0; i < 20; ++i) {
        const double y1 = std::exp(-2.5 + 5.0 * i / 19.0);
        const double y2 = y1 * std::exp(rng.normal());
        pairs.emplace_back(y1, y2);
    }
    for (const auto& th : thetas) {
        for (const auto& [y1, y2] : pairs) {
            const std::vector<double> obs = {y1, y2};
            for (bool de : {false, true}) {
                const double closed = log_density(std::span<const double>(obs), 1, 1, de, th);
                const double quad = quadrature_cell_log_density({y1}, {y2}, de, th);
                REQUIRE(std::isfinite(closed));
                // agreement of the densities themselves to 1e-6 relative
                REQUIRE(closed == Catch::Approx(quad).margin(1e-6).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("closed-form cell density matches quadrature for m=3, n=3 blocks") {
    const GGParams th{10.0, 0.9, 0.5};
    Rng rng(7);
    std::vector<double> obs;
    for (int i = 0; i < 6; ++i) obs.push_back(rng.gamma(4.0, 0.5));
    const std::vector<double> g1(obs.begin(), obs.begin() + 3);
    const std::vector<double> g2(obs.begin() + 3, obs.end());
    for (bool de : {false, true}) {
        const double closed = log_density(std::span<const double>(obs), 3, 3, de, th);
        const double quad = quadrature_cell_log_density(g1, g2, de, th);
        REQUIRE(closed == Catch::Approx(quad).margin(1e-6).epsilon(1e-6));
    }
}

TEST_CASE("density: swapping equal-sized groups leaves both states unchanged") {
    const GGParams th{8.0, 1.5, 0.7};
    Rng rng(3);
    std::vector<double> obs;
    for (int i = 0; i < 8; ++i) obs.push_back(rng.gamma(3.0, 1.0));
    std::vector<double> swapped(obs.begin() + 4, obs.end());
    swapped.insert(swapped.end(), obs.begin(), obs.begin() + 4);
    for (bool de : {false, true}) {
        const double a = log_density(std::span<const double>(obs), 4, 4, de, th);
        const double b = log_density(std::span<const double>(swapped), 4, 4, de, th);
        REQUIRE(a == Catch::Approx(b).margin(1e-12));
    }
}

TEST_CASE("density: permuting samples within a group is neutral") {
    const GGParams th{10.0, 0.9, 0.5};
    const std::vector<double> obs = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const std::vector<double> perm = {3.0, 1.0, 2.0, 5.0, 6.0, 4.0};
    for (bool de : {false, true}) {
        const double a = log_density(std::span<const double>(obs), 3, 3, de, th);
        const double b = log_density(std::span<const double>(perm), 3, 3, de, th);
        // sums of a permutation may differ in the last ulp
        REQUIRE(a == Catch::Approx(b).margin(1e-12));
    }
}

TEST_CASE("density evaluation is deterministic") {
    const GGParams th{10.0, 0.9, 0.5};
    const std::vector<double> obs = {0.3, 1.7, 2.2, 0.9, 4.4, 1.1};
    const double a = log_density(std::span<const double>(obs), 3, 3, true, th);
    const double b = log_density(std::span<const double>(obs), 3, 3, true, th);
    REQUIRE(a == b);
}

TEST_CASE("density validates inputs") {
    const GGParams th{10.0, 0.9, 0.5};
    std::vector<double> obs = {1.0, 2.0};
    REQUIRE_THROWS_AS(log_density(std::span<const double>(obs), 1, 2, false, th), std::invalid_argument);
    obs[0] = -1.0;
    REQUIRE_THROWS_AS(log_density(std::span<const double>(obs), 1, 1, false, th), std::invalid_argument);
    REQUIRE_THROWS_AS((GGConstants::make(GGParams{-1.0, 0.9, 0.5}, 3, 3)), std::invalid_argument);
}

TEST_CASE("sampler reproduces the marginal mean when it exists") {
    // With latent rate ~ Gamma(alpha0, rate nu), E[1/rate] = nu/(alpha0-1)
    // (finite only for alpha0 > 1), so E[y] = alpha * nu / (alpha0 - 1).
    const GGParams th{10.0, 5.0, 2.0};
    const double expect_mean = th.alpha * th.nu / (th.alpha0 - 1.0);  // = 5
    Rng rng(2024);
    double sum = 0.0;
    long count = 0;
    for (int rep = 0; rep < 100000; ++rep) {
        auto obs = sample_gene_obs(false, th, 3, 3, rng);
        REQUIRE(obs.size() == 6);
        for (double y : obs) {
            REQUIRE(y > 0.0);
            sum += y;
            ++count;
        }
    }
    const double mean = sum / static_cast<double>(count);
    // cells share a latent rate, so the effective sample size is the cell count
    REQUIRE(mean == Catch::Approx(expect_mean).margin(0.05));
}

TEST_CASE("sampler: differential state draws independent rates per group") {
    const GGParams th{10.0, 5.0, 2.0};
    Rng rng(77);
    // Correlation between group means across replicates: strong when the rate
    // is shared (state 0), near zero when independent (state 1).
    auto corr_group_means = [&](bool de) {
        const int reps = 20000;
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int r = 0; r < reps; ++r) {
            auto obs = sample_gene_obs(de, th, 3, 3, rng);
            const double m1 = (obs[0] + obs[1] + obs[2]) / 3.0;
            const double m2 = (obs[3] + obs[4] + obs[5]) / 3.0;
            sx += m1; sy += m2; sxx += m1 * m1; syy += m2 * m2; sxy += m1 * m2;
        }
        const double n = reps;
        const double cov = sxy / n - (sx / n) * (sy / n);
        const double v1 = sxx / n - (sx / n) * (sx / n);
        const double v2 = syy / n - (sy / n) * (sy / n);
        return cov / std::sqrt(v1 * v2);
    };
    REQUIRE(corr_group_means(false) > 0.5);
    REQUIRE(std::abs(corr_group_means(true)) < 0.05);
}

TEST_CASE("log Bayes factor favors the generating state on average") {
    const GGParams th{10.0, 0.9, 0.5};
    Rng rng(5);
    double lbf_de = 0.0, lbf_null = 0.0;
    const int reps = 4000;
    for (int r = 0; r < reps; ++r) {
        auto obs_de = sample_gene_obs(true, th, 3, 3, rng);
        lbf_de += log_density(std::span<const double>(obs_de), 3, 3, true, th) -
                  log_density(std::span<const double>(obs_de), 3, 3, false, th);
        auto obs_nu = sample_gene_obs(false, th, 3, 3, rng);
        lbf_null += log_density(std::span<const double>(obs_nu), 3, 3, true, th) -
                    log_density(std::span<const double>(obs_nu), 3, 3, false, th);
    }
    REQUIRE(lbf_de / reps > 0.5);
    REQUIRE(lbf_null / reps < 0.0);
}

TEST_CASE("emission table matches per-cell densities") {
    Rng rng(11);
    ExpressionData data(std::vector<std::string>{"a", "b"}, 3, 2, 2);
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t t = 0; t < 3; ++t)
            for (std::size_t k = 0; k < 4; ++k)
                data.set(g, t, k, rng.gamma(3.0, 1.0));
    const GGParams th{6.0, 1.3, 0.8};
    const SuffStats stats = SuffStats::from(data);
    const EmissionTable tab = EmissionTable::make(stats, th);
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t t = 0; t < 3; ++t) {
            REQUIRE(tab.null_row(g)[t] ==
                    Catch::Approx(log_density(data.cell(g, t), 2, 2, false, th)).margin(1e-12));
            REQUIRE(tab.de_row(g)[t] ==
                    Catch::Approx(log_density(data.cell(g, t), 2, 2, true, th)).margin(1e-12));
        }
}

TEST_CASE("total log likelihood is the sum of per-cell state-matched densities") {
    Rng rng(12);
    ExpressionData data(std::vector<std::string>{"a", "b", "c"}, 2, 3, 3);
    StateMatrix x(3, 2);
    for (std::size_t g = 0; g < 3; ++g)
        for (std::size_t t = 0; t < 2; ++t) {
            x.set(g, t, rng.bernoulli(0.5) ? 1 : 0);
            for (std::size_t k = 0; k < 6; ++k) data.set(g, t, k, rng.gamma(2.0, 2.0));
        }
    const GGParams th{4.0, 1.1, 0.6};
    const SuffStats stats = SuffStats::from(data);
    double manual = 0.0;
    for (std::size_t g = 0; g < 3; ++g)
        for (std::size_t t = 0; t < 2; ++t)
            manual += log_density(data.cell(g, t), 3, 3, x.at(g, t) == 1, th);
    REQUIRE(gg_log_likelihood(stats, x, th) == Catch::Approx(manual).margin(1e-10));
}

TEST_CASE("parameter fit recovers the generator on moderate data") {
    const GGParams truth{10.0, 0.9, 0.5};
    const std::size_t p = 400, tpoints = 4;
    Rng rng(31);
    ExpressionData data(default_gene_labels(p), tpoints, 3, 3);
    StateMatrix x(p, tpoints);
    for (std::size_t g = 0; g < p; ++g)
        for (std::size_t t = 0; t < tpoints; ++t) {
            const bool de = rng.bernoulli(0.3);
            x.set(g, t, de ? 1 : 0);
            auto obs = sample_gene_obs(de, truth, 3, 3, rng);
            for (std::size_t k = 0; k < obs.size(); ++k) data.set(g, t, k, obs[k]);
        }
    const SuffStats stats = SuffStats::from(data);
    const GGParams fit = fit_theta(stats, x);
    REQUIRE(std::abs(fit.alpha - truth.alpha) / truth.alpha < 0.15);
    REQUIRE(std::abs(fit.alpha0 - truth.alpha0) / truth.alpha0 < 0.15);
    REQUIRE(std::abs(fit.nu - truth.nu) / truth.nu < 0.15);

    // maximization: fitted objective is at least the truth's objective
    REQUIRE(gg_log_likelihood(stats, x, fit) >= gg_log_likelihood(stats, x, truth) - 1e-6);

    // determinism: same inputs, same fit
    const GGParams fit2 = fit_theta(stats, x);
    REQUIRE(fit.alpha == fit2.alpha);
    REQUIRE(fit.alpha0 == fit2.alpha0);
    REQUIRE(fit.nu == fit2.nu);

    // warm start at the answer stays at the answer
    const GGParams warm = fit_theta(stats, x, &fit);
    REQUIRE(gg_log_likelihood(stats, x, warm) >= gg_log_likelihood(stats, x, fit) - 1e-9);
}

TEST_CASE("fit objective is at least the moment-based start's objective") {
    const GGParams truth{5.0, 3.0, 1.5};
    const std::size_t p = 120, tpoints = 3;
    Rng rng(41);
    ExpressionData data(default_gene_labels(p), tpoints, 3, 3);
    StateMatrix x(p, tpoints);
    for (std::size_t g = 0; g < p; ++g)
        for (std::size_t t = 0; t < tpoints; ++t) {
            const bool de = rng.bernoulli(0.5);
            x.set(g, t, de ? 1 : 0);
            auto obs = sample_gene_obs(de, truth, 3, 3, rng);
            for (std::size_t k = 0; k < obs.size(); ++k) data.set(g, t, k, obs[k]);
        }
    const SuffStats stats = SuffStats::from(data);
    const GGParams start = fit_theta_init(stats);
    REQUIRE(start.valid());
    const GGParams fit = fit_theta(stats, x);
    REQUIRE(gg_log_likelihood(stats, x, fit) >= gg_log_likelihood(stats, x, start) - 1e-9);
}

TEST_CASE("constant data yields a finite fit") {
    ExpressionData data(std::vector<std::string>{"a", "b"}, 2, 2, 2);
    // every observation the same positive constant (values_ default is 1.0;
    // set explicitly anyway)
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t t = 0; t < 2; ++t)
            for (std::size_t k = 0; k < 4; ++k) data.set(g, t, k, 2.5);
    StateMatrix x(2, 2);  // all state 0
    const SuffStats stats = SuffStats::from(data);
    const GGParams fit = fit_theta(stats, x);
    REQUIRE(fit.valid());
    REQUIRE(std::isfinite(gg_log_likelihood(stats, x, fit)));
}
