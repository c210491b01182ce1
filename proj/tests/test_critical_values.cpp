#include "support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace bubblecs;
using namespace testing_support;

TEST(Chi2, QuantileAgainstBisectionOracle) {
    for (double p : {0.01, 0.025, 0.05, 0.5, 0.9, 0.95, 0.975, 0.99})
        EXPECT_NEAR(chi2_1_quantile(p), oracle::chi2_1_quantile(p), 1e-10 * std::max(1.0, oracle::chi2_1_quantile(p))) << p;
    EXPECT_NEAR(chi2_1_quantile(0.05), 0.0039321, 1e-6);
}

TEST(Chi2, ClosedFormExamples) {
    EXPECT_NEAR(chi2_cv(0.05, 1.0, CvShape::Quadratic, +1), 0.003932, 1e-6);
    EXPECT_NEAR(chi2_cv(0.05, 0.25, CvShape::Absolute, -1), -std::sqrt(0.25 * oracle::chi2_1_quantile(0.05)), 1e-12);
    EXPECT_NEAR(chi2_cv(0.05, 0.25, CvShape::Absolute, -1), -0.03135, 1e-5);
    EXPECT_EQ(chi2_cv(0.05, 0.0, CvShape::Quadratic, +1), 0.0);
    EXPECT_THROW(chi2_cv(0.0, 0.5, CvShape::Quadratic), ParameterError);
    EXPECT_THROW(chi2_cv(0.05, 1.5, CvShape::Quadratic), ParameterError);
}

TEST(Normal, QuantileInvertsCdf) {
    for (double p : {1e-6, 0.001, 0.02, 0.3, 0.5, 0.77, 0.999})
        EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14 + 1e-12 * p);
}

TEST(Surface, Table1Evaluations) {
    EXPECT_NEAR(eval_surface(table1_surface(Functional::EMa21e), 0.5), 0.5078, 5e-5);
    const double lr = -9.99e-4 + 5.13e-5 / 0.5 - 1.09e-3 * 0.5 + 4.40e-4 * 0.25 - 2.16e-4 * 0.125;
    EXPECT_NEAR(eval_surface(table1_surface(Functional::LR21e), 0.5), lr, 1e-15);
    EXPECT_NEAR(lr, -0.001359, 1e-6);
    for (auto f : kAllFunctionals) {
        EXPECT_THROW(eval_surface(table1_surface(f), 0.95), RangeError);
        EXPECT_THROW(eval_surface(table1_surface(f), 0.05), RangeError);
        for (double l : lambda_grid()) EXPECT_TRUE(std::isfinite(eval_surface(table1_surface(f), l)));
    }
}

TEST(Surface, SecondBranchOnlyAboveThreshold) {
    const auto s = table1_surface(Functional::EMb12r);
    ASSERT_TRUE(s.b.has_value());
    auto plain = s;
    plain.b.reset();
    EXPECT_EQ(eval_surface(s, 0.7), eval_surface(plain, 0.7));
    EXPECT_NE(eval_surface(s, 0.71), eval_surface(plain, 0.71));
}

TEST(Surface, RefitRecoversCoefficients) {
    const auto truth = table1_surface(Functional::EMb21e);
    const auto grid = lambda_grid();
    std::vector<double> cv;
    for (double l : grid) cv.push_back(eval_surface(truth, l));
    const auto fit = fit_surface(grid, cv, false);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(fit.surface.a[i], truth.a[i], 1e-8);
    EXPECT_LT(fit.rmse, 1e-10);

    const auto two = table1_surface(Functional::EMb12r);
    cv.clear();
    for (double l : grid) cv.push_back(eval_surface(two, l));
    const auto fit2 = fit_surface(grid, cv, true);
    ASSERT_TRUE(fit2.surface.b.has_value());
    for (double l : grid) EXPECT_NEAR(eval_surface(fit2.surface, l), eval_surface(two, l), 1e-8);
}

TEST(Surface, FitContract) {
    const auto grid = lambda_grid();
    std::vector<double> cv(grid.size(), 1.0);
    EXPECT_THROW(fit_surface(grid, cv, false, 5), FitError);
    std::vector<double> few(grid.begin(), grid.begin() + 5);
    EXPECT_THROW(fit_surface(few, std::vector<double>(5, 1.0), false), ParameterError);
    std::vector<double> same(20, 0.5);
    EXPECT_THROW(fit_surface(same, std::vector<double>(20, 1.0), false), FitError);
}

TEST(Functionals, MatchNaivePathOracle) {
    const int n = 200, e = 20;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        const BrownianPath path(n, rng);
        std::mt19937_64 rng2(seed);
        std::normal_distribution<double> z(0.0, 1.0);
        oracle::Vec draws;
        for (int i = 0; i < n; ++i) draws.push_back(z(rng2));
        const oracle::Path p(draws);
        for (int i1 : {40, 100, 160}) {
            EXPECT_LE(oracle::rel_err(evaluate_functional(path, Functional::LR21e, i1, e), oracle::lr21e(p, i1, e)), 1e-9);
            EXPECT_LE(oracle::rel_err(evaluate_functional(path, Functional::EMa21e, i1, e), oracle::ema21e(p, i1, e)), 1e-9);
            EXPECT_LE(oracle::rel_err(evaluate_functional(path, Functional::EMb21e, i1, e), oracle::emb21e(p, i1, e)), 1e-9);
            EXPECT_LE(oracle::rel_err(evaluate_functional(path, Functional::EMa12r, i1, e), oracle::ema12r(p, i1, e)), 1e-9);
            EXPECT_LE(oracle::rel_err(evaluate_functional(path, Functional::EMb12r, i1, e), oracle::emb12r(p, i1, e)), 1e-9);
        }
    }
}

TEST(Functionals, LR21eQuantileNonPositive) {
    const SimulationSettings cfg{2000, 200, 3, 0};
    for (double l : {0.2, 0.5, 0.9}) EXPECT_LE(simulate_cv(Functional::LR21e, l, 0.1, 0.95, cfg), 0.0);
}

TEST(Functionals, PairingChecked) {
    const SimulationSettings cfg{1000, 100, 1, 0};
    EXPECT_THROW(simulate_cv(Functional::EMa21e, 0.05, 0.1, 0.95, cfg), ParameterError);
    EXPECT_THROW(simulate_cv(Functional::EMb12r, 0.95, 0.1, 0.05, cfg), ParameterError);
    EXPECT_THROW(simulate_cv(Functional::EMa21e, 0.5, 0.1, 0.95, {999, 100, 1, 0}), ParameterError);
    EXPECT_THROW(simulate_cv(Functional::EMa21e, 0.5, 0.1, 0.95, {1000, 99, 1, 0}), ParameterError);
    EXPECT_EQ(parse_functional("EMb12r"), Functional::EMb12r);
    EXPECT_THROW(parse_functional("EMc"), ParameterError);
}

TEST(Functionals, EMa21eNearTable1) {
    const SimulationSettings cfg{50000, 1000, 20240607, 0};
    EXPECT_NEAR(simulate_cv(Functional::EMa21e, 0.5, 0.1, 0.95, cfg), 0.508, 0.03);
}

TEST(Functionals, EMb12rSeedSelfConsistency) {
    const SimulationSettings a{50000, 1000, 1, 0}, b{50000, 1000, 2, 0};
    const double x = simulate_cv(Functional::EMb12r, 0.5, 0.1, 0.05, a);
    const double y = simulate_cv(Functional::EMb12r, 0.5, 0.1, 0.05, b);
    EXPECT_NEAR(x, y, 0.02);
    EXPECT_NEAR(x, eval_surface(table1_surface(Functional::EMb12r), 0.5), 0.05);
}

TEST(Functionals, QuantilesMonotoneInLevel) {
    const double grid[] = {0.3, 0.6};
    const double qs[] = {0.01, 0.05, 0.5, 0.95, 0.99};
    for (auto f : kAllFunctionals) {
        const auto rows = tabulate(f, grid, 0.1, qs, {2000, 200, 5, 0});
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t q = 1; q < 5; ++q) EXPECT_LE(rows[(q - 1) * 2 + j].cv, rows[q * 2 + j].cv);
    }
}

TEST(Functionals, DiscretizationConvergence) {
    for (auto f : {Functional::EMa21e, Functional::EMb12r}) {
        const double l = 0.5;
        const double q = right_tailed(f) ? 0.95 : 0.05;
        const double c1 = simulate_cv(f, l, 0.1, q, {50000, 1000, 8, 0});
        const double c2 = simulate_cv(f, l, 0.1, q, {50000, 2000, 8, 0});
        EXPECT_LT(std::fabs(c1 - c2), 0.02) << to_string(f);
    }
}

TEST(Functionals, ThreadCountDoesNotMatter) {
    const double g[] = {0.5};
    const auto a = simulate_functional_draws(Functional::EMb21e, g, 0.1, {1000, 200, 4, 1});
    const auto b = simulate_functional_draws(Functional::EMb21e, g, 0.1, {1000, 200, 4, 3});
    EXPECT_EQ(a, b);
}

TEST(Functionals, TabulateCsv) {
    const double g[] = {0.3};
    const double q[] = {0.95};
    const auto rows = tabulate(Functional::EMa21e, g, 0.1, q, {1000, 100, 9, 0});
    std::ostringstream os;
    write_cv_csv(os, rows);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "lambda,cv,functional,quantile,eps,reps,steps,seed");
    EXPECT_NE(os.str().find(",EMa21e,0.95,0.1,1000,100,9"), std::string::npos);
}

TEST(CriticalValuesBundle, Table1Lookups) {
    const auto& cv = table1();
    EXPECT_EQ(cv.source(Functional::EMa21e), CvSource::Table1Surface);
    const auto s = table1_surface(Functional::EMa21e);
    EXPECT_DOUBLE_EQ(cv.surface(Functional::EMa21e, 0.5), eval_surface(s, 0.5));
    EXPECT_DOUBLE_EQ(cv.surface(Functional::EMa21e, 0.504), eval_surface(s, 0.5));
    EXPECT_DOUBLE_EQ(cv.surface(Functional::EMa21e, 0.506), eval_surface(s, 0.51));
    EXPECT_DOUBLE_EQ(cv.surface(Functional::EMa21e, 0.02), eval_surface(s, 0.10));
    EXPECT_DOUBLE_EQ(cv.surface(Functional::EMa21e, 0.99), eval_surface(s, 0.90));
    const auto e = cv.emergence(60, 100, 200);
    EXPECT_NEAR(e.lr12, 0.00393214 * 0.3, 1e-8);
    EXPECT_NEAR(e.em12, std::sqrt(0.00393214 * 0.3), 1e-7);
    EXPECT_DOUBLE_EQ(e.ema21, eval_surface(s, 0.6));
    EXPECT_THROW(CriticalValues::table1(0.05, 0.10), ParameterError);
    EXPECT_THROW(CriticalValues::table1(0.10, 0.20), ParameterError);
}

TEST(CriticalValuesBundle, ZeroLevelNeverRejects) {
    const auto cv = CriticalValues::table1(0.0);
    const auto e = cv.emergence(50, 100, 200);
    EXPECT_EQ(e.lr12, -std::numeric_limits<double>::infinity());
    EXPECT_EQ(e.ema21, std::numeric_limits<double>::infinity());
    const auto c = cv.collapse(60, 200);
    EXPECT_EQ(c.lr12, std::numeric_limits<double>::infinity());
    EXPECT_EQ(c.lr21, -std::numeric_limits<double>::infinity());
}

TEST(CriticalValuesBundle, SimulatedForOtherLevels) {
    const SimulationSettings cfg{1000, 100, 3, 0};
    const auto cv = CriticalValues::for_level(0.05, 0.10, cfg);
    EXPECT_EQ(cv.source(Functional::EMb21e), CvSource::Simulated);
    EXPECT_EQ(CriticalValues::for_level(0.10, 0.10, cfg).source(Functional::EMb21e), CvSource::Table1Surface);
}
