#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qmab/environments.hpp"
#include "qmab/errors.hpp"
#include "qmab/estimators.hpp"
#include "qmab/experiment.hpp"
#include "qmab/policies.hpp"
#include "qmab/rng.hpp"

using namespace qmab;
using namespace qmab::pol;

namespace {

void expect_unit(const Vec& a) {
    EXPECT_NEAR(matcore::norm(a), 1.0, 1e-10);
}

double dist_sq(const Vec& a, const Vec& b) {
    const Vec d = matcore::sub(a, b);
    return matcore::dot(d, d);
}

// Linear Bernoulli reward 2X - 1 with E = <theta, a>.
double born_reward(const Vec& theta, const Vec& a, Rng& rng) {
    return rng.bernoulli(0.5 * (1.0 + matcore::dot(theta, a))) ? 1.0 : -1.0;
}

// Drives a batch policy and checks the eigenvalue-control relation after every batch.
void check_eigenvalue_control(SpherePolicy& policy, const Vec& theta, std::size_t rounds, double factor,
                              Rng& rng) {
    std::size_t seen = 0;
    for (std::size_t t = 0; t < rounds; ++t) {
        const Vec a = policy.next_action(rng);
        expect_unit(a);
        policy.observe(a, born_reward(theta, a, rng));
        const auto tel = policy.telemetry();
        if (tel.batches != seen) {
            seen = tel.batches;
            ASSERT_GE(tel.lambda_min, std::sqrt(factor * tel.lambda_max) * (1.0 - 1e-12))
                << "batch " << seen << " lmax " << tel.lambda_max;
        }
    }
    EXPECT_GT(seen, 0u);
}

}  // namespace

TEST(UcbIndex, Examples) {
    EXPECT_EQ(ucb_index(0.3, 0, 1.0, 0.1), kUnplayedIndex);
    EXPECT_NEAR(ucb_index(0.3, 5, 1.0, 1.0), 0.3, 1e-15);
    EXPECT_NEAR(ucb_index(0.5, 4, 1.0, std::exp(-2.0)), 1.5, 1e-15);
}

TEST(Ucb, PlaysEveryArmOnceFirst) {
    UCB ucb(5, 1.0, 0.01);
    std::vector<bool> seen(5, false);
    for (int t = 0; t < 5; ++t) {
        const auto a = ucb.select();
        EXPECT_FALSE(seen[a]);
        seen[a] = true;
        ucb.observe(a, 0.0);
    }
}

TEST(Ucb, TracksCountsAndMeans) {
    UCB ucb(2, 1.0, 0.1);
    ucb.observe(0, 1.0);
    ucb.observe(0, 0.0);
    ucb.observe(1, 0.25);
    EXPECT_EQ(ucb.counts(), (std::vector<std::size_t>{2, 1}));
    EXPECT_DOUBLE_EQ(ucb.means()[0], 0.5);
    EXPECT_DOUBLE_EQ(ucb.means()[1], 0.25);
}

TEST(LinUcbSelect, Examples) {
    est::LSEAccumulator acc(2, 1.0);
    EXPECT_EQ(linucb_select(acc, {{0.0, 1.0}}, 1.0), 0u);

    est::LSEAccumulator exploit(2, 1.0);
    exploit.update({1.0, 0.0}, 2.0, 1.0);
    EXPECT_EQ(linucb_select(exploit, {{0.0, 1.0}, {1.0, 0.0}}, 1e-12), 1u);

    EXPECT_THROW(linucb_select(acc, {}, 1.0), ContractError);
}

TEST(LinUcbSelect, AnisotropicDesignPrefersUncertainArm) {
    // V = diag(100, 1) and theta_hat = (0.5, 0.4) up to a 1e-12 regularizer.
    est::LSEAccumulator acc(2, 1e-12);
    acc.update({1.0, 0.0}, 0.5, 100.0);
    acc.update({0.0, 1.0}, 0.4, 1.0);
    const Vec th = acc.estimate();
    EXPECT_NEAR(th[0] + std::sqrt(1.0 / 100.0), 0.6, 1e-9);
    EXPECT_NEAR(th[1] + 1.0, 1.4, 1e-9);
    EXPECT_EQ(linucb_select(acc, {{1.0, 0.0}, {0.0, 1.0}}, 1.0), 1u);
}

TEST(LinUcbSelect, LowestIndexOnTies) {
    est::LSEAccumulator acc(2, 1.0);
    EXPECT_EQ(linucb_select(acc, {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}}, 1.0), 0u);
}

TEST(OptimisticSpherePoint, BeatsRandomCandidates) {
    Rng rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        est::DesignMatrix dm(3, 1.0);
        for (int i = 0; i < 5; ++i) {
            dm.add(env::random_unit_vector(3, rng), 3.0 * rng.uniform() + 0.1);
        }
        Vec center = env::random_unit_vector(3, rng);
        center = matcore::scaled(center, 0.3 + rng.uniform());
        const double beta = 0.05 + rng.uniform();
        auto value = [&](const Vec& a) { return matcore::dot(center, a) + std::sqrt(beta) * dm.inverse_norm(a); };
        const Vec best = optimistic_sphere_point(center, dm, beta);
        expect_unit(best);
        for (int i = 0; i < 2000; ++i) {
            EXPECT_GE(value(best), value(env::random_unit_vector(3, rng)) - 1e-9);
        }
    }
}

TEST(ProjectExtremal, Examples) {
    const Vec c{0.0, 0.0, 1.0};
    const auto [p, m] = project_extremal(c, c, 4.0);
    EXPECT_NEAR(dist_sq(p, c), 0.0, 1e-30);
    expect_unit(m);

    const Vec v{1.0, 0.0, 0.0};
    const auto edge = project_extremal(c, v, 1.0 + 1e-9);
    EXPECT_NEAR(dist_sq(edge.first, c), 2.0 - std::sqrt(2.0), 1e-8);
    EXPECT_NEAR(dist_sq(edge.second, c), 2.0 - std::sqrt(2.0), 1e-8);

    const auto tight = project_extremal(c, v, 100.0);
    EXPECT_LE(dist_sq(tight.first, c), 0.02);
    EXPECT_LE(dist_sq(tight.second, c), 0.02);

    EXPECT_THROW(project_extremal(c, v, 1.0), ContractError);
    EXPECT_THROW(project_extremal(c, v, 0.5), ContractError);
}

TEST(ProjectExtremal, LemmaBoundOnRandomInputs) {
    Rng rng(2);
    for (int rep = 0; rep < 500; ++rep) {
        const Vec c = env::random_unit_vector(3, rng);
        const Vec v = env::random_unit_vector(3, rng);
        const double lam = 1.0 + 1e-6 + 50.0 * rng.uniform();
        const auto [p, m] = project_extremal(c, v, lam);
        expect_unit(p);
        expect_unit(m);
        EXPECT_LE(dist_sq(p, c), 2.0 / lam + 1e-12);
        EXPECT_LE(dist_sq(m, c), 2.0 / lam + 1e-12);
    }
}

TEST(VnBatch, SizesAndFirstBatchBound) {
    Rng rng(3);
    for (std::size_t d : {2u, 3u}) {
        const est::DesignMatrix dm(d, 2.0);
        const Vec c = env::random_unit_vector(d, rng);
        const auto batch = vn_batch(c, dm);
        EXPECT_EQ(batch.actions.size(), 2 * (d - 1));
        EXPECT_EQ(batch.repeats, 1u);
        for (const auto& a : batch.actions) {
            expect_unit(a);
            EXPECT_LE(dist_sq(a, c), 2.0 / 2.0 + 1e-12);
        }
    }
}

TEST(VvnBatch, RepeatsAndFloor) {
    const est::DesignMatrix dm(3, 2.0);
    const auto batch = vvn_batch({0.0, 1.0, 0.0}, dm, 10);
    EXPECT_EQ(batch.actions.size(), 4u);
    EXPECT_EQ(batch.repeats, 10u);
    EXPECT_THROW(vvn_batch({0.0, 1.0, 0.0}, dm, 0), ContractError);

    const double bw = est::beta_mom(3, 2.0, 1.0);
    EXPECT_NEAR(bw, 279.0 + 108.0 * std::sqrt(3.0), 1e-10);
    const double bound = 1.0 / 3.0 + 1.0 / (2.0 * std::sqrt(6.0) * bw);
    EXPECT_LT(bound, 2.0);
    EXPECT_DOUBLE_EQ(vvn_lambda0_floor(3, bw), 2.0);
    EXPECT_DOUBLE_EQ(vn_lambda0_floor(3), 2.0);
}

TEST(VvnTheoreticalK, Formula) {
    EXPECT_EQ(vvn_theoretical_k(2000), static_cast<std::size_t>(std::ceil(24.0 * std::log(4.0e6))));
    EXPECT_THROW(vvn_theoretical_k(1), ContractError);
}

TEST(LinUcbVN, RejectsLowRegularizer) {
    Rng rng(4);
    VNConfig cfg;
    cfg.lambda0 = 1.5;
    EXPECT_THROW(LinUCBVN(3, cfg, rng), ContractError);
}

TEST(EigenvalueControl, VnOnSphere) {
    Rng rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        const Vec theta = env::random_unit_vector(3, rng);
        VNConfig cfg;
        cfg.batch_budget = 500;
        LinUCBVN policy(3, cfg, rng);
        check_eigenvalue_control(policy, theta, 2000, 2.0 / 6.0, rng);
    }
}

TEST(EigenvalueControl, VnOnCircle) {
    Rng rng(6);
    for (int rep = 0; rep < 5; ++rep) {
        const Vec theta = env::random_unit_vector(2, rng);
        VNConfig cfg;
        cfg.batch_budget = 1000;
        LinUCBVN policy(2, cfg, rng);
        check_eigenvalue_control(policy, theta, 2000, 2.0 / 3.0, rng);
    }
}

TEST(EigenvalueControl, VvnWithSubsamples) {
    Rng rng(7);
    for (int rep = 0; rep < 3; ++rep) {
        const Vec theta = env::random_unit_vector(3, rng);
        VVNConfig cfg;
        cfg.k = 5;
        LinUCBVVN policy(3, cfg, rng);
        check_eigenvalue_control(policy, theta, 4000, 2.0 / 6.0, rng);
        EXPECT_EQ(policy.bank().k(), 5u);
    }
}

TEST(LinUcbVVN, SingleSubsampleMatchesMomEstimate) {
    Rng rng(8);
    VVNConfig cfg;
    cfg.k = 1;
    LinUCBVVN policy(3, cfg, rng);
    const Vec theta{0.0, 0.0, 1.0};
    for (int t = 0; t < 400; ++t) {
        const Vec a = policy.next_action(rng);
        policy.observe(a, born_reward(theta, a, rng));
    }
    const Vec direct = policy.bank().estimates()[0];
    EXPECT_EQ(policy.mom_estimate(), direct);
}

TEST(LinUcbCircle, ActionsAreUnitAndEstimateConverges) {
    Rng init(9);
    CircleConfig cfg;
    LinUCBCircle policy(cfg, init);
    Rng rng(10);
    const Vec theta{std::cos(1.0), std::sin(1.0)};
    for (int t = 0; t < 4000; ++t) {
        const Vec a = policy.next_action(rng);
        expect_unit(a);
        policy.observe(a, born_reward(theta, a, rng));
    }
    EXPECT_GT(matcore::dot(policy.estimate(), theta), 0.99);
    EXPECT_THROW(LinUCBCircle(CircleConfig{1.0, 0.1}, init), ContractError);
}

TEST(PhasedElimRound, Examples) {
    EXPECT_EQ(phased_elim_round({0.3, 0.3, 0.3}, 0.25), (std::vector<std::size_t>{0, 1, 2}));
    // Gaps (0, 0.6, 0.3) against 2 eps = 0.5.
    EXPECT_EQ(phased_elim_round({1.0, 0.4, 0.7}, 0.25), (std::vector<std::size_t>{0, 2}));
}

TEST(PhasedElimRound, BestArmAlwaysSurvives) {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> means(6);
        for (auto& m : means) {
            m = rng.normal();
        }
        const auto best = static_cast<std::size_t>(std::max_element(means.begin(), means.end()) - means.begin());
        const auto kept = phased_elim_round(means, 0.1 + rng.uniform());
        EXPECT_NE(std::find(kept.begin(), kept.end(), best), kept.end());
    }
}

TEST(PhasedElimination, EpsilonHalvesEachPhase) {
    const std::vector<Vec> features{{1.0, 0.0}, {0.0, 1.0}};
    PhasedElimination pe(features, 0.1);
    EXPECT_DOUBLE_EQ(pe.epsilon(), 0.5);
    std::vector<double> eps{pe.epsilon()};
    for (int t = 0; t < 20000 && eps.size() < 3; ++t) {
        const auto a = pe.select();
        pe.observe(a, a == 0 ? 1.0 : 0.9);
        if (pe.epsilon() != eps.back()) {
            eps.push_back(pe.epsilon());
        }
    }
    ASSERT_EQ(eps.size(), 3u);
    EXPECT_DOUBLE_EQ(eps[1], 0.25);
    EXPECT_DOUBLE_EQ(eps[2], 0.125);
}

TEST(PhasedElimination, FindsBestArmOnLinearFeatures) {
    Rng rng(12);
    const Vec theta{1.0, 0.2};
    std::vector<Vec> features{{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.8}, {-1.0, 0.0}};
    PhasedElimination pe(features, 0.05);
    for (int t = 0; t < 30000; ++t) {
        const auto a = pe.select();
        pe.observe(a, matcore::dot(theta, features[a]) + 0.1 * rng.normal());
    }
    EXPECT_EQ(pe.surviving(), (std::vector<std::size_t>{0}));
}

TEST(GOptimalDesign, WeightsFormDistribution) {
    const auto d = g_optimal_design({{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.8}});
    double sum = 0.0;
    for (double w : d.weights) {
        EXPECT_GE(w, 0.0);
        sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_FALSE(d.fallback);

    const auto sym = g_optimal_design({{1.0, 0.0}, {0.0, 1.0}});
    EXPECT_NEAR(sym.weights[0], 0.5, 1e-4);
    EXPECT_NEAR(sym.weights[1], 0.5, 1e-4);
}

TEST(BanditPls, StateUpAlongZ) {
    Rng rng(13);
    const std::size_t T = 10000;
    BanditPLS policy(T);
    EXPECT_EQ(policy.exploration_budget(), 100u);
    const Vec theta{0.0, 0.0, 1.0};
    for (std::size_t t = 0; t < 100; ++t) {
        const Vec a = policy.next_action(rng);
        policy.observe(a, born_reward(theta, a, rng));
    }
    const Vec r = policy.bloch_estimate();
    EXPECT_DOUBLE_EQ(r[2], 1.0);
    EXPECT_LT(std::abs(r[0]), 0.6);
    EXPECT_LT(std::abs(r[1]), 0.6);
    const Vec committed = policy.next_action(rng);
    EXPECT_TRUE(policy.committed());
    EXPECT_GT(committed[2], 0.8);
}

TEST(BanditPls, NoiselessOracleCommitsToState) {
    Rng rng(14);
    const Vec theta = matcore::normalized({0.3, -0.4, 0.5});
    BanditPLS policy(900);
    while (!policy.committed()) {
        const Vec a = policy.next_action(rng);
        if (policy.committed()) {
            break;
        }
        policy.observe(a, matcore::dot(theta, a));
    }
    const Vec c = policy.next_action(rng);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(c[i], theta[i], 1e-12);
    }
}

TEST(BanditPls, HarnessTraceCommitsAfterBudget) {
    Rng rng(15);
    const env::PSMAQB env{quantum::PureQubit(quantum::Bloch{0.0, 0.0, 1.0})};
    const auto trace = harness::bandit_pls(env, 400, rng);
    ASSERT_EQ(trace.size(), 400u);
    const auto last = trace.rows.back().action;
    for (std::size_t t = 25; t < 400; ++t) {
        EXPECT_EQ(trace.rows[t].action, last);
    }
}

TEST(FibonacciSphere, PointsAreUnitAndSpread) {
    const auto pts = fibonacci_sphere(64);
    ASSERT_EQ(pts.size(), 64u);
    Vec mean{0.0, 0.0, 0.0};
    for (const auto& p : pts) {
        expect_unit(p);
        matcore::axpy(1.0 / 64.0, p, mean);
    }
    EXPECT_LT(matcore::norm(mean), 0.05);
}
