#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qmab/errors.hpp"
#include "qmab/policies.hpp"
#include "qmab/quantum.hpp"
#include "qmab/rng.hpp"
#include "qmab/thermo.hpp"

using namespace qmab;
using namespace qmab::thermo;
using quantum::Bloch;
using quantum::ProjectorAction;
using quantum::PureQubit;

namespace {

const double kPi = std::acos(-1.0);

double binary_entropy(double a) {
    auto xl = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
    return -xl(a) - xl(1.0 - a);
}

// Unit Bloch vector at angle phi from +z in the x-z plane.
Bloch tilted(double phi) {
    return {std::sin(phi), 0.0, std::cos(phi)};
}

}  // namespace

TEST(Jc, ProbabilitiesSumToOne) {
    for (double p : {0.0, 0.1, 0.5, 0.93, 1.0}) {
        for (std::size_t n : {0u, 1u, 2u, 7u, 100u}) {
            const auto pr = jc_probabilities(p, n);
            EXPECT_NEAR(pr.down + pr.stay + pr.up, 1.0, 1e-15);
            EXPECT_DOUBLE_EQ(pr.up, p);
        }
    }
}

TEST(Jc, LevelThreeOrthogonal) {
    const double theta = kPi * std::sqrt(3.0) / 4.0;
    EXPECT_NEAR(jc_angle(3), theta, 1e-15);
    const auto pr = jc_probabilities(0.0, 3);
    EXPECT_NEAR(pr.down, std::sin(theta) * std::sin(theta), 1e-15);
    EXPECT_NEAR(pr.down, 0.9563621, 1e-7);
    EXPECT_NEAR(pr.stay, 0.0436379, 1e-7);
}

TEST(Jc, MatchingDirectionAlwaysClimbs) {
    Rng rng(1);
    const JCConfig cfg{2.5, 0};
    const PureQubit s(tilted(0.7));
    std::size_t n = 0;
    for (int t = 0; t < 200; ++t) {
        const auto r = jc_round(cfg, s, ProjectorAction(s), n, rng);
        EXPECT_EQ(r.next_level, n + 1);
        EXPECT_EQ(r.reward, 1);
        EXPECT_DOUBLE_EQ(r.work, 2.5);
        EXPECT_NEAR(r.dissipation, 0.0, 1e-12);
        n = r.next_level;
    }
}

TEST(Jc, GroundLevelNeverDecreases) {
    Rng rng(2);
    const JCConfig cfg;
    const PureQubit s(Bloch{0.0, 0.0, 1.0});
    for (int t = 0; t < 1000; ++t) {
        const auto r = jc_round(cfg, s, ProjectorAction(quantum::random_pure(rng)), 0, rng);
        EXPECT_GE(r.next_level, 0u);
        EXPECT_GE(r.work, 0.0);
    }
    EXPECT_DOUBLE_EQ(jc_probabilities(0.3, 0).down, 0.0);
}

TEST(Jc, MonteCarloWorkMatchesFormula) {
    Rng rng(3);
    const JCConfig cfg{1.0, 0};
    for (const auto& [phi, n] : std::vector<std::pair<double, std::size_t>>{{0.4, 1}, {1.3, 5}, {2.5, 12}}) {
        const PureQubit s(Bloch{0.0, 0.0, 1.0});
        const ProjectorAction a(tilted(phi));
        const double p = 0.5 * (1.0 + std::cos(phi));
        const int N = 100000;
        double sum = 0.0;
        double sum2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const auto r = jc_round(cfg, s, a, n, rng);
            sum += r.work;
            sum2 += r.work * r.work;
            ASSERT_GE(r.dissipation, 0.0);
            ASSERT_LE(r.dissipation, 2.0 * cfg.omega);
        }
        const double mean = sum / N;
        const double se = std::sqrt((sum2 / N - mean * mean) / N);
        EXPECT_LE(std::abs(mean - jc_expected_work(1.0, p, n)), 4.0 * se) << "phi " << phi;
        const double s2 = std::sin(jc_angle(n)) * std::sin(jc_angle(n));
        EXPECT_NEAR(jc_expected_work(1.0, p, n), p * (1.0 + s2) - s2, 1e-15);
        EXPECT_NEAR(jc_dissipation(1.0, p, n), 1.0 - jc_expected_work(1.0, p, n), 1e-12);
    }
}

TEST(Thermal, LastGapVanishes) {
    for (std::size_t M : {1u, 10u, 1000u}) {
        EXPECT_EQ(thermal_gap(M, 0.1, M, 1.0), 0.0);
    }
    EXPECT_NEAR(thermal_gap(1, 0.2, 1000, 2.0), 0.5 * std::log((1.0 - 0.0005 - 0.999 * 0.2) / (0.0005 + 0.999 * 0.2)),
                1e-14);
}

TEST(Thermal, HalfEpsilonExtractsNothing) {
    Rng rng(4);
    const auto lv = thermal_work_levels(50, 0.5, 1.0);
    EXPECT_DOUBLE_EQ(lv.first_gap, 0.0);
    EXPECT_DOUBLE_EQ(lv.threshold, 0.0);
    for (int i = 0; i < 100; ++i) {
        EXPECT_DOUBLE_EQ(thermal_work_given_branch(lv, i % 2, rng), 0.0);
    }
}

TEST(Thermal, EpsilonOutOfRangeRejected) {
    Rng rng(5);
    ThermalConfig cfg;
    const PureQubit s;
    EXPECT_THROW(thermal_round(cfg, s, ProjectorAction(), 0.0, rng), ContractError);
    EXPECT_THROW(thermal_round(cfg, s, ProjectorAction(), 0.6, rng), ContractError);
}

TEST(Thermal, IncrementsAreBounded) {
    for (double eps : {0.01, 0.1, 0.3}) {
        const std::size_t M = 200;
        const double beta = 0.7;
        const auto lv = thermal_work_levels(M, eps, beta);
        const double dp = (0.5 - eps) / static_cast<double>(M);
        ASSERT_EQ(lv.decrement.size(), M);
        for (std::size_t tau = 0; tau < M; ++tau) {
            EXPECT_GE(lv.decrement[tau], -1e-15);
            EXPECT_LE(lv.decrement[tau], (2.0 / eps) * dp / beta + 1e-12);
            EXPECT_NEAR(lv.bit_probability[tau], eps + static_cast<double>(tau + 1) * dp, 1e-15);
        }
        const double w0 = (std::log(2.0) + std::log(eps)) / beta;
        const double w1 = (std::log(2.0) + std::log(1.0 - eps)) / beta;
        EXPECT_NEAR(lv.threshold, 0.5 * (w0 + w1), 1e-12);
    }
}

TEST(Thermal, BranchMeanConvergesToLimit) {
    Rng rng(6);
    const std::size_t M = 1000;
    const double eps = 0.1;
    const auto lv = thermal_work_levels(M, eps, 1.0);
    const int N = 100000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < N; ++i) {
        const double w = thermal_work_given_branch(lv, 0, rng);
        sum += w;
        sum2 += w * w;
    }
    const double mean = sum / N;
    const double se = std::sqrt((sum2 / N - mean * mean) / N);
    const double limit = std::log(2.0) + std::log(0.9);
    EXPECT_LE(std::abs(mean - limit), 3.0 * se + 10.0 / static_cast<double>(M));
}

TEST(Thermal, RewardTracksBranch) {
    Rng rng(7);
    ThermalConfig cfg;
    cfg.M = 400;
    const PureQubit s(Bloch{0.0, 0.0, 1.0});
    int agree = 0;
    const int N = 2000;
    for (int i = 0; i < N; ++i) {
        const auto r = thermal_round(cfg, s, ProjectorAction(s), 0.05, rng);
        EXPECT_EQ(r.branch, 0);
        agree += r.reward;
    }
    EXPECT_GT(agree, N * 9 / 10);
}

TEST(Schedule, ClampedAtHalf) {
    ThermalConfig cfg;
    cfg.schedule_constant = 1.0;
    cfg.horizon = 100;
    cfg.delta = 0.1;
    EXPECT_DOUBLE_EQ(cfg.epsilon(1), 0.5);
    EXPECT_NEAR(cfg.epsilon(1000), std::log(1000.0) / 1000.0, 1e-15);
    EXPECT_THROW(cfg.epsilon(0), ContractError);
}

TEST(ExpectedWork, HalfEpsilonIsZero) {
    const PureQubit s(tilted(0.3));
    const auto w = expected_work(s, ProjectorAction(tilted(1.1)), 0.5, 1.0);
    EXPECT_FALSE(w.divergent);
    EXPECT_NEAR(w.work, 0.0, 1e-14);
}

TEST(ExpectedWork, MatchedStateApproachesLn2) {
    const PureQubit s(tilted(0.9));
    const double w3 = expected_work(s, ProjectorAction(s), 1e-3, 1.0).work;
    const double w4 = expected_work(s, ProjectorAction(s), 1e-4, 1.0).work;
    EXPECT_LT(w3, std::log(2.0));
    EXPECT_LT(w4, std::log(2.0));
    EXPECT_GT(w4, w3);
    // The deficit is -ln(1 - eps), of order eps.
    EXPECT_NEAR(std::log(2.0) - w3, -std::log(1.0 - 1e-3), 1e-12);
}

TEST(ExpectedWork, AntipodalGuess) {
    const PureQubit s(Bloch{0.0, 0.0, 1.0});
    const ProjectorAction away(Bloch{0.0, 0.0, -1.0});
    // 0.9 psi_hat + 0.1 I/2 leaves weight 0.05 on psi.
    const auto mixed = quantum::depolarize(away.density(), 0.1);
    EXPECT_NEAR(quantum::relative_entropy(s.density(), mixed).nats, -std::log(0.05), 1e-12);
    // The depolarizing strength in the work formula is 2 eps.
    const auto w = expected_work(s, away, 0.1, 1.0);
    EXPECT_FALSE(w.divergent);
    EXPECT_NEAR(w.dissipation, -std::log(0.1), 1e-12);
    EXPECT_NEAR(w.work, std::log(2.0) + std::log(0.1), 1e-12);
    EXPECT_TRUE(expected_work(s, away, 0.0, 1.0).divergent);
}

TEST(Landauer, Examples) {
    EXPECT_DOUBLE_EQ(landauer_entropy(Protocol::Thermal, 1.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(landauer_entropy(Protocol::Thermal, 0.0, 0.0), 0.0);
    EXPECT_NEAR(landauer_entropy(Protocol::Thermal, 0.5, 0.0), std::log(2.0), 1e-15);
    EXPECT_NEAR(landauer_entropy(Protocol::JC, 0.9, kPi / 4.0), binary_entropy(0.1) + 0.1 * std::log(2.0), 1e-14);
    EXPECT_DOUBLE_EQ(landauer_entropy(Protocol::JC, 1.0, 0.8), 0.0);
}

TEST(Landauer, JcBound) {
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        const double p = rng.uniform();
        const double theta = kPi / 2.0 * rng.uniform();
        const double alpha = 1.0 - p;
        const double s = landauer_entropy(Protocol::JC, p, theta);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, alpha * (2.0 - std::log(alpha)) + 1e-12);
    }
}

TEST(Extraction, OraclePolicyOnJcDissipatesNothing) {
    const PureQubit s(tilted(1.2));
    pol::FixedPolicy oracle(quantum::to_vec(s.bloch));
    ExtractionConfig cfg;
    cfg.jc.omega = 0.5;
    cfg.entropy_ledger = true;
    const auto res = run_extraction(Protocol::JC, s, oracle, 500, cfg, 11);
    EXPECT_EQ(res.trace.size(), 500u);
    EXPECT_NEAR(res.ledger.cumulative, 0.0, 1e-9);
    EXPECT_NEAR(res.ledger.cumulative_work, 250.0, 1e-9);
    EXPECT_NEAR(res.ledger.cumulative_entropy, 0.0, 1e-9);
}

TEST(Extraction, LedgerIsConsistent) {
    const PureQubit s(tilted(0.4));
    pol::BanditPLS policy(2000);
    ExtractionConfig cfg;
    cfg.entropy_ledger = true;
    const auto res = run_extraction(Protocol::JC, s, policy, 2000, cfg, 12);
    double sum = 0.0;
    for (std::size_t t = 0; t < res.ledger.per_round.size(); ++t) {
        EXPECT_GE(res.ledger.per_round[t], 0.0);
        EXPECT_LE(res.ledger.per_round[t], 2.0 * cfg.jc.omega);
        sum += res.ledger.per_round[t];
        EXPECT_NEAR(res.trace.dissipation[t], sum, 1e-9);
    }
    EXPECT_NEAR(res.ledger.cumulative, sum, 1e-9);
}

TEST(Extraction, ExploreThenCommitDissipationGrowsLikeSqrtT) {
    auto mean_dissipation = [](std::size_t T) {
        double total = 0.0;
        const int seeds = 40;
        for (int seed = 0; seed < seeds; ++seed) {
            Rng env_rng = Rng::stream(static_cast<std::uint64_t>(seed), "environment");
            const auto s = quantum::random_pure(env_rng);
            pol::BanditPLS policy(T);
            total += run_extraction(Protocol::JC, s, policy, T, ExtractionConfig{}, static_cast<std::uint64_t>(seed))
                         .ledger.cumulative;
        }
        return total / seeds;
    };
    const double ratio = mean_dissipation(4000) / mean_dissipation(1000);
    EXPECT_GT(ratio, 1.4);
    EXPECT_LT(ratio, 2.8);
}

TEST(Extraction, ThermalRunRecordsWork) {
    const PureQubit s(tilted(2.0));
    pol::FixedPolicy oracle(quantum::to_vec(s.bloch));
    ExtractionConfig cfg;
    cfg.thermal.M = 100;
    cfg.thermal.schedule_constant = 0.01;
    cfg.thermal.horizon = 300;
    const auto res = run_extraction(Protocol::Thermal, s, oracle, 300, cfg, 13);
    EXPECT_EQ(res.ledger.work.size(), 300u);
    EXPECT_GT(res.ledger.cumulative_work, 0.0);
}
