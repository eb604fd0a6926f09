#ifndef QMAB_THERMO_HPP
#define QMAB_THERMO_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qmab/policies.hpp"
#include "qmab/quantum.hpp"
#include "qmab/rng.hpp"
#include "qmab/trace.hpp"

// Work extraction from unknown pure qubit states: a Jaynes-Cummings battery and
// a quasi-static thermal battery, both steered by a pure-state bandit policy.
namespace qmab::thermo {

struct JCConfig {
    double omega = 1.0;
    std::size_t initial_level = 0;
};

// theta_n = (pi/2) sqrt(n / (n + 1))
double jc_angle(std::size_t n);

struct JCProbabilities {
    double down = 0.0;
    double stay = 0.0;
    double up = 0.0;
};

// Level transition law given the fidelity p between state and direction.
JCProbabilities jc_probabilities(double p, std::size_t n);
// omega (p (1 + sin^2 theta_n) - sin^2 theta_n)
double jc_expected_work(double omega, double p, std::size_t n);
// omega (1 + sin^2 theta_n)(1 - p)
double jc_dissipation(double omega, double p, std::size_t n);

struct JCRound {
    std::size_t next_level = 0;
    int reward = 0;
    double work = 0.0;
    double dissipation = 0.0;
};

JCRound jc_round(const JCConfig& cfg, const quantum::PureQubit& state, const quantum::ProjectorAction& direction,
                 std::size_t n, Rng& rng);

struct ThermalConfig {
    double beta = 1.0;
    std::size_t M = 100;
    double schedule_constant = 1.0;
    double delta = 0.1;
    std::size_t horizon = 1;

    // eps_t = min{C ln(T / delta) / t, 1/2} for rounds t >= 1.
    double epsilon(std::size_t t) const;
};

// Default schedule constant: the infidelity constant of the median-of-means policy,
// (576 d^2 beta_w^2 k + 96 d sqrt(d - 1) beta_w k) / 4.
double default_schedule_constant(std::size_t d, double beta_w, std::size_t k);

// nu(tau, eps) = beta^{-1} ln[(1 - tau/2M - (1 - tau/M) eps) / (tau/2M + (1 - tau/M) eps)]
double thermal_gap(std::size_t tau, double eps, std::size_t M, double beta);

// Per-step data of the classical reduction: bit probabilities p_{1,tau} and
// gap decrements nu(tau) - nu(tau + 1), tau = 1..M (nu(M + 1) taken as 0).
struct ThermalLevels {
    double eps = 0.5;
    double beta = 1.0;
    std::vector<double> bit_probability;
    std::vector<double> decrement;
    double first_gap = 0.0;  // nu(1, eps)
    double threshold = 0.0;  // (w0 + w1) / 2
};

ThermalLevels thermal_work_levels(std::size_t M, double eps, double beta);

// Work of one run conditioned on branch i in {0, 1}.
double thermal_work_given_branch(const ThermalLevels& levels, int branch, Rng& rng);

struct ThermalRound {
    double work = 0.0;
    int reward = 0;
    int branch = 0;
};

ThermalRound thermal_round(const ThermalConfig& cfg, const quantum::PureQubit& state,
                           const quantum::ProjectorAction& direction, double eps, Rng& rng);
ThermalRound thermal_round(const ThermalLevels& levels, const quantum::PureQubit& state,
                           const quantum::ProjectorAction& direction, Rng& rng);

struct WorkPrediction {
    bool divergent = false;
    double work = 0.0;         // beta^{-1} [D(psi || I/2) - D(psi || Delta_{2 eps}(psi_hat))]
    double dissipation = 0.0;  // beta^{-1} D(psi || Delta_{2 eps}(psi_hat))
};

WorkPrediction expected_work(const quantum::PureQubit& state, const quantum::ProjectorAction& direction, double eps,
                             double beta);

enum class Protocol { JC, Thermal };

// Entropy change of the memory that records the outcome.
double landauer_entropy(Protocol model, double p_success, double theta);

struct DissipationLedger {
    std::vector<double> per_round;
    std::vector<double> landauer;
    std::vector<double> work;
    double cumulative = 0.0;
    double cumulative_work = 0.0;
    double cumulative_entropy = 0.0;

    void record(double dissipation, double extracted_work, double entropy);
};

struct ExtractionConfig {
    JCConfig jc;
    ThermalConfig thermal;
    bool entropy_ledger = false;
};

struct ExtractionResult {
    harness::EpisodeTrace trace;
    DissipationLedger ledger;
};

// Feedback loop: the policy proposes a direction, the battery is charged, and
// the reward bit is returned to the policy as 2 X - 1.
ExtractionResult run_extraction(Protocol protocol, const quantum::PureQubit& state, pol::SpherePolicy& policy,
                                std::size_t T, const ExtractionConfig& cfg, std::uint64_t seed);

}  // namespace qmab::thermo

#endif
