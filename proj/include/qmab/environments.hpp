#ifndef QMAB_ENVIRONMENTS_HPP
#define QMAB_ENVIRONMENTS_HPP

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "qmab/matcore.hpp"
#include "qmab/quantum.hpp"
#include "qmab/rng.hpp"

namespace qmab::env {

using matcore::Vec;

enum class NoiseKind { GaussianConst, VanishingSubgaussian, VanishingVarianceBernoulli };

struct NoiseModel {
    NoiseKind kind = NoiseKind::GaussianConst;
    double sigma = 1.0;  // used by GaussianConst only

    static NoiseModel gaussian(double sigma);
    static NoiseModel vanishing_subgaussian() { return {NoiseKind::VanishingSubgaussian, 1.0}; }
    static NoiseModel vanishing_bernoulli() { return {NoiseKind::VanishingVarianceBernoulli, 1.0}; }
};

std::string to_string(NoiseKind kind);

struct StepOutcome {
    double reward = 0.0;
    double optimal_mean = 0.0;
    double chosen_mean = 0.0;
    double instantaneous_regret = 0.0;
};

// Finite arms, each a discrete observable measured on a fixed (possibly mixed) state.
class DiscreteMAQB {
public:
    DiscreteMAQB(std::vector<quantum::DiscreteObservable> observables, quantum::QubitDensity state);

    std::size_t arms() const { return observables_.size(); }
    const std::vector<quantum::DiscreteObservable>& observables() const { return observables_; }
    const quantum::QubitDensity& state() const { return state_; }
    const std::vector<double>& means() const { return means_; }
    double optimal_mean() const { return optimal_; }

private:
    std::vector<quantum::DiscreteObservable> observables_;
    quantum::QubitDensity state_;
    std::vector<double> means_;
    double optimal_ = 0.0;
};

// Pure-state bandit: the learner picks any rank-1 projector and sees a Born bit.
struct PSMAQB {
    quantum::PureQubit state;
};

// Linear bandit on the unit sphere with reward <theta, a> + noise.
class SphereLinear {
public:
    SphereLinear(Vec theta, NoiseModel noise);

    const Vec& theta() const { return theta_; }
    const NoiseModel& noise() const { return noise_; }
    std::size_t dim() const { return theta_.size(); }

private:
    Vec theta_;
    NoiseModel noise_;
};

using EnvironmentSpec = std::variant<DiscreteMAQB, PSMAQB, SphereLinear>;
using Action = std::variant<std::size_t, quantum::ProjectorAction, Vec>;

StepOutcome pull(const DiscreteMAQB& env, std::size_t arm, Rng& rng);
// Reward is the Born bit in {0, 1}; regret is 1 - (1 + <theta, a>)/2.
StepOutcome pull(const PSMAQB& env, const quantum::ProjectorAction& action, Rng& rng);
StepOutcome pull(const SphereLinear& env, const Vec& action, Rng& rng);
// Dispatches on the environment; a mismatched action kind is a ContractError.
StepOutcome pull(const EnvironmentSpec& env, const Action& action, Rng& rng);

std::vector<double> suboptimality_gaps(const DiscreteMAQB& env);

// Standard normal conditioned on |z| <= bound, by rejection.
double truncated_normal(Rng& rng, double bound);
Vec random_unit_vector(std::size_t dim, Rng& rng);

}  // namespace qmab::env

#endif
