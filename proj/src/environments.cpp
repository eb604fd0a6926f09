#include "qmab/environments.hpp"

#include <algorithm>
#include <cmath>

#include "qmab/errors.hpp"

namespace qmab::env {

namespace {

constexpr double kTruncation = 4.0;

void require_unit(const Vec& a, const char* what) {
    for (double x : a) {
        if (!std::isfinite(x)) {
            throw ContractError(std::string(what) + ": non-finite action");
        }
    }
    if (std::abs(matcore::norm(a) - 1.0) > quantum::kUnitTolerance) {
        throw ContractError(std::string(what) + ": action must be a unit vector");
    }
}

StepOutcome make_outcome(double reward, double optimal, double chosen) {
    return StepOutcome{reward, optimal, chosen, optimal - chosen};
}

}  // namespace

NoiseModel NoiseModel::gaussian(double sigma) {
    require(std::isfinite(sigma) && sigma > 0.0, "NoiseModel: sigma must be finite and positive");
    return {NoiseKind::GaussianConst, sigma};
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::GaussianConst:
            return "gaussian";
        case NoiseKind::VanishingSubgaussian:
            return "vanishing_subgaussian";
        case NoiseKind::VanishingVarianceBernoulli:
            return "vanishing_bernoulli";
    }
    return "unknown";
}

DiscreteMAQB::DiscreteMAQB(std::vector<quantum::DiscreteObservable> observables, quantum::QubitDensity state)
    : observables_(std::move(observables)), state_(state) {
    require(!observables_.empty(), "DiscreteMAQB: at least one observable required");
    means_.reserve(observables_.size());
    for (const auto& o : observables_) {
        means_.push_back(quantum::expectation(state_, o));
    }
    optimal_ = *std::max_element(means_.begin(), means_.end());
}

SphereLinear::SphereLinear(Vec theta, NoiseModel noise) : theta_(std::move(theta)), noise_(noise) {
    require(!theta_.empty(), "SphereLinear: theta must be nonempty");
    require_unit(theta_, "SphereLinear");
    require(std::isfinite(noise_.sigma) && noise_.sigma > 0.0, "SphereLinear: sigma must be finite and positive");
}

StepOutcome pull(const DiscreteMAQB& env, std::size_t arm, Rng& rng) {
    require(arm < env.arms(), "pull: arm index out of range");
    const double reward = quantum::measure_observable(env.state(), env.observables()[arm], rng);
    return make_outcome(reward, env.optimal_mean(), env.means()[arm]);
}

StepOutcome pull(const PSMAQB& env, const quantum::ProjectorAction& action, Rng& rng) {
    const int bit = quantum::born_sample(env.state, action, rng);
    const double chosen = 0.5 * (1.0 + quantum::bloch_dot(env.state.bloch, action.bloch));
    return make_outcome(static_cast<double>(bit), 1.0, chosen);
}

StepOutcome pull(const SphereLinear& env, const Vec& action, Rng& rng) {
    require(action.size() == env.dim(), "pull: action dimension does not match theta");
    require_unit(action, "pull");
    const double mean = std::clamp(matcore::dot(env.theta(), action), -1.0, 1.0);
    double reward = mean;
    switch (env.noise().kind) {
        case NoiseKind::GaussianConst:
            reward += env.noise().sigma * rng.normal();
            break;
        case NoiseKind::VanishingSubgaussian:
            reward += std::sqrt(std::max(0.0, 1.0 - mean * mean)) * truncated_normal(rng, kTruncation);
            break;
        case NoiseKind::VanishingVarianceBernoulli:
            reward = rng.bernoulli(0.5 * (1.0 + mean)) ? 1.0 : -1.0;
            break;
    }
    return make_outcome(reward, 1.0, mean);
}

StepOutcome pull(const EnvironmentSpec& env, const Action& action, Rng& rng) {
    return std::visit(
        [&](const auto& e) -> StepOutcome {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, DiscreteMAQB>) {
                if (const auto* arm = std::get_if<std::size_t>(&action)) {
                    return pull(e, *arm, rng);
                }
                throw ContractError("pull: DiscreteMAQB expects an arm index");
            } else if constexpr (std::is_same_v<E, PSMAQB>) {
                if (const auto* p = std::get_if<quantum::ProjectorAction>(&action)) {
                    return pull(e, *p, rng);
                }
                throw ContractError("pull: PSMAQB expects a projector action");
            } else {
                if (const auto* v = std::get_if<Vec>(&action)) {
                    return pull(e, *v, rng);
                }
                throw ContractError("pull: SphereLinear expects a unit vector");
            }
        },
        env);
}

std::vector<double> suboptimality_gaps(const DiscreteMAQB& env) {
    std::vector<double> gaps;
    gaps.reserve(env.arms());
    for (double m : env.means()) {
        gaps.push_back(env.optimal_mean() - m);
    }
    return gaps;
}

double truncated_normal(Rng& rng, double bound) {
    for (;;) {
        const double z = rng.normal();
        if (std::abs(z) <= bound) {
            return z;
        }
    }
}

Vec random_unit_vector(std::size_t dim, Rng& rng) {
    require(dim >= 1, "random_unit_vector: dimension must be positive");
    for (;;) {
        Vec g(dim);
        for (double& x : g) {
            x = rng.normal();
        }
        const double n = matcore::norm(g);
        if (n > 1e-8) {
            return matcore::scaled(g, 1.0 / n);
        }
    }
}

}  // namespace qmab::env
