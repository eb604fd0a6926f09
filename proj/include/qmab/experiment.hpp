#ifndef QMAB_EXPERIMENT_HPP
#define QMAB_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "qmab/config.hpp"
#include "qmab/environments.hpp"
#include "qmab/policies.hpp"
#include "qmab/trace.hpp"

namespace qmab::harness {

// Runs fn(0) .. fn(n - 1) on `threads` workers. Each index is handled exactly
// once; the first exception (by index) is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// Environment instance for one seed: fixed parameters from the config, else
// drawn from the seed's "environment" stream.
env::EnvironmentSpec make_environment(const EnvironmentConfig& cfg, std::uint64_t seed);

std::unique_ptr<pol::SpherePolicy> make_sphere_policy(const PolicyConfig& cfg, std::size_t dim, std::size_t T,
                                                      std::uint64_t seed);

// Linear features of a discrete observable: E[O] = phi(O) . (1, r).
matcore::Vec observable_features(const quantum::DiscreteObservable& obs);

qcb::QCBConfig make_qcb_config(const ExperimentConfig& cfg);

EpisodeTrace run_episode(const ExperimentConfig& cfg, std::uint64_t seed);
std::vector<EpisodeTrace> run_experiment(const ExperimentConfig& cfg, unsigned threads = 1);

// Sphere policy against a PSMAQB or SphereLinear environment for T rounds.
struct EpisodeOptions {
    bool eigenvalues = true;
    bool coverage = false;
    bool infidelity = false;
};

EpisodeTrace run_sphere_episode(const env::EnvironmentSpec& env, pol::SpherePolicy& policy, std::size_t T,
                                std::uint64_t seed, const EpisodeOptions& options);

// The explore-then-commit baseline on a pure-state bandit.
EpisodeTrace bandit_pls(const env::PSMAQB& env, std::size_t T, Rng& rng);

}  // namespace qmab::harness

#endif
