#ifndef QMAB_CONFIG_HPP
#define QMAB_CONFIG_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmab/environments.hpp"
#include "qmab/qcb.hpp"
#include "qmab/quantum.hpp"
#include "qmab/thermo.hpp"

namespace qmab::harness {

inline constexpr int kSchemaVersion = 1;

struct EnvironmentConfig {
    std::string kind = "psmaqb";  // psmaqb | sphere | discrete
    std::size_t dim = 3;
    env::NoiseModel noise = env::NoiseModel::vanishing_subgaussian();
    std::optional<matcore::Vec> theta;        // sphere: fixed parameter, else random per seed
    std::optional<quantum::Bloch> state;      // psmaqb: fixed pure state; discrete: any |r| <= 1. Random pure per seed when absent.
    std::vector<quantum::DiscreteObservable> observables;  // discrete only
};

struct PolicyConfig {
    std::string kind = "vvn";  // ucb | linucb | linucb_circle | vn | vvn | bandit_pls | phased_elim | fixed
    double lambda = 1.0;
    double lambda0 = 2.0;
    std::optional<double> delta;  // per-policy default when absent
    double delta_prime = 0.1;
    double eta = 1.0;
    double L = 1.0;
    std::size_t k = 10;
    bool k_theoretical = false;
    std::optional<std::size_t> batch_budget;
    std::optional<double> weight_beta_override;
    std::size_t grid = 64;
    std::optional<matcore::Vec> action;  // fixed policy
};

struct TelemetryFlags {
    bool eigenvalues = true;
    bool coverage = false;
    bool infidelity = false;
    bool ledger = false;
};

struct ThermalSettings {
    double beta = 1.0;
    std::size_t M = 100;
    std::optional<double> schedule_constant;  // default: the median-of-means infidelity constant
    double delta = 0.1;
};

struct QCBSettings {
    qcb::Model model = qcb::Model::Ising;
    std::size_t n = 10;
    std::array<double, 2> range{-2.0, 2.0};
    double lambda = 1.0;
    double delta = 0.1;
    double m = 1.0;
    std::optional<double> alpha;
    std::size_t burn_in = 200;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string protocol = "bandit";  // bandit | jc | thermal | qcb
    EnvironmentConfig environment;
    PolicyConfig policy;
    std::size_t T = 1000;
    std::vector<std::uint64_t> seeds{1};
    std::string output;
    TelemetryFlags telemetry;
    thermo::JCConfig jc;
    ThermalSettings thermal;
    QCBSettings qcb;
};

// Parses the JSON text; throws ConfigError on schema problems.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
// Checks pairing and parameter constraints; throws ConfigError naming the clash.
void validate(const ExperimentConfig& cfg);

}  // namespace qmab::harness

#endif
