#include "qmab/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qmab/errors.hpp"

namespace qmab::thermo {

namespace {

void require_epsilon(double eps, const char* what) {
    if (!(eps > 0.0 && eps <= 0.5)) {
        throw ContractError(std::string(what) + ": epsilon must lie in (0, 1/2]");
    }
}

double xlogx(double x) {
    return x <= 0.0 ? 0.0 : x * std::log(x);
}

double binary_entropy(double a) {
    return -xlogx(a) - xlogx(1.0 - a);
}

double pure_fidelity(const quantum::PureQubit& s, const quantum::ProjectorAction& a) {
    return std::clamp(0.5 * (1.0 + quantum::bloch_dot(s.bloch, a.bloch)), 0.0, 1.0);
}

}  // namespace

double jc_angle(std::size_t n) {
    const double nn = static_cast<double>(n);
    return 0.5 * M_PI * std::sqrt(nn / (nn + 1.0));
}

JCProbabilities jc_probabilities(double p, std::size_t n) {
    require(p >= 0.0 && p <= 1.0, "jc_probabilities: p must lie in [0, 1]");
    const double s = std::sin(jc_angle(n));
    const double s2 = n == 0 ? 0.0 : s * s;
    JCProbabilities out;
    out.up = p;
    out.down = (1.0 - p) * s2;
    out.stay = (1.0 - p) * (1.0 - s2);
    return out;
}

double jc_expected_work(double omega, double p, std::size_t n) {
    const double s = std::sin(jc_angle(n));
    const double s2 = s * s;
    return omega * (p * (1.0 + s2) - s2);
}

double jc_dissipation(double omega, double p, std::size_t n) {
    const double s = std::sin(jc_angle(n));
    return omega * (1.0 + s * s) * (1.0 - p);
}

JCRound jc_round(const JCConfig& cfg, const quantum::PureQubit& state, const quantum::ProjectorAction& direction,
                 std::size_t n, Rng& rng) {
    require(std::isfinite(cfg.omega) && cfg.omega > 0.0, "jc_round: omega must be finite and positive");
    const double p = pure_fidelity(state, direction);
    const auto probs = jc_probabilities(p, n);
    const double u = rng.uniform();
    JCRound out;
    if (u < probs.up) {
        out.next_level = n + 1;
        out.reward = 1;
    } else if (u < probs.up + probs.down && n > 0) {
        out.next_level = n - 1;
    } else {
        out.next_level = n;
    }
    out.work = cfg.omega * (static_cast<double>(out.next_level) - static_cast<double>(n));
    out.dissipation = jc_dissipation(cfg.omega, p, n);
    return out;
}

double ThermalConfig::epsilon(std::size_t t) const {
    require(t >= 1, "ThermalConfig::epsilon: rounds start at 1");
    require(delta > 0.0 && delta < 1.0, "ThermalConfig::epsilon: delta must lie in (0, 1)");
    require(schedule_constant > 0.0, "ThermalConfig::epsilon: schedule constant must be positive");
    const double raw = schedule_constant * std::log(static_cast<double>(horizon) / delta) / static_cast<double>(t);
    return std::clamp(raw, std::numeric_limits<double>::min(), 0.5);
}

double default_schedule_constant(std::size_t d, double beta_w, std::size_t k) {
    const double dd = static_cast<double>(d);
    const double kk = static_cast<double>(k);
    return (576.0 * dd * dd * beta_w * beta_w * kk + 96.0 * dd * std::sqrt(dd - 1.0) * beta_w * kk) / 4.0;
}

double thermal_gap(std::size_t tau, double eps, std::size_t M, double beta) {
    require(M >= 1 && tau >= 1 && tau <= M, "thermal_gap: need 1 <= tau <= M");
    require_epsilon(eps, "thermal_gap");
    if (tau == M) {
        return 0.0;
    }
    const double r = static_cast<double>(tau) / static_cast<double>(M);
    const double low = eps + r * (0.5 - eps);
    const double high = 1.0 - low;
    return std::log(high / low) / beta;
}

ThermalLevels thermal_work_levels(std::size_t M, double eps, double beta) {
    require(M >= 1, "thermal_work_levels: M must be positive");
    require_epsilon(eps, "thermal_work_levels");
    require(beta > 0.0, "thermal_work_levels: beta must be positive");
    ThermalLevels lv;
    lv.eps = eps;
    lv.beta = beta;
    const double dp = (0.5 - eps) / static_cast<double>(M);
    lv.bit_probability.resize(M);
    lv.decrement.resize(M);
    std::vector<double> nu(M + 1, 0.0);
    for (std::size_t tau = 1; tau <= M; ++tau) {
        nu[tau - 1] = thermal_gap(tau, eps, M, beta);
    }
    for (std::size_t tau = 1; tau <= M; ++tau) {
        lv.bit_probability[tau - 1] = eps + static_cast<double>(tau) * dp;
        lv.decrement[tau - 1] = nu[tau - 1] - nu[tau];
    }
    lv.first_gap = nu[0];
    const double w0 = (std::log(2.0) + std::log(eps)) / beta;
    const double w1 = (std::log(2.0) + std::log(1.0 - eps)) / beta;
    lv.threshold = 0.5 * (w0 + w1);
    return lv;
}

double thermal_work_given_branch(const ThermalLevels& levels, int branch, Rng& rng) {
    require(branch == 0 || branch == 1, "thermal_work_given_branch: branch must be 0 or 1");
    double w = branch == 1 ? -levels.first_gap : 0.0;
    const std::size_t M = levels.decrement.size();
    for (std::size_t i = 0; i < M; ++i) {
        if (rng.uniform() < levels.bit_probability[i]) {
            w += levels.decrement[i];
        }
    }
    return w;
}

ThermalRound thermal_round(const ThermalLevels& levels, const quantum::PureQubit& state,
                           const quantum::ProjectorAction& direction, Rng& rng) {
    ThermalRound out;
    out.branch = rng.uniform() < pure_fidelity(state, direction) ? 0 : 1;
    out.work = thermal_work_given_branch(levels, out.branch, rng);
    out.reward = out.work >= levels.threshold ? 1 : 0;
    return out;
}

ThermalRound thermal_round(const ThermalConfig& cfg, const quantum::PureQubit& state,
                           const quantum::ProjectorAction& direction, double eps, Rng& rng) {
    return thermal_round(thermal_work_levels(cfg.M, eps, cfg.beta), state, direction, rng);
}

WorkPrediction expected_work(const quantum::PureQubit& state, const quantum::ProjectorAction& direction, double eps,
                             double beta) {
    require(eps >= 0.0 && eps <= 0.5, "expected_work: epsilon must lie in [0, 1/2]");
    require(beta > 0.0, "expected_work: beta must be positive");
    const auto psi = state.density();
    const auto target = quantum::depolarize(direction.density(), 2.0 * eps);
    const auto gain = quantum::relative_entropy(psi, quantum::QubitDensity::maximally_mixed());
    const auto loss = quantum::relative_entropy(psi, target);
    WorkPrediction out;
    if (loss.divergent || gain.divergent) {
        out.divergent = true;
        return out;
    }
    out.dissipation = loss.nats / beta;
    out.work = (gain.nats - loss.nats) / beta;
    return out;
}

double landauer_entropy(Protocol model, double p_success, double theta) {
    require(p_success >= 0.0 && p_success <= 1.0, "landauer_entropy: p must lie in [0, 1]");
    const double alpha = 1.0 - p_success;
    double s = binary_entropy(alpha);
    if (model == Protocol::JC) {
        const double c2 = std::cos(theta) * std::cos(theta);
        const double s2 = std::sin(theta) * std::sin(theta);
        s -= alpha * (xlogx(c2) + xlogx(s2));
    }
    return std::max(0.0, s);
}

void DissipationLedger::record(double dissipation, double extracted_work, double entropy) {
    per_round.push_back(dissipation);
    work.push_back(extracted_work);
    landauer.push_back(entropy);
    cumulative += dissipation;
    cumulative_work += extracted_work;
    cumulative_entropy += entropy;
}

ExtractionResult run_extraction(Protocol protocol, const quantum::PureQubit& state, pol::SpherePolicy& policy,
                                std::size_t T, const ExtractionConfig& cfg, std::uint64_t seed) {
    require(policy.dim() == 3, "run_extraction: policy must act on Bloch vectors");
    require(T >= 1, "run_extraction: T must be positive");
    Rng battery_rng = Rng::stream(seed, protocol == Protocol::JC ? "thermo-jc" : "thermo-thermal");
    Rng policy_rng = Rng::stream(seed, "policy-rng");

    ExtractionResult out;
    out.trace.seed = seed;
    out.trace.rows.reserve(T);
    std::size_t level = cfg.jc.initial_level;

    for (std::size_t t = 1; t <= T; ++t) {
        const matcore::Vec a = policy.next_action(policy_rng);
        const quantum::ProjectorAction direction(quantum::to_bloch(a));
        const double p = pure_fidelity(state, direction);
        int bit = 0;
        if (protocol == Protocol::JC) {
            const double theta_t = jc_angle(level);
            const auto r = jc_round(cfg.jc, state, direction, level, battery_rng);
            bit = r.reward;
            const double entropy = cfg.entropy_ledger ? landauer_entropy(Protocol::JC, p, theta_t) : 0.0;
            out.ledger.record(r.dissipation, r.work, entropy);
            level = r.next_level;
        } else {
            const double eps = cfg.thermal.epsilon(t);
            const auto levels = thermal_work_levels(cfg.thermal.M, eps, cfg.thermal.beta);
            const auto r = thermal_round(levels, state, direction, battery_rng);
            bit = r.reward;
            const auto pred = expected_work(state, direction, eps, cfg.thermal.beta);
            if (pred.divergent) {
                throw ModelError("run_extraction: divergent dissipation");
            }
            const double entropy = cfg.entropy_ledger ? landauer_entropy(Protocol::Thermal, p, 0.0) : 0.0;
            out.ledger.record(pred.dissipation, r.work, entropy);
        }
        policy.observe(a, 2.0 * bit - 1.0);
        const auto tel = policy.telemetry();
        out.trace.append(harness::format_action(a), static_cast<double>(bit), 1.0 - p, tel.lambda_min,
                         tel.lambda_max, std::nullopt);
        out.trace.dissipation.push_back(out.ledger.cumulative);
        out.trace.infidelity.push_back(quantum::infidelity(quantum::to_bloch(policy.estimate()), state.bloch));
    }
    return out;
}

}  // namespace qmab::thermo
