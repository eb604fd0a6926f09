#include "qmab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "qmab/errors.hpp"
#include "qmab/thermo.hpp"

namespace qmab::harness {

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) {
        return;
    }
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

matcore::Vec observable_features(const quantum::DiscreteObservable& obs) {
    matcore::Vec phi(4, 0.0);
    for (std::size_t i = 0; i < obs.outcomes(); ++i) {
        const double lam = obs.eigenvalues()[i];
        const auto& p = obs.projectors()[i];
        phi[0] += lam * p.weight / 2.0;
        for (std::size_t k = 0; k < 3; ++k) {
            phi[k + 1] += lam * p.axis[k] / 2.0;
        }
    }
    return phi;
}

env::EnvironmentSpec make_environment(const EnvironmentConfig& cfg, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "environment");
    if (cfg.kind == "sphere") {
        matcore::Vec theta = cfg.theta ? matcore::normalized(*cfg.theta) : env::random_unit_vector(cfg.dim, rng);
        return env::SphereLinear(std::move(theta), cfg.noise);
    }
    if (cfg.kind == "psmaqb") {
        return env::PSMAQB{cfg.state ? quantum::PureQubit(*cfg.state) : quantum::random_pure(rng)};
    }
    if (cfg.kind == "discrete") {
        const quantum::QubitDensity rho = cfg.state ? quantum::QubitDensity(*cfg.state) : quantum::random_pure(rng).density();
        return env::DiscreteMAQB(cfg.observables, rho);
    }
    throw ConfigError("unknown environment kind '" + cfg.kind + "'");
}

namespace {

// 1 / T^power, with T floored at 2 so that the result stays inside (0, 1).
double horizon_delta(std::size_t T, int power) {
    return std::pow(static_cast<double>(std::max<std::size_t>(T, 2)), -power);
}

std::size_t batch_budget(const PolicyConfig& cfg, std::size_t dim, std::size_t T) {
    if (cfg.batch_budget) {
        return std::max<std::size_t>(1, *cfg.batch_budget);
    }
    return std::max<std::size_t>(1, T / (2 * (dim - 1)));
}

std::vector<matcore::Vec> sphere_grid(std::size_t dim, std::size_t n) {
    if (dim == 3) {
        return pol::fibonacci_sphere(n);
    }
    std::vector<matcore::Vec> grid;
    const double two_pi = 2.0 * std::acos(-1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = two_pi * static_cast<double>(i) / static_cast<double>(n);
        grid.push_back({std::cos(phi), std::sin(phi)});
    }
    return grid;
}

matcore::Vec environment_theta(const env::EnvironmentSpec& env) {
    if (const auto* s = std::get_if<env::SphereLinear>(&env)) {
        return s->theta();
    }
    if (const auto* p = std::get_if<env::PSMAQB>(&env)) {
        return quantum::to_vec(p->state.bloch);
    }
    throw ContractError("environment has no sphere parameter");
}

thermo::ExtractionConfig extraction_config(const ExperimentConfig& cfg) {
    thermo::ExtractionConfig x;
    x.jc = cfg.jc;
    x.entropy_ledger = cfg.telemetry.ledger;
    x.thermal.beta = cfg.thermal.beta;
    x.thermal.M = cfg.thermal.M;
    x.thermal.delta = cfg.thermal.delta;
    x.thermal.horizon = cfg.T;
    if (cfg.thermal.schedule_constant) {
        x.thermal.schedule_constant = *cfg.thermal.schedule_constant;
    } else {
        const double bw = est::beta_mom(3, cfg.policy.lambda0, 1.0);
        x.thermal.schedule_constant = thermo::default_schedule_constant(3, bw, cfg.policy.k);
    }
    return x;
}

EpisodeTrace run_discrete(const ExperimentConfig& cfg, const env::DiscreteMAQB& env, std::uint64_t seed) {
    Rng noise = Rng::stream(seed, "env-noise");
    EpisodeTrace trace;
    trace.seed = seed;
    trace.rows.reserve(cfg.T);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (cfg.policy.kind == "ucb") {
        pol::UCB ucb(env.arms(), cfg.policy.eta, cfg.policy.delta.value_or(horizon_delta(cfg.T, 2)));
        for (std::size_t t = 0; t < cfg.T; ++t) {
            const std::size_t arm = ucb.select();
            const auto out = env::pull(env, arm, noise);
            ucb.observe(arm, out.reward);
            trace.append(format_action(arm), out.reward, out.instantaneous_regret, nan, nan, std::nullopt);
        }
        return trace;
    }
    std::vector<matcore::Vec> features;
    for (const auto& obs : env.observables()) {
        features.push_back(observable_features(obs));
    }
    pol::PhasedElimination pe(std::move(features), cfg.policy.delta.value_or(horizon_delta(cfg.T, 1)));
    for (std::size_t t = 0; t < cfg.T; ++t) {
        const std::size_t arm = pe.select();
        const auto out = env::pull(env, arm, noise);
        pe.observe(arm, out.reward);
        trace.append(format_action(arm), out.reward, out.instantaneous_regret, nan, nan, std::nullopt);
    }
    return trace;
}

}  // namespace

std::unique_ptr<pol::SpherePolicy> make_sphere_policy(const PolicyConfig& cfg, std::size_t dim, std::size_t T,
                                                      std::uint64_t seed) {
    Rng init = Rng::stream(seed, "policy-init");
    const std::string& k = cfg.kind;
    if (k == "linucb") {
        pol::LinUCBConfig c;
        c.lambda = cfg.lambda;
        c.delta = cfg.delta.value_or(0.1);
        c.L = cfg.L;
        c.eta = cfg.eta;
        return std::make_unique<pol::LinUCBSphere>(dim, c);
    }
    if (k == "linucb_circle") {
        require(dim == 2, "linucb_circle acts on the circle only");
        pol::CircleConfig c;
        c.lambda0 = cfg.lambda0;
        c.delta = cfg.delta.value_or(0.1);
        return std::make_unique<pol::LinUCBCircle>(c, init);
    }
    if (k == "vn") {
        pol::VNConfig c;
        c.lambda0 = cfg.lambda0;
        c.delta_prime = cfg.delta_prime;
        c.batch_budget = batch_budget(cfg, dim, T);
        c.weight_beta_override = cfg.weight_beta_override;
        return std::make_unique<pol::LinUCBVN>(dim, c, init);
    }
    if (k == "vvn") {
        pol::VVNConfig c;
        c.lambda0 = cfg.lambda0;
        c.k = cfg.k_theoretical ? pol::vvn_theoretical_k(batch_budget(cfg, dim, T)) : cfg.k;
        c.weight_beta_override = cfg.weight_beta_override;
        return std::make_unique<pol::LinUCBVVN>(dim, c, init);
    }
    if (k == "bandit_pls") {
        require(dim == 3, "bandit_pls needs Bloch vectors");
        return std::make_unique<pol::BanditPLS>(T);
    }
    if (k == "phased_elim") {
        return std::make_unique<pol::GridPhasedElimination>(sphere_grid(dim, cfg.grid),
                                                            cfg.delta.value_or(horizon_delta(T, 1)));
    }
    if (k == "fixed") {
        require(cfg.action.has_value() && cfg.action->size() == dim, "fixed policy needs an action of matching size");
        return std::make_unique<pol::FixedPolicy>(matcore::normalized(*cfg.action));
    }
    throw ConfigError("policy '" + k + "' has no sphere form");
}

EpisodeTrace run_sphere_episode(const env::EnvironmentSpec& env, pol::SpherePolicy& policy, std::size_t T,
                                std::uint64_t seed, const EpisodeOptions& options) {
    const matcore::Vec theta = environment_theta(env);
    require(theta.size() == policy.dim(), "run_sphere_episode: policy and environment dimensions differ");
    const bool pure = std::holds_alternative<env::PSMAQB>(env);
    Rng noise = Rng::stream(seed, "env-noise");
    Rng policy_rng = Rng::stream(seed, "policy");
    const double nan = std::numeric_limits<double>::quiet_NaN();

    EpisodeTrace trace;
    trace.seed = seed;
    trace.rows.reserve(T);
    if (options.infidelity) {
        trace.infidelity.reserve(T);
    }
    for (std::size_t t = 0; t < T; ++t) {
        const matcore::Vec a = policy.next_action(policy_rng);
        env::StepOutcome out;
        if (pure) {
            out = env::pull(std::get<env::PSMAQB>(env), quantum::ProjectorAction(quantum::to_bloch(a)), noise);
            policy.observe(a, 2.0 * out.reward - 1.0);
        } else {
            out = env::pull(std::get<env::SphereLinear>(env), a, noise);
            policy.observe(a, out.reward);
        }
        double lmin = nan;
        double lmax = nan;
        if (options.eigenvalues) {
            const auto tel = policy.telemetry();
            lmin = tel.lambda_min;
            lmax = tel.lambda_max;
        }
        std::optional<bool> coverage;
        if (options.coverage) {
            coverage = policy.covers(theta);
        }
        trace.append(format_action(a), out.reward, out.instantaneous_regret, lmin, lmax, coverage);
        if (options.infidelity) {
            const matcore::Vec est = policy.estimate();
            trace.infidelity.push_back((1.0 - matcore::dot(est, theta)) / 2.0);
        }
    }
    return trace;
}

EpisodeTrace bandit_pls(const env::PSMAQB& env, std::size_t T, Rng& rng) {
    pol::BanditPLS policy(T);
    EpisodeTrace trace;
    trace.rows.reserve(T);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t t = 0; t < T; ++t) {
        const matcore::Vec a = policy.next_action(rng);
        const auto out = env::pull(env, quantum::ProjectorAction(quantum::to_bloch(a)), rng);
        policy.observe(a, 2.0 * out.reward - 1.0);
        trace.append(format_action(a), out.reward, out.instantaneous_regret, nan, nan, std::nullopt);
    }
    return trace;
}

qcb::QCBConfig make_qcb_config(const ExperimentConfig& cfg) {
    qcb::QCBConfig q;
    q.model = cfg.qcb.model;
    q.n = cfg.qcb.n;
    q.range = cfg.qcb.range;
    q.T = cfg.T;
    q.bandit.lambda = cfg.qcb.lambda;
    q.bandit.delta = cfg.qcb.delta;
    q.bandit.m = cfg.qcb.m;
    q.bandit.alpha_override = cfg.qcb.alpha;
    return q;
}

EpisodeTrace run_episode(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.protocol == "qcb") {
        const auto q = qcb::run_qcb(make_qcb_config(cfg), seed);
        EpisodeTrace trace;
        trace.seed = seed;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (const auto& row : q.rows) {
            trace.append(format_action(row.chosen), row.reward, row.regret, nan, nan, std::nullopt);
        }
        return trace;
    }

    const auto env = make_environment(cfg.environment, seed);
    if (const auto* d = std::get_if<env::DiscreteMAQB>(&env)) {
        return run_discrete(cfg, *d, seed);
    }
    const std::size_t dim = std::holds_alternative<env::PSMAQB>(env) ? 3 : cfg.environment.dim;
    auto policy = make_sphere_policy(cfg.policy, dim, cfg.T, seed);

    if (cfg.protocol == "jc" || cfg.protocol == "thermal") {
        const auto& state = std::get<env::PSMAQB>(env).state;
        const auto protocol = cfg.protocol == "jc" ? thermo::Protocol::JC : thermo::Protocol::Thermal;
        auto result = thermo::run_extraction(protocol, state, *policy, cfg.T, extraction_config(cfg), seed);
        result.trace.seed = seed;
        return std::move(result.trace);
    }

    EpisodeOptions options;
    options.eigenvalues = cfg.telemetry.eigenvalues;
    options.coverage = cfg.telemetry.coverage;
    options.infidelity = cfg.telemetry.infidelity;
    return run_sphere_episode(env, *policy, cfg.T, seed, options);
}

std::vector<EpisodeTrace> run_experiment(const ExperimentConfig& cfg, unsigned threads) {
    std::vector<EpisodeTrace> traces(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), threads, [&](std::size_t i) { traces[i] = run_episode(cfg, cfg.seeds[i]); });
    return traces;
}

}  // namespace qmab::harness
