#include "qmab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qmab/errors.hpp"
#include "qmab/estimators.hpp"
#include "qmab/policies.hpp"

namespace qmab::harness {

namespace {

using json = nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: field '") + key + "' has the wrong type: " + e.what());
    }
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return get_or<T>(j, key, T{});
}

quantum::Bloch parse_bloch(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) {
        throw ConfigError(std::string("config: ") + what + " must be an array of 3 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

env::NoiseModel parse_noise(const std::string& name, double sigma) {
    if (name == "gaussian") {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            throw ConfigError("config: gaussian noise needs a finite positive sigma");
        }
        return env::NoiseModel::gaussian(sigma);
    }
    if (name == "vanishing_subgaussian") {
        return env::NoiseModel::vanishing_subgaussian();
    }
    if (name == "vanishing_bernoulli") {
        return env::NoiseModel::vanishing_bernoulli();
    }
    throw ConfigError("config: unknown noise model '" + name + "'");
}

quantum::DiscreteObservable parse_observable(const json& j) {
    try {
        if (j.contains("pauli")) {
            const std::string axis = j.at("pauli").get<std::string>();
            if (axis == "x") return quantum::DiscreteObservable::pauli(0);
            if (axis == "y") return quantum::DiscreteObservable::pauli(1);
            if (axis == "z") return quantum::DiscreteObservable::pauli(2);
            throw ConfigError("config: pauli axis must be x, y or z");
        }
        const auto n = parse_bloch(j.at("direction"), "observable direction");
        const auto ev = j.at("eigenvalues").get<std::vector<double>>();
        if (ev.size() != 2) {
            throw ConfigError("config: a direction observable needs exactly 2 eigenvalues");
        }
        return quantum::DiscreteObservable::from_direction(n, ev[0], ev[1]);
    } catch (const ContractError& e) {
        throw ConfigError(std::string("config: invalid observable: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid observable: ") + e.what());
    }
}

std::vector<std::uint64_t> parse_seeds(const json& j) {
    if (j.is_array()) {
        return j.get<std::vector<std::uint64_t>>();
    }
    if (j.is_object()) {
        const auto base = get_or<std::uint64_t>(j, "base", 1);
        const auto count = get_or<std::uint64_t>(j, "count", 1);
        std::vector<std::uint64_t> s;
        for (std::uint64_t i = 0; i < count; ++i) {
            s.push_back(base + i);
        }
        return s;
    }
    throw ConfigError("config: seeds must be an array or {\"base\", \"count\"}");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config: top level must be an object");
    }
    ExperimentConfig cfg;
    cfg.schema_version = get_or<int>(j, "schema_version", -1);
    if (cfg.schema_version != kSchemaVersion) {
        throw ConfigError("config: schema_version must be " + std::to_string(kSchemaVersion));
    }
    cfg.protocol = get_or<std::string>(j, "protocol", "bandit");
    cfg.T = get_or<std::size_t>(j, "T", 1000);
    cfg.output = get_or<std::string>(j, "output", "");
    if (j.contains("seeds")) {
        cfg.seeds = parse_seeds(j.at("seeds"));
    }

    const json e = j.value("environment", json::object());
    cfg.environment.kind = get_or<std::string>(e, "kind", "psmaqb");
    cfg.environment.dim = get_or<std::size_t>(e, "dim", cfg.environment.kind == "sphere" ? 2 : 3);
    cfg.environment.noise =
        parse_noise(get_or<std::string>(e, "noise", "vanishing_subgaussian"), get_or<double>(e, "sigma", 1.0));
    if (auto theta = get_opt<std::vector<double>>(e, "theta")) {
        cfg.environment.theta = *theta;
    }
    if (e.contains("state") && !e.at("state").is_null()) {
        cfg.environment.state = parse_bloch(e.at("state"), "environment state");
    }
    if (e.contains("observables")) {
        for (const auto& o : e.at("observables")) {
            cfg.environment.observables.push_back(parse_observable(o));
        }
    }

    const json p = j.value("policy", json::object());
    auto& pc = cfg.policy;
    pc.kind = get_or<std::string>(p, "kind", "vvn");
    pc.lambda = get_or<double>(p, "lambda", 1.0);
    pc.lambda0 = get_or<double>(p, "lambda0", pc.kind == "linucb_circle" ? 5.0 : 2.0);
    pc.delta = get_opt<double>(p, "delta");
    pc.delta_prime = get_or<double>(p, "delta_prime", 0.1);
    pc.eta = get_or<double>(p, "eta", 1.0);
    pc.L = get_or<double>(p, "L", 1.0);
    if (p.contains("k") && p.at("k").is_string()) {
        if (p.at("k").get<std::string>() != "theoretical") {
            throw ConfigError("config: policy.k must be an integer or \"theoretical\"");
        }
        pc.k_theoretical = true;
    } else {
        pc.k = get_or<std::size_t>(p, "k", 10);
    }
    pc.batch_budget = get_opt<std::size_t>(p, "batch_budget");
    pc.weight_beta_override = get_opt<double>(p, "weight_beta_override");
    pc.grid = get_or<std::size_t>(p, "grid", 64);
    if (auto a = get_opt<std::vector<double>>(p, "action")) {
        pc.action = *a;
    }

    const json t = j.value("telemetry", json::object());
    cfg.telemetry.eigenvalues = get_or<bool>(t, "eigenvalues", true);
    cfg.telemetry.coverage = get_or<bool>(t, "coverage", false);
    cfg.telemetry.infidelity = get_or<bool>(t, "infidelity", false);
    cfg.telemetry.ledger = get_or<bool>(t, "ledger", false);

    const json jc = j.value("jc", json::object());
    cfg.jc.omega = get_or<double>(jc, "omega", 1.0);
    cfg.jc.initial_level = get_or<std::size_t>(jc, "initial_level", 0);

    const json th = j.value("thermal", json::object());
    cfg.thermal.beta = get_or<double>(th, "beta", 1.0);
    cfg.thermal.M = get_or<std::size_t>(th, "M", 100);
    cfg.thermal.schedule_constant = get_opt<double>(th, "schedule_constant");
    cfg.thermal.delta = get_or<double>(th, "delta", 0.1);

    const json q = j.value("qcb", json::object());
    const std::string model = get_or<std::string>(q, "model", "ising");
    if (model == "ising") {
        cfg.qcb.model = qcb::Model::Ising;
    } else if (model == "cluster") {
        cfg.qcb.model = qcb::Model::Cluster;
    } else {
        throw ConfigError("config: qcb.model must be ising or cluster");
    }
    cfg.qcb.n = get_or<std::size_t>(q, "n", 10);
    if (q.contains("range")) {
        const auto r = get_or<std::vector<double>>(q, "range", {});
        if (r.size() != 2) {
            throw ConfigError("config: qcb.range must hold two numbers");
        }
        cfg.qcb.range = {r[0], r[1]};
    }
    cfg.qcb.lambda = get_or<double>(q, "lambda", 1.0);
    cfg.qcb.delta = get_or<double>(q, "delta", 0.1);
    cfg.qcb.m = get_or<double>(q, "m", 1.0);
    cfg.qcb.alpha = get_opt<double>(q, "alpha");
    cfg.qcb.burn_in = get_or<std::size_t>(q, "burn_in", 200);

    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.T < 1) {
        throw ConfigError("config: T must be at least 1");
    }
    if (cfg.seeds.empty()) {
        throw ConfigError("config: seeds must be nonempty");
    }
    if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size()) {
        throw ConfigError("config: seeds must be distinct");
    }
    const std::set<std::string> protocols{"bandit", "jc", "thermal", "qcb"};
    if (!protocols.count(cfg.protocol)) {
        throw ConfigError("config: unknown protocol '" + cfg.protocol + "'");
    }
    if (cfg.protocol == "qcb") {
        if (cfg.qcb.range[0] >= cfg.qcb.range[1]) {
            throw ConfigError("config: qcb.range must be increasing");
        }
        if (cfg.qcb.burn_in >= cfg.T) {
            throw ConfigError("config: qcb.burn_in must be below T");
        }
        const std::size_t min_n = cfg.qcb.model == qcb::Model::Ising ? 2 : 3;
        if (cfg.qcb.n < min_n) {
            throw ConfigError("config: qcb.n is too small for the chosen model");
        }
        return;
    }

    const auto& e = cfg.environment;
    const auto& p = cfg.policy;
    const std::set<std::string> env_kinds{"psmaqb", "sphere", "discrete"};
    if (!env_kinds.count(e.kind)) {
        throw ConfigError("config: unknown environment kind '" + e.kind + "'");
    }
    const std::set<std::string> policy_kinds{"ucb", "linucb", "linucb_circle", "vn", "vvn", "bandit_pls",
                                             "phased_elim", "fixed"};
    if (!policy_kinds.count(p.kind)) {
        throw ConfigError("config: unknown policy kind '" + p.kind + "'");
    }
    const std::size_t dim = e.kind == "sphere" ? e.dim : 3;
    auto clash = [&](const std::string& why) {
        throw ConfigError("config: policy '" + p.kind + "' cannot run on environment '" + e.kind + "' (" + why + ")");
    };

    if ((cfg.protocol == "jc" || cfg.protocol == "thermal") && e.kind != "psmaqb") {
        throw ConfigError("config: protocol '" + cfg.protocol + "' needs a psmaqb environment");
    }
    if (e.kind == "discrete") {
        if (p.kind != "ucb" && p.kind != "phased_elim") {
            clash("discrete arms need ucb or phased_elim");
        }
        if (e.observables.empty()) {
            throw ConfigError("config: a discrete environment needs at least one observable");
        }
    } else {
        if (p.kind == "ucb") {
            clash("ucb needs a finite arm set");
        }
        if (dim < 2) {
            throw ConfigError("config: sphere dimension must be at least 2");
        }
        if (p.kind == "linucb_circle" && dim != 2) {
            clash("linucb_circle acts on the circle only");
        }
        if (p.kind == "bandit_pls" && dim != 3) {
            clash("bandit_pls needs Bloch vectors");
        }
        if (p.kind == "phased_elim" && dim != 2 && dim != 3) {
            clash("phased_elim grids exist for d = 2 and d = 3");
        }
        if (p.kind == "fixed" && (!p.action || p.action->size() != dim)) {
            throw ConfigError("config: fixed policy needs an action of the environment's dimension");
        }
        if (e.theta && e.theta->size() != dim) {
            throw ConfigError("config: environment theta has the wrong dimension");
        }
    }
    if (e.state) {
        try {
            if (e.kind == "discrete") {
                quantum::QubitDensity check(*e.state);
            } else {
                quantum::PureQubit check(*e.state);
            }
        } catch (const ContractError& err) {
            throw ConfigError(std::string("config: environment state is invalid: ") + err.what());
        }
    }
    if (p.delta && !(*p.delta > 0.0 && *p.delta < 1.0)) {
        throw ConfigError("config: policy.delta must lie in (0, 1)");
    }
    if (p.kind == "vn" && p.lambda0 < pol::vn_lambda0_floor(dim)) {
        throw ConfigError("config: vn lambda0 below the admissible floor " + std::to_string(pol::vn_lambda0_floor(dim)));
    }
    if (p.kind == "vvn") {
        if (!p.k_theoretical && p.k < 1) {
            throw ConfigError("config: vvn needs k >= 1");
        }
        const double bw = est::beta_mom(dim, p.lambda0, 1.0);
        if (p.lambda0 < pol::vvn_lambda0_floor(dim, bw)) {
            throw ConfigError("config: vvn lambda0 below the admissible floor");
        }
    }
    if (p.kind == "linucb_circle" && !(p.lambda0 > 1.0)) {
        throw ConfigError("config: linucb_circle needs lambda0 > 1");
    }
    if (p.weight_beta_override && !(*p.weight_beta_override > 0.0)) {
        throw ConfigError("config: weight_beta_override must be positive");
    }
}

}  // namespace qmab::harness
