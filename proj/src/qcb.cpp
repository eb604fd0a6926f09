#include "qmab/qcb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "qmab/errors.hpp"
#include "qmab/trace.hpp"

namespace qmab::qcb {

namespace {

constexpr double kResidualTolerance = 1e-8;

std::size_t family_index(Family f) {
    for (std::size_t i = 0; i < kFamilyCount; ++i) {
        if (kFamilyOrder[i] == f) {
            return i;
        }
    }
    throw ContractError("family_index: unknown family");
}

ActionProfile profile(std::string name, std::map<Family, double> ex) {
    // Families not named are 0 so every profile covers every family.
    for (Family f : kFamilyOrder) {
        ex.emplace(f, 0.0);
    }
    return ActionProfile{std::move(name), std::move(ex)};
}

double profile_value(const ActionProfile& p, Family f) {
    const auto it = p.expectations.find(f);
    if (it == p.expectations.end()) {
        throw ContractError("qcb: profile '" + p.name + "' has no expectation for family " + family_name(f));
    }
    if (!(it->second >= -1.0 && it->second <= 1.0)) {
        throw ContractError("qcb: expectation outside [-1, 1] in profile '" + p.name + "'");
    }
    return it->second;
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::ZZ:
            return "Z_iZ_{i+1}";
        case Family::X:
            return "X_i";
        case Family::Z:
            return "Z_i";
        case Family::XX:
            return "X_iX_{i+1}";
        case Family::XZX:
            return "X_{i-1}Z_iX_{i+1}";
    }
    return "?";
}

Vec ContextVector::features() const {
    Vec f(kFamilyCount, 0.0);
    const double n = static_cast<double>(n_qubits);
    for (std::size_t i = 0; i < families.size(); ++i) {
        f[family_index(families[i])] = n * coefficients[i];
    }
    return f;
}

ContextVector ising_context(double h, std::size_t n) {
    require(n >= 2, "ising_context: need at least 2 qubits");
    require(std::isfinite(h), "ising_context: h must be finite");
    ContextVector c;
    c.families = {Family::ZZ, Family::X};
    c.coefficients = {1.0, h};
    c.n_qubits = n;
    c.params = {h, 0.0};
    return c;
}

ContextVector cluster_context(double j1, double j2, std::size_t n) {
    require(n >= 3, "cluster_context: need at least 3 qubits");
    require(std::isfinite(j1) && std::isfinite(j2), "cluster_context: couplings must be finite");
    ContextVector c;
    c.families = {Family::Z, Family::XX, Family::XZX};
    c.coefficients = {1.0, -j1, -j2};
    c.n_qubits = n;
    c.params = {j1, j2};
    return c;
}

double ActionProfile::expected_reward(const ContextVector& ctx) const {
    double e = 0.0;
    for (std::size_t i = 0; i < ctx.families.size(); ++i) {
        e += ctx.coefficients[i] * static_cast<double>(ctx.n_qubits) * profile_value(*this, ctx.families[i]);
    }
    return ctx.reward_is_negative_energy ? -e : e;
}

std::vector<ActionProfile> default_ising_profiles() {
    return {
        profile("neel", {{Family::ZZ, -1.0}, {Family::X, 0.0}}),
        profile("minus", {{Family::ZZ, 0.0}, {Family::X, -1.0}}),
        profile("plus", {{Family::ZZ, 0.0}, {Family::X, 1.0}}),
    };
}

std::vector<ActionProfile> default_cluster_profiles() {
    return {
        profile("z_down", {{Family::Z, -1.0}}),
        profile("xx_plus", {{Family::XX, 1.0}}),
        profile("xx_minus", {{Family::XX, -1.0}}),
        profile("xzx_plus", {{Family::XZX, 1.0}}),
        profile("xzx_minus", {{Family::XZX, -1.0}}),
    };
}

double qcb_reward(const ActionProfile& p, const ContextVector& ctx, Rng& rng) {
    double energy = 0.0;
    for (std::size_t i = 0; i < ctx.families.size(); ++i) {
        const double mean = profile_value(p, ctx.families[i]);
        const double coeff = ctx.coefficients[i];
        if (coeff == 0.0) {
            continue;
        }
        const double p_plus = 0.5 * (1.0 + mean);
        double sum = 0.0;
        for (std::size_t site = 0; site < ctx.n_qubits; ++site) {
            sum += rng.uniform() < p_plus ? 1.0 : -1.0;
        }
        energy += coeff * sum;
    }
    return ctx.reward_is_negative_energy ? -energy : energy;
}

GramIngest gram_ingest(GramBasis& basis, const Vec& c) {
    require(c.size() == basis.ambient_, "gram_ingest: context has the wrong dimension");
    GramIngest out;
    out.coords.assign(basis.basis_.size(), 0.0);
    Vec residual = c;
    // Two orthogonalization passes keep the basis orthonormal to rounding error.
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < basis.basis_.size(); ++i) {
            const double proj = matcore::dot(residual, basis.basis_[i]);
            out.coords[i] += proj;
            matcore::axpy(-proj, basis.basis_[i], residual);
        }
    }
    const double cn = matcore::norm(c);
    const double rn = matcore::norm(residual);
    if (cn > 0.0 && rn > kResidualTolerance * cn && basis.basis_.size() < basis.ambient_) {
        basis.basis_.push_back(matcore::scaled(residual, 1.0 / rn));
        out.coords.push_back(rn);
        out.grew = true;
    }
    return out;
}

std::size_t clinucb_step(const std::vector<est::LSEAccumulator>& per_arm, const Vec& c_eff, double alpha) {
    require(!per_arm.empty(), "clinucb_step: no arms");
    require(!c_eff.empty(), "clinucb_step: effective dimension must be positive");
    std::size_t best = 0;
    double best_p = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < per_arm.size(); ++a) {
        const double p = matcore::dot(per_arm[a].estimate(), c_eff) + alpha * per_arm[a].design().inverse_norm(c_eff);
        if (p > best_p) {
            best_p = p;
            best = a;
        }
    }
    return best;
}

double alpha_t(double t, double delta, std::size_t d, double L, double m) {
    require(delta > 0.0 && delta < 1.0, "alpha_t: delta must lie in (0, 1)");
    require(d >= 1, "alpha_t: d must be positive");
    const double dd = static_cast<double>(d);
    return m + std::sqrt(2.0 * std::log(1.0 / delta) + dd * std::log(1.0 + t * L * L / dd));
}

CLinUCB::CLinUCB(std::size_t arms, CLinUCBConfig cfg) : arm_count_(arms), cfg_(cfg) {
    require(arms >= 1, "CLinUCB: at least one arm required");
    require(cfg.lambda > 0.0, "CLinUCB: lambda must be positive");
}

double CLinUCB::current_alpha() const {
    if (cfg_.alpha_override) {
        return *cfg_.alpha_override;
    }
    return alpha_t(static_cast<double>(rounds_), cfg_.delta, std::max<std::size_t>(1, d_eff()), cfg_.L, cfg_.m);
}

std::size_t CLinUCB::select(const Vec& context_features) {
    auto ingest = gram_ingest(basis_, context_features);
    if (ingest.grew) {
        if (arms_.empty()) {
            arms_.assign(arm_count_, est::LSEAccumulator(1, cfg_.lambda));
        } else {
            for (auto& acc : arms_) {
                acc.append_dimension();
            }
        }
    }
    last_coords_ = std::move(ingest.coords);
    if (arms_.empty()) {
        return 0;
    }
    return clinucb_step(arms_, last_coords_, current_alpha());
}

void CLinUCB::observe(std::size_t arm, double reward) {
    require(arm < arm_count_, "CLinUCB::observe: arm index out of range");
    ++rounds_;
    if (!arms_.empty()) {
        arms_[arm].update(last_coords_, reward, 1.0);
    }
}

std::size_t classifier_regret(const QCBTrace& trace) {
    return static_cast<std::size_t>(
        std::count_if(trace.rows.begin(), trace.rows.end(), [](const QCBRow& r) { return r.misclassified; }));
}

std::vector<PhaseRow> phase_map_export(const QCBTrace& trace, std::size_t burn_in) {
    require(burn_in < trace.rows.size(), "phase_map_export: burn_in must be below T");
    std::vector<PhaseRow> out;
    out.reserve(trace.rows.size() - burn_in);
    for (std::size_t t = burn_in; t < trace.rows.size(); ++t) {
        const auto& r = trace.rows[t];
        out.push_back(PhaseRow{r.params[0], r.params[1], r.chosen});
    }
    return out;
}

void write_phase_map_csv(const std::vector<PhaseRow>& rows, std::ostream& out) {
    out << "param1,param2,arm\n";
    for (const auto& r : rows) {
        out << harness::format_double(r.param1) << ',' << harness::format_double(r.param2) << ',' << r.arm << '\n';
    }
}

QCBTrace run_qcb(const QCBConfig& cfg, std::uint64_t seed) {
    require(cfg.T >= 1, "run_qcb: T must be positive");
    require(cfg.range[0] < cfg.range[1], "run_qcb: empty parameter range");
    const auto profiles = !cfg.profiles.empty()
                              ? cfg.profiles
                              : (cfg.model == Model::Ising ? default_ising_profiles() : default_cluster_profiles());
    CLinUCBConfig bandit = cfg.bandit;
    if (cfg.L_from_contexts) {
        const double r = std::max(std::abs(cfg.range[0]), std::abs(cfg.range[1]));
        const double n = static_cast<double>(cfg.n);
        bandit.L = cfg.model == Model::Ising ? n * std::sqrt(1.0 + r * r) : n * std::sqrt(1.0 + 2.0 * r * r);
    }
    CLinUCB learner(profiles.size(), bandit);
    Rng context_rng = Rng::stream(seed, "qcb-context");
    Rng reward_rng = Rng::stream(seed, "qcb-reward");
    const double lo = cfg.range[0];
    const double width = cfg.range[1] - cfg.range[0];

    QCBTrace trace;
    trace.rows.reserve(cfg.T);
    trace.d_eff.reserve(cfg.T);
    for (std::size_t t = 0; t < cfg.T; ++t) {
        ContextVector ctx;
        if (cfg.model == Model::Ising) {
            ctx = ising_context(lo + width * context_rng.uniform(), cfg.n);
        } else {
            const double j1 = lo + width * context_rng.uniform();
            const double j2 = lo + width * context_rng.uniform();
            ctx = cluster_context(j1, j2, cfg.n);
        }
        const std::size_t arm = learner.select(ctx.features());
        const double reward = qcb_reward(profiles[arm], ctx, reward_rng);
        learner.observe(arm, reward);

        QCBRow row;
        row.params = ctx.params;
        row.chosen = arm;
        row.reward = reward;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < profiles.size(); ++a) {
            const double e = profiles[a].expected_reward(ctx);
            if (e > best) {
                best = e;
                row.optimal = a;
            }
        }
        row.regret = best - profiles[arm].expected_reward(ctx);
        row.misclassified = arm != row.optimal;
        trace.rows.push_back(row);
        trace.d_eff.push_back(learner.d_eff());
    }
    return trace;
}

}  // namespace qmab::qcb
