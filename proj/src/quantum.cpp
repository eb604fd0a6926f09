#include "qmab/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmab/errors.hpp"

namespace qmab::quantum {

namespace {

constexpr double kProbabilitySlack = 1e-10;
constexpr double kEigenThreshold = 1e-12;

bool all_finite(const Bloch& r) {
    return std::isfinite(r[0]) && std::isfinite(r[1]) && std::isfinite(r[2]);
}

void require_unit(const Bloch& r, const char* what) {
    if (!all_finite(r) || std::abs(bloch_norm(r) - 1.0) > kUnitTolerance) {
        throw ContractError(std::string(what) + ": Bloch vector must be unit length");
    }
}

double xlogx(double x) {
    return x <= 0.0 ? 0.0 : x * std::log(x);
}

}  // namespace

double bloch_dot(const Bloch& a, const Bloch& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

double bloch_norm(const Bloch& a) {
    return std::sqrt(bloch_dot(a, a));
}

Bloch bloch_scaled(const Bloch& a, double s) {
    return {a[0] * s, a[1] * s, a[2] * s};
}

Bloch to_bloch(const matcore::Vec& v) {
    require(v.size() == 3, "to_bloch: vector must have 3 entries");
    return {v[0], v[1], v[2]};
}

matcore::Vec to_vec(const Bloch& b) {
    return {b[0], b[1], b[2]};
}

QubitDensity::QubitDensity(const Bloch& r) : bloch(r) {
    if (!all_finite(r) || bloch_norm(r) > 1.0 + kUnitTolerance) {
        throw ContractError("QubitDensity: Bloch vector must have norm <= 1");
    }
}

PureQubit::PureQubit(const Bloch& r) : bloch(r) {
    require_unit(r, "PureQubit");
}

ProjectorAction::ProjectorAction(const Bloch& r) : bloch(r) {
    require_unit(r, "ProjectorAction");
}

DiscreteObservable::DiscreteObservable(std::vector<double> eigenvalues, std::vector<ProjectorTerm> projectors)
    : eigenvalues_(std::move(eigenvalues)), projectors_(std::move(projectors)) {
    require(!eigenvalues_.empty(), "DiscreteObservable: at least one eigenvalue required");
    require(eigenvalues_.size() == projectors_.size(),
            "DiscreteObservable: one projector per eigenvalue required");
    for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
        for (std::size_t j = i + 1; j < eigenvalues_.size(); ++j) {
            require(eigenvalues_[i] != eigenvalues_[j], "DiscreteObservable: eigenvalues must be distinct");
        }
    }
    double w = 0.0;
    Bloch m{0.0, 0.0, 0.0};
    for (const auto& p : projectors_) {
        // Positivity of (w I + m.sigma)/2 needs |m| <= w.
        require(bloch_norm(p.axis) <= p.weight + kUnitTolerance, "DiscreteObservable: projector is not positive");
        w += p.weight;
        for (int k = 0; k < 3; ++k) {
            m[k] += p.axis[k];
        }
    }
    require(std::abs(w - 2.0) <= kUnitTolerance && bloch_norm(m) <= kUnitTolerance,
            "DiscreteObservable: projectors must resolve the identity");
}

DiscreteObservable DiscreteObservable::pauli(std::size_t axis) {
    require(axis < 3, "pauli: axis must be 0, 1 or 2");
    Bloch n{0.0, 0.0, 0.0};
    n[axis] = 1.0;
    return from_direction(n, 1.0, -1.0);
}

DiscreteObservable DiscreteObservable::from_direction(const Bloch& n, double lambda_plus, double lambda_minus) {
    require_unit(n, "from_direction");
    return DiscreteObservable({lambda_plus, lambda_minus},
                              {ProjectorTerm{1.0, n}, ProjectorTerm{1.0, bloch_scaled(n, -1.0)}});
}

std::vector<double> outcome_probabilities(const QubitDensity& state, const DiscreteObservable& obs) {
    std::vector<double> p;
    p.reserve(obs.outcomes());
    for (const auto& term : obs.projectors()) {
        const double v = 0.5 * (term.weight + bloch_dot(term.axis, state.bloch));
        if (v < -kProbabilitySlack || v > 1.0 + kProbabilitySlack || !std::isfinite(v)) {
            throw ModelError("outcome_probabilities: Born probability " + std::to_string(v) + " outside [0, 1]");
        }
        p.push_back(std::clamp(v, 0.0, 1.0));
    }
    return p;
}

double expectation(const QubitDensity& state, const DiscreteObservable& obs) {
    const auto p = outcome_probabilities(state, obs);
    double e = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        e += p[i] * obs.eigenvalues()[i];
    }
    return e;
}

int born_sample(const PureQubit& state, const ProjectorAction& action, Rng& rng) {
    require_unit(state.bloch, "born_sample");
    require_unit(action.bloch, "born_sample");
    const double p = 0.5 * (1.0 + bloch_dot(state.bloch, action.bloch));
    return rng.uniform() < p ? 1 : 0;
}

double measure_observable(const QubitDensity& state, const DiscreteObservable& obs, Rng& rng) {
    const auto p = outcome_probabilities(state, obs);
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) {
            return obs.eigenvalues()[i];
        }
    }
    // Rounding can leave acc slightly below 1; fall back to the last outcome with nonzero mass.
    for (std::size_t i = p.size(); i-- > 0;) {
        if (p[i] > 0.0) {
            return obs.eigenvalues()[i];
        }
    }
    return obs.eigenvalues().back();
}

double fidelity(const QubitDensity& a, const QubitDensity& b) {
    const double ra = bloch_dot(a.bloch, a.bloch);
    const double rb = bloch_dot(b.bloch, b.bloch);
    const double mixed = std::max(0.0, 1.0 - ra) * std::max(0.0, 1.0 - rb);
    const double f = 0.5 * (1.0 + bloch_dot(a.bloch, b.bloch)) + 0.5 * std::sqrt(mixed);
    return std::clamp(f, 0.0, 1.0);
}

double infidelity(const Bloch& a, const Bloch& b) {
    return std::clamp(0.5 * (1.0 - bloch_dot(a, b)), 0.0, 1.0);
}

// D(rho||sigma) = Tr rho ln rho - Tr rho ln sigma. Both operators are diagonal in
// their own Bloch axis, and the overlap of rho with the eigenprojectors of sigma
// is (1 +- r.s_hat)/2.
Divergence relative_entropy(const QubitDensity& a, const QubitDensity& b) {
    const double ra = std::min(1.0, bloch_norm(a.bloch));
    const double rb = std::min(1.0, bloch_norm(b.bloch));
    auto clamp_eig = [](double v) { return v < kEigenThreshold ? std::max(v, 0.0) : v; };

    const double nu_p = clamp_eig(0.5 * (1.0 + ra));
    const double nu_m = clamp_eig(0.5 * (1.0 - ra));
    const double neg_entropy = xlogx(nu_p) + xlogx(nu_m);

    double cross = 0.0;
    if (rb == 0.0) {
        cross = -std::log(2.0);
    } else {
        const double proj = bloch_dot(a.bloch, b.bloch) / rb;
        const double mu_p = std::clamp(0.5 * (1.0 + proj), 0.0, 1.0);
        const double mu_m = std::clamp(0.5 * (1.0 - proj), 0.0, 1.0);
        const double lam_p = clamp_eig(0.5 * (1.0 + rb));
        const double lam_m = clamp_eig(0.5 * (1.0 - rb));
        if (lam_m <= kEigenThreshold) {
            if (mu_m > kEigenThreshold) {
                return Divergence{true, 0.0};
            }
        } else {
            cross += mu_m * std::log(lam_m);
        }
        cross += mu_p * std::log(lam_p);
    }
    return Divergence{false, std::max(0.0, neg_entropy - cross)};
}

QubitDensity depolarize(const QubitDensity& state, double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, "depolarize: alpha must lie in [0, 1]");
    return QubitDensity(bloch_scaled(state.bloch, 1.0 - alpha));
}

PureQubit random_pure(Rng& rng) {
    for (;;) {
        Bloch g{rng.normal(), rng.normal(), rng.normal()};
        const double n = bloch_norm(g);
        if (n > 1e-8) {
            return PureQubit(bloch_scaled(g, 1.0 / n));
        }
    }
}

}  // namespace qmab::quantum
