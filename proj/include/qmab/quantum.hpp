#ifndef QMAB_QUANTUM_HPP
#define QMAB_QUANTUM_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "qmab/matcore.hpp"
#include "qmab/rng.hpp"

// Single-qubit states and measurements in Bloch coordinates.
namespace qmab::quantum {

using Bloch = std::array<double, 3>;

constexpr double kUnitTolerance = 1e-10;

double bloch_dot(const Bloch& a, const Bloch& b);
double bloch_norm(const Bloch& a);
Bloch bloch_scaled(const Bloch& a, double s);
Bloch to_bloch(const matcore::Vec& v);
matcore::Vec to_vec(const Bloch& b);

// Possibly mixed state rho = (I + r.sigma)/2 with |r| <= 1.
struct QubitDensity {
    Bloch bloch{0.0, 0.0, 0.0};

    QubitDensity() = default;
    explicit QubitDensity(const Bloch& r);

    static QubitDensity maximally_mixed() { return QubitDensity(); }
};

// Pure state |psi><psi| with unit Bloch vector.
struct PureQubit {
    Bloch bloch{0.0, 0.0, 1.0};

    PureQubit() = default;
    explicit PureQubit(const Bloch& r);

    QubitDensity density() const { return QubitDensity(bloch); }
};

// Rank-1 projector measured by the learner; same invariant as PureQubit.
struct ProjectorAction {
    Bloch bloch{0.0, 0.0, 1.0};

    ProjectorAction() = default;
    explicit ProjectorAction(const Bloch& r);
    explicit ProjectorAction(const PureQubit& s) : bloch(s.bloch) {}

    QubitDensity density() const { return QubitDensity(bloch); }
};

// Effect (w I + m.sigma)/2. A rank-1 projector along unit n is {1, n};
// the identity is {2, 0}.
struct ProjectorTerm {
    double weight = 1.0;
    Bloch axis{0.0, 0.0, 0.0};
};

class DiscreteObservable {
public:
    DiscreteObservable(std::vector<double> eigenvalues, std::vector<ProjectorTerm> projectors);

    // sigma_x, sigma_y or sigma_z (axis 0, 1, 2).
    static DiscreteObservable pauli(std::size_t axis);
    // lambda_plus on the projector along n, lambda_minus on its complement.
    static DiscreteObservable from_direction(const Bloch& n, double lambda_plus, double lambda_minus);

    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    const std::vector<ProjectorTerm>& projectors() const { return projectors_; }
    std::size_t outcomes() const { return eigenvalues_.size(); }

private:
    std::vector<double> eigenvalues_;
    std::vector<ProjectorTerm> projectors_;
};

// Tr(rho Pi) for every eigenprojector; throws ModelError outside [-1e-10, 1 + 1e-10].
std::vector<double> outcome_probabilities(const QubitDensity& state, const DiscreteObservable& obs);
double expectation(const QubitDensity& state, const DiscreteObservable& obs);

int born_sample(const PureQubit& state, const ProjectorAction& action, Rng& rng);
double measure_observable(const QubitDensity& state, const DiscreteObservable& obs, Rng& rng);

double fidelity(const QubitDensity& a, const QubitDensity& b);
double infidelity(const Bloch& a, const Bloch& b);

struct Divergence {
    bool divergent = false;
    double nats = 0.0;
};

Divergence relative_entropy(const QubitDensity& a, const QubitDensity& b);
QubitDensity depolarize(const QubitDensity& state, double alpha);

// Haar-random pure state.
PureQubit random_pure(Rng& rng);

}  // namespace qmab::quantum

#endif
