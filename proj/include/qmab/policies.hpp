#ifndef QMAB_POLICIES_HPP
#define QMAB_POLICIES_HPP

#include <array>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmab/environments.hpp"
#include "qmab/estimators.hpp"
#include "qmab/matcore.hpp"
#include "qmab/rng.hpp"

namespace qmab::pol {

using matcore::Vec;

// ---------------------------------------------------------------------------
// Finite-arm rules

// Returned for arms that were never played, so they win every argmax.
constexpr double kUnplayedIndex = std::numeric_limits<double>::infinity();

double ucb_index(double mean, std::size_t count, double eta, double delta);

class UCB {
public:
    UCB(std::size_t arms, double eta, double delta);

    std::size_t select() const;
    void observe(std::size_t arm, double reward);

    const std::vector<std::size_t>& counts() const { return counts_; }
    std::vector<double> means() const;

private:
    double eta_;
    double delta_;
    std::vector<std::size_t> counts_;
    std::vector<double> sums_;
};

// argmax_a <theta_hat, a> + sqrt(beta) ||a||_{V^{-1}}, lowest index on ties.
std::size_t linucb_select(const est::LSEAccumulator& acc, const std::vector<Vec>& actions, double beta);

// Point of the unit sphere maximizing <theta', a> jointly over a and theta' in
// {theta' : ||theta' - center||^2_V <= beta}.
Vec optimistic_sphere_point(const Vec& center, const est::DesignMatrix& design, double beta);
Vec linucb_select_sphere(const est::LSEAccumulator& acc, double beta);

// G-optimal design over `features` by Frank-Wolfe ascent on ln det.
struct Design {
    std::vector<double> weights;  // one per feature, sums to 1
    bool fallback = false;        // uniform weights were used instead
};

Design g_optimal_design(const std::vector<Vec>& features, int max_iterations = 200, double tolerance = 1e-6);

// Indices (into estimated_means) that survive: max_b mean_b - mean_a <= 2 eps.
std::vector<std::size_t> phased_elim_round(const std::vector<double>& estimated_means, double eps);

class PhasedElimination {
public:
    PhasedElimination(std::vector<Vec> features, double delta);

    std::size_t select();
    void observe(std::size_t arm, double reward);

    std::size_t phase() const { return phase_; }
    double epsilon() const;
    const std::vector<std::size_t>& surviving() const { return surviving_; }
    std::size_t design_fallbacks() const { return fallbacks_; }
    const Vec& theta_hat() const { return theta_hat_; }

private:
    void start_phase();
    void finish_phase();

    std::vector<Vec> features_;
    double delta_;
    std::size_t phase_ = 0;
    std::vector<std::size_t> surviving_;
    std::vector<std::pair<std::size_t, std::size_t>> schedule_;  // (arm, pulls)
    std::size_t cursor_ = 0;
    std::size_t pulled_in_slot_ = 0;
    matcore::SymMatrix gram_;
    Vec moment_;
    Vec theta_hat_;
    std::size_t fallbacks_ = 0;
};

// ---------------------------------------------------------------------------
// Sphere rules. Rewards passed to observe() are linear: E[X] = <theta, a>.

struct Telemetry {
    double lambda_min = std::numeric_limits<double>::quiet_NaN();
    double lambda_max = std::numeric_limits<double>::quiet_NaN();
    std::size_t batches = 0;
};

class SpherePolicy {
public:
    virtual ~SpherePolicy() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual Vec next_action(Rng& rng) = 0;
    virtual void observe(const Vec& action, double reward) = 0;
    // Current unit-norm estimate of theta.
    virtual Vec estimate() const = 0;
    virtual Telemetry telemetry() const { return {}; }
    // Whether theta lies in the policy's current confidence set, if it keeps one.
    virtual std::optional<bool> covers(const Vec& /*theta*/) const { return std::nullopt; }
};

class FixedPolicy : public SpherePolicy {
public:
    explicit FixedPolicy(Vec action);

    std::string name() const override { return "fixed"; }
    std::size_t dim() const override { return action_.size(); }
    Vec next_action(Rng&) override { return action_; }
    void observe(const Vec&, double) override {}
    Vec estimate() const override { return action_; }

private:
    Vec action_;
};

struct LinUCBConfig {
    double lambda = 1.0;
    double delta = 0.1;
    double L = 1.0;
    double eta = 1.0;
};

class LinUCBSphere : public SpherePolicy {
public:
    LinUCBSphere(std::size_t dim, LinUCBConfig cfg);

    std::string name() const override { return "linucb"; }
    std::size_t dim() const override { return acc_.moment().size(); }
    Vec next_action(Rng& rng) override;
    void observe(const Vec& action, double reward) override;
    Vec estimate() const override;
    Telemetry telemetry() const override;
    std::optional<bool> covers(const Vec& theta) const override;

    double beta() const;
    const est::LSEAccumulator& accumulator() const { return acc_; }

private:
    LinUCBConfig cfg_;
    est::LSEAccumulator acc_;
    std::size_t rounds_ = 0;
};

struct BatchActions {
    std::vector<Vec> actions;  // the 2(d-1) directions
    std::size_t repeats = 1;   // rewards requested per direction
};

// a+- = normalize(c +- v / sqrt(lambda_min)); requires lambda_min > 1.
std::pair<Vec, Vec> project_extremal(const Vec& c, const Vec& v, double lambda_min);

// Smallest admissible regularizer for the eigenvalue-control rule.
double vn_lambda0_floor(std::size_t d);
double vvn_lambda0_floor(std::size_t d, double beta_w);

// Directions c +- v_i / sqrt(lambda_min(V)) for the d-1 smallest eigenvectors v_i of V.
BatchActions vn_batch(const Vec& center, const est::DesignMatrix& design);
BatchActions vvn_batch(const Vec& center, const est::DesignMatrix& design, std::size_t k);

struct CircleConfig {
    double lambda0 = 5.0;
    double delta = 0.1;
};

// Unweighted eigenvalue-control rule on the circle using only v_min.
class LinUCBCircle : public SpherePolicy {
public:
    LinUCBCircle(CircleConfig cfg, Rng& init_rng);

    std::string name() const override { return "linucb_circle"; }
    std::size_t dim() const override { return 2; }
    Vec next_action(Rng& rng) override;
    void observe(const Vec& action, double reward) override;
    Vec estimate() const override;
    Telemetry telemetry() const override;
    std::optional<bool> covers(const Vec& theta) const override;

private:
    CircleConfig cfg_;
    est::LSEAccumulator acc_;
    Vec fallback_center_;
    std::vector<Vec> pending_;
    std::vector<double> rewards_;
    std::size_t cursor_ = 0;
    std::size_t batches_ = 0;
};

struct VNConfig {
    double lambda0 = 2.0;
    double delta_prime = 0.1;
    std::size_t batch_budget = 1;  // T tilde, used for delta = delta' / T tilde
    // Replaces beta inside the weight omega(V) only; the confidence set is unchanged.
    std::optional<double> weight_beta_override;
};

class LinUCBVN : public SpherePolicy {
public:
    LinUCBVN(std::size_t dim, VNConfig cfg, Rng& init_rng);

    std::string name() const override { return "vn"; }
    std::size_t dim() const override { return dim_; }
    Vec next_action(Rng& rng) override;
    void observe(const Vec& action, double reward) override;
    Vec estimate() const override;
    Telemetry telemetry() const override;
    std::optional<bool> covers(const Vec& theta) const override;

    double beta() const;
    double current_weight() const { return weight_.current_weight; }
    const est::DesignMatrix& design() const { return design_; }
    Vec theta_hat() const;

private:
    void start_batch();

    std::size_t dim_;
    VNConfig cfg_;
    est::DesignMatrix design_;
    Vec moment_;
    Vec fallback_center_;
    est::VarianceEstimator weight_;
    BatchActions batch_;
    std::vector<double> rewards_;
    std::size_t cursor_ = 0;
    std::size_t batches_ = 0;
};

struct VVNConfig {
    double lambda0 = 2.0;
    std::size_t k = 10;
    double theta_norm = 1.0;
    std::optional<double> weight_beta_override;
};

// Subsample count k = ceil(24 ln(T_tilde^2)).
std::size_t vvn_theoretical_k(std::size_t batch_budget);

class LinUCBVVN : public SpherePolicy {
public:
    LinUCBVVN(std::size_t dim, VVNConfig cfg, Rng& init_rng);

    std::string name() const override { return "vvn"; }
    std::size_t dim() const override { return dim_; }
    Vec next_action(Rng& rng) override;
    void observe(const Vec& action, double reward) override;
    Vec estimate() const override;
    Telemetry telemetry() const override;
    std::optional<bool> covers(const Vec& theta) const override;

    double beta_w() const { return beta_w_; }
    double current_weight() const { return weight_.current_weight; }
    const est::MoMBank& bank() const { return bank_; }
    const Vec& mom_estimate() const { return mom_cache_; }

private:
    void start_batch();

    std::size_t dim_;
    VVNConfig cfg_;
    double beta_w_;
    est::MoMBank bank_;
    Vec mom_cache_;
    Vec fallback_center_;
    est::VarianceEstimator weight_;
    BatchActions batch_;
    std::vector<std::vector<double>> rewards_;
    std::size_t cursor_ = 0;
    std::size_t batches_ = 0;
};

// Explore ceil(sqrt(T)) rounds over the x, y, z Pauli projectors in turn, then
// commit to the normalized least-squares Bloch estimate.
class BanditPLS : public SpherePolicy {
public:
    explicit BanditPLS(std::size_t horizon);

    std::string name() const override { return "bandit_pls"; }
    std::size_t dim() const override { return 3; }
    Vec next_action(Rng& rng) override;
    void observe(const Vec& action, double reward) override;
    Vec estimate() const override;

    std::size_t exploration_budget() const { return budget_; }
    bool committed() const { return committed_.has_value(); }
    Vec bloch_estimate() const;

private:
    std::size_t budget_;
    std::size_t explored_ = 0;
    std::array<double, 3> sums_{0.0, 0.0, 0.0};
    std::array<std::size_t, 3> counts_{0, 0, 0};
    std::optional<Vec> committed_;
};

// Phased elimination over a fixed grid of unit vectors.
class GridPhasedElimination : public SpherePolicy {
public:
    GridPhasedElimination(std::vector<Vec> grid, double delta);

    std::string name() const override { return "phased_elim"; }
    std::size_t dim() const override { return grid_.front().size(); }
    Vec next_action(Rng& rng) override;
    void observe(const Vec& action, double reward) override;
    Vec estimate() const override;

    const PhasedElimination& inner() const { return pe_; }

private:
    std::vector<Vec> grid_;
    PhasedElimination pe_;
    std::size_t last_ = 0;
};

// n nearly uniform points on S^2.
std::vector<Vec> fibonacci_sphere(std::size_t n);

}  // namespace qmab::pol

#endif
