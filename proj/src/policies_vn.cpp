#include <cmath>
#include <string>

#include "qmab/errors.hpp"
#include "qmab/policies.hpp"

namespace qmab::pol {

namespace {

Vec unit_or(const Vec& v, const Vec& fallback) {
    const double n = matcore::norm(v);
    return n > 0.0 ? matcore::scaled(v, 1.0 / n) : fallback;
}

void require_unit(const Vec& v, const char* what) {
    if (std::abs(matcore::norm(v) - 1.0) > 1e-10) {
        throw ContractError(std::string(what) + ": vector must be unit length");
    }
}

std::vector<Vec> extremal_directions(const Vec& center, const est::DesignMatrix& design) {
    const std::size_t d = design.dim();
    require(d >= 2, "vn_batch: dimension must be at least 2");
    require(center.size() == d, "vn_batch: center dimension does not match the design");
    require_unit(center, "vn_batch");
    const auto& eig = design.eig();
    std::vector<Vec> actions;
    actions.reserve(2 * (d - 1));
    for (std::size_t i = 0; i + 1 < d; ++i) {
        auto [plus, minus] = project_extremal(center, eig.vectors[i], eig.min());
        actions.push_back(std::move(plus));
        actions.push_back(std::move(minus));
    }
    return actions;
}

}  // namespace

std::pair<Vec, Vec> project_extremal(const Vec& c, const Vec& v, double lambda_min) {
    if (!(lambda_min > 1.0)) {
        throw ContractError("project_extremal: lambda_min must exceed 1");
    }
    require(c.size() == v.size(), "project_extremal: dimension mismatch");
    require_unit(c, "project_extremal");
    require_unit(v, "project_extremal");
    const double s = 1.0 / std::sqrt(lambda_min);
    Vec plus = c;
    Vec minus = c;
    matcore::axpy(s, v, plus);
    matcore::axpy(-s, v, minus);
    // |c +- s v| >= 1 - s > 0 because lambda_min > 1.
    return {matcore::normalized(plus), matcore::normalized(minus)};
}

double vn_lambda0_floor(std::size_t d) {
    require(d >= 2, "vn_lambda0_floor: d must be at least 2");
    const double dm1 = static_cast<double>(d - 1);
    const double c = 1.0 / (12.0 * std::sqrt(dm1));
    const double bound = std::sqrt(2.0 / (3.0 * dm1)) * 2.0 * static_cast<double>(d) * c + 2.0 / (3.0 * dm1);
    return std::max(2.0, bound);
}

double vvn_lambda0_floor(std::size_t d, double beta_w) {
    require(d >= 2, "vvn_lambda0_floor: d must be at least 2");
    require(beta_w > 0.0, "vvn_lambda0_floor: beta_w must be positive");
    const double dm1 = static_cast<double>(d - 1);
    const double bound = 2.0 * std::sqrt(2.0 / (3.0 * dm1)) * static_cast<double>(d) /
                             (12.0 * std::sqrt(dm1) * beta_w) +
                         2.0 / (3.0 * dm1);
    return std::max(2.0, bound);
}

BatchActions vn_batch(const Vec& center, const est::DesignMatrix& design) {
    return BatchActions{extremal_directions(center, design), 1};
}

BatchActions vvn_batch(const Vec& center, const est::DesignMatrix& design, std::size_t k) {
    require(k >= 1, "vvn_batch: k must be at least 1");
    return BatchActions{extremal_directions(center, design), k};
}

std::size_t vvn_theoretical_k(std::size_t batch_budget) {
    require(batch_budget >= 2, "vvn_theoretical_k: batch budget must be at least 2");
    const double t = static_cast<double>(batch_budget);
    return static_cast<std::size_t>(std::ceil(24.0 * std::log(t * t)));
}

// ---------------------------------------------------------------------------

LinUCBCircle::LinUCBCircle(CircleConfig cfg, Rng& init_rng)
    : cfg_(cfg), acc_(2, cfg.lambda0), fallback_center_(env::random_unit_vector(2, init_rng)) {
    require(cfg.lambda0 > 1.0, "LinUCBCircle: lambda0 must exceed 1");
    require(cfg.delta > 0.0 && cfg.delta < 1.0, "LinUCBCircle: delta must lie in (0, 1)");
}

Vec LinUCBCircle::next_action(Rng&) {
    if (cursor_ == 0 && pending_.empty()) {
        const Vec center = estimate();
        const auto& eig = acc_.design().eig();
        auto [plus, minus] = project_extremal(center, eig.vectors[0], eig.min());
        pending_ = {plus, minus};
    }
    return pending_[cursor_];
}

void LinUCBCircle::observe(const Vec& action, double reward) {
    require(!pending_.empty(), "LinUCBCircle::observe: no action pending");
    (void)action;
    rewards_.push_back(reward);
    if (++cursor_ == pending_.size()) {
        for (std::size_t i = 0; i < pending_.size(); ++i) {
            acc_.update(pending_[i], rewards_[i], 1.0);
        }
        pending_.clear();
        rewards_.clear();
        cursor_ = 0;
        ++batches_;
    }
}

Vec LinUCBCircle::estimate() const {
    return unit_or(acc_.estimate(), fallback_center_);
}

Telemetry LinUCBCircle::telemetry() const {
    return Telemetry{acc_.design().lambda_min(), acc_.design().lambda_max(), batches_};
}

std::optional<bool> LinUCBCircle::covers(const Vec& theta) const {
    const double beta = est::beta_weighted(acc_.design(), cfg_.delta, cfg_.lambda0, acc_.design().log_det_initial());
    return est::contains(est::ConfidenceEllipsoid{acc_.estimate(), acc_.design().matrix(), beta}, theta);
}

// ---------------------------------------------------------------------------

LinUCBVN::LinUCBVN(std::size_t dim, VNConfig cfg, Rng& init_rng)
    : dim_(dim), cfg_(cfg), design_(dim, cfg.lambda0), moment_(dim, 0.0),
      fallback_center_(env::random_unit_vector(dim, init_rng)) {
    require(dim >= 2, "LinUCBVN: dimension must be at least 2");
    require(cfg.delta_prime > 0.0 && cfg.delta_prime < 1.0, "LinUCBVN: delta' must lie in (0, 1)");
    require(cfg.batch_budget >= 1, "LinUCBVN: batch budget must be positive");
    if (cfg.lambda0 < vn_lambda0_floor(dim)) {
        throw ContractError("LinUCBVN: lambda0 = " + std::to_string(cfg.lambda0) + " is below the admissible floor " +
                            std::to_string(vn_lambda0_floor(dim)));
    }
    if (cfg.weight_beta_override) {
        require(*cfg.weight_beta_override > 0.0, "LinUCBVN: weight beta override must be positive");
    }
}

double LinUCBVN::beta() const {
    const double delta = cfg_.delta_prime / static_cast<double>(cfg_.batch_budget);
    return est::beta_weighted(design_, delta, cfg_.lambda0, design_.log_det_initial());
}

Vec LinUCBVN::theta_hat() const {
    return design_.solve(moment_);
}

void LinUCBVN::start_batch() {
    batch_ = vn_batch(estimate(), design_);
    if (batches_ == 0) {
        weight_.current_weight = 1.0;
    } else {
        const double b = cfg_.weight_beta_override.value_or(beta());
        weight_.current_weight = est::vanishing_noise_weight(design_.lambda_max(), dim_, b);
    }
}

Vec LinUCBVN::next_action(Rng&) {
    if (cursor_ == 0 && rewards_.empty()) {
        start_batch();
    }
    return batch_.actions[cursor_];
}

void LinUCBVN::observe(const Vec& action, double reward) {
    (void)action;
    rewards_.push_back(reward);
    if (++cursor_ == batch_.actions.size()) {
        const double w = weight_.current_weight;
        for (std::size_t i = 0; i < batch_.actions.size(); ++i) {
            matcore::axpy(w * rewards_[i], batch_.actions[i], moment_);
        }
        design_.add_batch(batch_.actions, w);
        rewards_.clear();
        cursor_ = 0;
        ++batches_;
    }
}

Vec LinUCBVN::estimate() const {
    return unit_or(theta_hat(), fallback_center_);
}

Telemetry LinUCBVN::telemetry() const {
    return Telemetry{design_.lambda_min(), design_.lambda_max(), batches_};
}

std::optional<bool> LinUCBVN::covers(const Vec& theta) const {
    return est::contains(est::ConfidenceEllipsoid{theta_hat(), design_.matrix(), beta()}, theta);
}

// ---------------------------------------------------------------------------

LinUCBVVN::LinUCBVVN(std::size_t dim, VVNConfig cfg, Rng& init_rng)
    : dim_(dim), cfg_(cfg), beta_w_(est::beta_mom(dim, cfg.lambda0, cfg.theta_norm)),
      bank_(dim, cfg.lambda0, cfg.k), mom_cache_(dim, 0.0), fallback_center_(env::random_unit_vector(dim, init_rng)) {
    require(dim >= 2, "LinUCBVVN: dimension must be at least 2");
    require(cfg.k >= 1, "LinUCBVVN: k must be at least 1");
    if (cfg.lambda0 < vvn_lambda0_floor(dim, beta_w_)) {
        throw ContractError("LinUCBVVN: lambda0 = " + std::to_string(cfg.lambda0) +
                            " is below the admissible floor " + std::to_string(vvn_lambda0_floor(dim, beta_w_)));
    }
    if (cfg.weight_beta_override) {
        require(*cfg.weight_beta_override > 0.0, "LinUCBVVN: weight beta override must be positive");
    }
}

void LinUCBVVN::start_batch() {
    batch_ = vvn_batch(estimate(), bank_.design(), cfg_.k);
    if (batches_ == 0) {
        weight_.current_weight = 1.0;
    } else {
        const double b = cfg_.weight_beta_override.value_or(beta_w_);
        weight_.current_weight = est::vanishing_noise_weight(bank_.design().lambda_max(), dim_, b);
    }
    rewards_.assign(batch_.actions.size(), {});
}

Vec LinUCBVVN::next_action(Rng&) {
    if (cursor_ == 0) {
        start_batch();
    }
    return batch_.actions[cursor_ / batch_.repeats];
}

void LinUCBVVN::observe(const Vec& action, double reward) {
    (void)action;
    rewards_[cursor_ / batch_.repeats].push_back(reward);
    if (++cursor_ == batch_.actions.size() * batch_.repeats) {
        bank_.update_batch(batch_.actions, rewards_, weight_.current_weight);
        mom_cache_ = est::mom_select(bank_);
        cursor_ = 0;
        ++batches_;
    }
}

Vec LinUCBVVN::estimate() const {
    return unit_or(mom_estimate(), fallback_center_);
}

Telemetry LinUCBVVN::telemetry() const {
    return Telemetry{bank_.design().lambda_min(), bank_.design().lambda_max(), batches_};
}

std::optional<bool> LinUCBVVN::covers(const Vec& theta) const {
    return est::contains(est::ConfidenceEllipsoid{mom_estimate(), bank_.design().matrix(), beta_w_}, theta);
}

}  // namespace qmab::pol
