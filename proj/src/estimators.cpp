#include "qmab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmab/errors.hpp"

namespace qmab::est {

namespace {

void require_delta(double delta, const char* what) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ContractError(std::string(what) + ": delta must lie in (0, 1)");
    }
}

void require_weight(double w, const char* what) {
    if (!std::isfinite(w) || w <= 0.0) {
        throw ContractError(std::string(what) + ": weight must be finite and positive");
    }
}

}  // namespace

DesignMatrix::DesignMatrix(std::size_t dim, double lambda0)
    : lambda0_(lambda0), v_(SymMatrix::identity(dim, lambda0)) {
    require(dim >= 1, "DesignMatrix: dimension must be positive");
    require(std::isfinite(lambda0) && lambda0 > 0.0, "DesignMatrix: lambda0 must be finite and positive");
    log_det_initial_ = static_cast<double>(dim) * std::log(lambda0);
    refresh();
}

void DesignMatrix::refresh() {
    eig_ = matcore::eig_sym(v_);
}

void DesignMatrix::add(const Vec& a, double weight) {
    require(std::isfinite(weight) && weight >= 0.0, "DesignMatrix::add: weight must be finite and nonnegative");
    v_ = matcore::rank1_update(v_, a, weight);
    refresh();
}

void DesignMatrix::add_batch(const std::vector<Vec>& actions, double weight) {
    require(std::isfinite(weight) && weight >= 0.0, "DesignMatrix::add_batch: weight must be finite and nonnegative");
    for (const auto& a : actions) {
        v_ = matcore::rank1_update(v_, a, weight);
    }
    refresh();
}

void DesignMatrix::append_dimension() {
    v_.append_dimension(lambda0_);
    log_det_initial_ += std::log(lambda0_);
    refresh();
}

Vec DesignMatrix::solve(const Vec& b) const {
    return matcore::solve_eig(eig_, b);
}

double DesignMatrix::inverse_norm(const Vec& x) const {
    return std::sqrt(std::max(0.0, matcore::dot(x, solve(x))));
}

LSEAccumulator::LSEAccumulator(std::size_t dim, double lambda0) : design_(dim, lambda0), moment_(dim, 0.0) {}

void LSEAccumulator::update(const Vec& a, double x, double weight) {
    require_weight(weight, "lse_update");
    require(a.size() == moment_.size(), "lse_update: dimension mismatch");
    require(std::isfinite(x), "lse_update: reward must be finite");
    design_.add(a, weight);
    matcore::axpy(weight * x, a, moment_);
}

Vec LSEAccumulator::estimate() const {
    return design_.solve(moment_);
}

void LSEAccumulator::append_dimension() {
    design_.append_dimension();
    moment_.push_back(0.0);
}

LSEAccumulator lse_update(LSEAccumulator acc, const Vec& a, double x, double weight) {
    acc.update(a, x, weight);
    return acc;
}

Vec lse_estimate(const LSEAccumulator& acc) {
    return acc.estimate();
}

double beta_linucb(double t, double delta, double lambda, double L, double eta, std::size_t d) {
    require_delta(delta, "beta_linucb");
    require(t >= 0.0 && lambda > 0.0 && d >= 1, "beta_linucb: need t >= 0, lambda > 0, d >= 1");
    const double dd = static_cast<double>(d);
    const double log_term = dd * std::log((dd * lambda + t * L * L) / (dd * lambda));
    const double root = eta * std::sqrt(2.0 * std::log(1.0 / delta) + log_term) + eta * std::sqrt(lambda);
    return root * root;
}

double beta_weighted(const DesignMatrix& design, double delta, double lambda, double log_det_v0) {
    require_delta(delta, "beta_weighted");
    const double log_ratio = design.log_det() - log_det_v0;
    if (log_ratio < std::log1p(-1e-9)) {
        throw ContractError("beta_weighted: det V_t / det V_0 is below 1");
    }
    const double root = std::sqrt(2.0 * std::log(1.0 / delta) + std::max(0.0, log_ratio)) + std::sqrt(lambda);
    return root * root;
}

double beta_mom(std::size_t d, double lambda, double theta_norm) {
    require(d >= 1, "beta_mom: d must be positive");
    const double root = std::sqrt(9.0 * static_cast<double>(d)) + lambda * theta_norm;
    return 9.0 * root * root;
}

MoMBank::MoMBank(std::size_t dim, double lambda0, std::size_t k)
    : design_(dim, lambda0), moments_(k, Vec(dim, 0.0)) {
    require(k >= 1, "MoMBank: k must be at least 1");
}

void MoMBank::update_batch(const std::vector<Vec>& actions, const std::vector<std::vector<double>>& rewards,
                           double weight) {
    require_weight(weight, "MoMBank::update_batch");
    require(actions.size() == rewards.size(), "MoMBank::update_batch: one reward row per action");
    for (std::size_t i = 0; i < actions.size(); ++i) {
        require(rewards[i].size() == moments_.size(), "MoMBank::update_batch: one reward per accumulator");
        for (std::size_t j = 0; j < moments_.size(); ++j) {
            matcore::axpy(weight * rewards[i][j], actions[i], moments_[j]);
        }
    }
    design_.add_batch(actions, weight);
}

std::vector<Vec> MoMBank::estimates() const {
    std::vector<Vec> out;
    out.reserve(moments_.size());
    for (const auto& m : moments_) {
        out.push_back(design_.solve(m));
    }
    return out;
}

std::size_t mom_select_index(const std::vector<Vec>& estimates, const SymMatrix& v) {
    require(!estimates.empty(), "mom_select: no estimates");
    const std::size_t k = estimates.size();
    if (k <= 2) {
        return 0;
    }
    std::size_t best = 0;
    double best_median = 0.0;
    std::vector<double> dist;
    dist.reserve(k - 1);
    for (std::size_t j = 0; j < k; ++j) {
        dist.clear();
        for (std::size_t i = 0; i < k; ++i) {
            if (i != j) {
                dist.push_back(matcore::weighted_norm(matcore::sub(estimates[j], estimates[i]), v));
            }
        }
        const std::size_t mid = (dist.size() - 1) / 2;
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
        const double median = dist[mid];
        if (j == 0 || median < best_median) {
            best = j;
            best_median = median;
        }
    }
    return best;
}

Vec mom_select(const MoMBank& bank) {
    const auto est = bank.estimates();
    return est[mom_select_index(est, bank.design().matrix())];
}

bool contains(const ConfidenceEllipsoid& ell, const Vec& x) {
    const Vec diff = matcore::sub(x, ell.center);
    return ell.metric.quad(diff) <= ell.radius_sq;
}

double vanishing_noise_weight(double lambda_max, std::size_t d, double beta) {
    require(d >= 2, "vanishing_noise_weight: d must be at least 2");
    require(beta > 0.0 && lambda_max > 0.0, "vanishing_noise_weight: beta and lambda_max must be positive");
    return std::sqrt(lambda_max) / (12.0 * std::sqrt(static_cast<double>(d - 1)) * beta);
}

EllipticalPotential elliptical_potential(const std::vector<Vec>& actions, const SymMatrix& v0, double L) {
    const std::size_t d = v0.dim();
    const auto e0 = matcore::eig_sym(v0);
    require(e0.min() > matcore::kSingularThreshold, "elliptical_potential: V0 must be positive definite");
    SymMatrix v = v0;
    matcore::EigenDecomposition eig = e0;
    EllipticalPotential out;
    for (const auto& a : actions) {
        require(matcore::norm(a) <= L * (1.0 + 1e-12), "elliptical_potential: action norm exceeds L");
        const double q = matcore::dot(a, matcore::solve_eig(eig, a));
        out.lhs += std::min(1.0, q);
        v = matcore::rank1_update(v, a, 1.0);
        eig = matcore::eig_sym(v);
    }
    const double dd = static_cast<double>(d);
    const double t = static_cast<double>(actions.size());
    const double det_root = std::exp(e0.log_det() / dd);
    out.rhs = 2.0 * dd * std::log((v0.trace() + t * L * L) / (dd * det_root));
    return out;
}

}  // namespace qmab::est
