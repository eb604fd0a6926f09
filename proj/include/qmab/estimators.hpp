#ifndef QMAB_ESTIMATORS_HPP
#define QMAB_ESTIMATORS_HPP

#include <cstddef>
#include <vector>

#include "qmab/matcore.hpp"

namespace qmab::est {

using matcore::EigenDecomposition;
using matcore::SymMatrix;
using matcore::Vec;

// V = lambda0 I + sum_s w_s a_s a_s^T with an eigendecomposition kept in sync.
class DesignMatrix {
public:
    DesignMatrix() = default;
    DesignMatrix(std::size_t dim, double lambda0);

    void add(const Vec& a, double weight);
    // Adds every action with the same weight and refreshes the decomposition once.
    void add_batch(const std::vector<Vec>& actions, double weight);
    // New coordinate enters with the regularizer on the diagonal and no cross terms.
    void append_dimension();

    std::size_t dim() const { return v_.dim(); }
    double lambda0() const { return lambda0_; }
    const SymMatrix& matrix() const { return v_; }
    const EigenDecomposition& eig() const { return eig_; }
    double lambda_min() const { return eig_.min(); }
    double lambda_max() const { return eig_.max(); }
    double log_det() const { return eig_.log_det(); }
    double log_det_initial() const { return log_det_initial_; }

    Vec solve(const Vec& b) const;
    // ||x||_{V^{-1}}
    double inverse_norm(const Vec& x) const;

private:
    void refresh();

    double lambda0_ = 1.0;
    SymMatrix v_;
    EigenDecomposition eig_;
    double log_det_initial_ = 0.0;
};

class LSEAccumulator {
public:
    LSEAccumulator() = default;
    LSEAccumulator(std::size_t dim, double lambda0);

    void update(const Vec& a, double x, double weight);
    Vec estimate() const;
    void append_dimension();

    const DesignMatrix& design() const { return design_; }
    const Vec& moment() const { return moment_; }

private:
    DesignMatrix design_;
    Vec moment_;
};

LSEAccumulator lse_update(LSEAccumulator acc, const Vec& a, double x, double weight);
Vec lse_estimate(const LSEAccumulator& acc);

// beta_{t,delta} of the unweighted confidence set.
double beta_linucb(double t, double delta, double lambda, double L, double eta, std::size_t d);
// beta_{t,delta} of the weighted confidence set; log_det_v0 = ln det V_0.
double beta_weighted(const DesignMatrix& design, double delta, double lambda, double log_det_v0);
// beta_w = 9 (sqrt(9 d) + lambda ||theta||)^2
double beta_mom(std::size_t d, double lambda, double theta_norm);

// k weighted least-squares estimators sharing one design matrix.
class MoMBank {
public:
    MoMBank(std::size_t dim, double lambda0, std::size_t k);

    // rewards[i][j] is the j-th repeat of actions[i]; it feeds accumulator j.
    void update_batch(const std::vector<Vec>& actions, const std::vector<std::vector<double>>& rewards,
                      double weight);

    std::size_t k() const { return moments_.size(); }
    const DesignMatrix& design() const { return design_; }
    std::vector<Vec> estimates() const;

private:
    DesignMatrix design_;
    std::vector<Vec> moments_;
};

// argmin_j median_{i != j} ||theta_j - theta_i||_V with the lower median and lowest-index ties.
std::size_t mom_select_index(const std::vector<Vec>& estimates, const SymMatrix& v);
Vec mom_select(const MoMBank& bank);

struct ConfidenceEllipsoid {
    Vec center;
    SymMatrix metric;
    double radius_sq = 1.0;
};

bool contains(const ConfidenceEllipsoid& ell, const Vec& x);

// Holds 1/sigma_hat^2 for the current batch.
struct VarianceEstimator {
    double current_weight = 1.0;
};

// omega(V) = sqrt(lambda_max) / (12 sqrt(d - 1) beta)
double vanishing_noise_weight(double lambda_max, std::size_t d, double beta);

struct EllipticalPotential {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds() const { return lhs <= rhs; }
};

// sum_t min{1, ||a_t||^2_{V_{t-1}^{-1}}} against 2 d ln((tr V0 + T L^2) / (d det(V0)^{1/d})).
EllipticalPotential elliptical_potential(const std::vector<Vec>& actions, const SymMatrix& v0, double L);

}  // namespace qmab::est

#endif
