#include <algorithm>
#include <cmath>

#include "qmab/errors.hpp"
#include "qmab/policies.hpp"

namespace qmab::pol {

namespace {

constexpr double kPinvRelative = 1e-10;

Vec unit_or_fallback(const Vec& v, const Vec& fallback) {
    const double n = matcore::norm(v);
    return n > 0.0 ? matcore::scaled(v, 1.0 / n) : fallback;
}

matcore::SymMatrix weighted_gram(const std::vector<Vec>& features, const std::vector<double>& w) {
    matcore::SymMatrix m(features.front().size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (w[i] > 0.0) {
            m = matcore::rank1_update(m, features[i], w[i]);
        }
    }
    return m;
}

// Pseudo-inverse applied through the eigendecomposition; returns the numerical rank too.
struct Pinv {
    matcore::EigenDecomposition eig;
    double cutoff = 0.0;

    explicit Pinv(const matcore::SymMatrix& m) : eig(matcore::eig_sym(m)) {
        cutoff = kPinvRelative * std::max(std::abs(eig.max()), 1e-300);
    }

    std::size_t rank() const {
        return static_cast<std::size_t>(
            std::count_if(eig.values.begin(), eig.values.end(), [&](double v) { return v > cutoff; }));
    }

    Vec apply(const Vec& b) const {
        Vec x(b.size(), 0.0);
        for (std::size_t k = 0; k < eig.dim(); ++k) {
            if (eig.values[k] > cutoff) {
                matcore::axpy(matcore::dot(eig.vectors[k], b) / eig.values[k], eig.vectors[k], x);
            }
        }
        return x;
    }
};

}  // namespace

double ucb_index(double mean, std::size_t count, double eta, double delta) {
    if (count == 0) {
        return kUnplayedIndex;
    }
    return mean + std::sqrt(2.0 * eta * eta * std::log(1.0 / delta) / static_cast<double>(count));
}

UCB::UCB(std::size_t arms, double eta, double delta)
    : eta_(eta), delta_(delta), counts_(arms, 0), sums_(arms, 0.0) {
    require(arms >= 1, "UCB: at least one arm required");
    require(delta > 0.0 && delta <= 1.0, "UCB: delta must lie in (0, 1]");
}

std::size_t UCB::select() const {
    std::size_t best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < counts_.size(); ++a) {
        const double mean = counts_[a] ? sums_[a] / static_cast<double>(counts_[a]) : 0.0;
        const double index = ucb_index(mean, counts_[a], eta_, delta_);
        if (index > best_index) {
            best = a;
            best_index = index;
        }
    }
    return best;
}

void UCB::observe(std::size_t arm, double reward) {
    require(arm < counts_.size(), "UCB::observe: arm index out of range");
    ++counts_[arm];
    sums_[arm] += reward;
}

std::vector<double> UCB::means() const {
    std::vector<double> m(counts_.size(), 0.0);
    for (std::size_t a = 0; a < counts_.size(); ++a) {
        if (counts_[a]) {
            m[a] = sums_[a] / static_cast<double>(counts_[a]);
        }
    }
    return m;
}

std::size_t linucb_select(const est::LSEAccumulator& acc, const std::vector<Vec>& actions, double beta) {
    require(!actions.empty(), "linucb_select: empty action set");
    require(beta >= 0.0, "linucb_select: beta must be nonnegative");
    const Vec theta = acc.estimate();
    const double root = std::sqrt(beta);
    std::size_t best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const double index = matcore::dot(theta, actions[i]) + root * acc.design().inverse_norm(actions[i]);
        if (index > best_index) {
            best = i;
            best_index = index;
        }
    }
    return best;
}

// In the eigenbasis of V the ellipsoid is theta_hat_i + sqrt(e_i) u_i with e_i = beta / lambda_i
// and |u| <= 1. Maximizing |theta'| gives u_i = g_i / (mu - e_i), g_i = sqrt(e_i) theta_hat_i,
// where mu > max e_i solves sum_i g_i^2 / (mu - e_i)^2 = 1.
Vec optimistic_sphere_point(const Vec& center, const est::DesignMatrix& design, double beta) {
    require(beta >= 0.0, "optimistic_sphere_point: beta must be nonnegative");
    const auto& eig = design.eig();
    const std::size_t d = eig.dim();
    require(center.size() == d, "optimistic_sphere_point: dimension mismatch");

    Vec c(d), e(d), g(d);
    for (std::size_t i = 0; i < d; ++i) {
        c[i] = matcore::dot(eig.vectors[i], center);
        e[i] = beta / eig.values[i];
        g[i] = std::sqrt(e[i]) * c[i];
    }
    const double e_max = *std::max_element(e.begin(), e.end());
    const double g_norm = matcore::norm(g);

    Vec u(d, 0.0);
    if (beta > 0.0) {
        auto secular = [&](double mu) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double q = g[i] / (mu - e[i]);
                s += q * q;
            }
            return s;
        };
        // Components of the top eigenspace with negligible g make the secular
        // function stay below 1 as mu approaches e_max: then mu = e_max.
        double slack = 0.0;
        bool hard = true;
        for (std::size_t i = 0; i < d; ++i) {
            if (e[i] >= e_max * (1.0 - 1e-12)) {
                hard = hard && std::abs(g[i]) <= 1e-14 * (1.0 + g_norm);
            } else {
                const double q = g[i] / (e_max - e[i]);
                slack += q * q;
            }
        }
        if (hard && slack < 1.0) {
            std::size_t top = 0;
            for (std::size_t i = 0; i < d; ++i) {
                if (e[i] >= e_max * (1.0 - 1e-12)) {
                    top = i;
                    break;
                }
            }
            for (std::size_t i = 0; i < d; ++i) {
                if (e[i] < e_max * (1.0 - 1e-12)) {
                    u[i] = g[i] / (e_max - e[i]);
                }
            }
            u[top] = std::sqrt(std::max(0.0, 1.0 - slack));
        } else {
            double lo = e_max;
            double hi = e_max + g_norm;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (secular(mid) > 1.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            for (std::size_t i = 0; i < d; ++i) {
                u[i] = g[i] / (hi - e[i]);
            }
        }
    }

    Vec theta_prime(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        matcore::axpy(c[i] + std::sqrt(e[i]) * u[i], eig.vectors[i], theta_prime);
    }
    return unit_or_fallback(theta_prime, matcore::unit_vector(d, d - 1));
}

Vec linucb_select_sphere(const est::LSEAccumulator& acc, double beta) {
    return optimistic_sphere_point(acc.estimate(), acc.design(), beta);
}

Design g_optimal_design(const std::vector<Vec>& features, int max_iterations, double tolerance) {
    require(!features.empty(), "g_optimal_design: no features");
    const std::size_t n = features.size();
    Design out;
    out.weights.assign(n, 1.0 / static_cast<double>(n));
    if (n == 1) {
        return out;
    }
    std::vector<double>& w = out.weights;
    for (int it = 0; it < max_iterations; ++it) {
        const Pinv pinv(weighted_gram(features, w));
        const double r = static_cast<double>(pinv.rank());
        if (r == 0.0) {
            break;
        }
        std::size_t best = 0;
        double g_best = -1.0;
        for (std::size_t a = 0; a < n; ++a) {
            const double g = matcore::dot(features[a], pinv.apply(features[a]));
            if (g > g_best) {
                g_best = g;
                best = a;
            }
        }
        if (!std::isfinite(g_best)) {
            out.fallback = true;
            break;
        }
        if (g_best - r <= tolerance * r || g_best <= 1.0) {
            break;
        }
        const double gamma = (g_best / r - 1.0) / (g_best - 1.0);
        for (double& x : w) {
            x *= 1.0 - gamma;
        }
        w[best] += gamma;
    }
    double total = 0.0;
    for (double& x : w) {
        if (!std::isfinite(x)) {
            out.fallback = true;
        }
        if (x < 1e-6) {
            x = 0.0;
        }
        total += x;
    }
    if (out.fallback || !(total > 0.0)) {
        out.fallback = true;
        w.assign(n, 1.0 / static_cast<double>(n));
        return out;
    }
    for (double& x : w) {
        x /= total;
    }
    return out;
}

std::vector<std::size_t> phased_elim_round(const std::vector<double>& estimated_means, double eps) {
    require(!estimated_means.empty(), "phased_elim_round: surviving set is empty");
    const double best = *std::max_element(estimated_means.begin(), estimated_means.end());
    std::vector<std::size_t> keep;
    for (std::size_t a = 0; a < estimated_means.size(); ++a) {
        if (best - estimated_means[a] <= 2.0 * eps) {
            keep.push_back(a);
        }
    }
    return keep;
}

PhasedElimination::PhasedElimination(std::vector<Vec> features, double delta)
    : features_(std::move(features)), delta_(delta) {
    require(!features_.empty(), "PhasedElimination: at least one arm required");
    require(delta > 0.0 && delta < 1.0, "PhasedElimination: delta must lie in (0, 1)");
    for (const auto& f : features_) {
        require(f.size() == features_.front().size(), "PhasedElimination: features must share one dimension");
    }
    surviving_.resize(features_.size());
    for (std::size_t a = 0; a < features_.size(); ++a) {
        surviving_[a] = a;
    }
    theta_hat_.assign(features_.front().size(), 0.0);
    start_phase();
}

double PhasedElimination::epsilon() const {
    return std::ldexp(1.0, -static_cast<int>(phase_));
}

void PhasedElimination::start_phase() {
    ++phase_;
    std::vector<Vec> active;
    active.reserve(surviving_.size());
    for (std::size_t a : surviving_) {
        active.push_back(features_[a]);
    }
    const Design design = g_optimal_design(active);
    if (design.fallback) {
        ++fallbacks_;
    }
    std::vector<double> uniform(active.size(), 1.0);
    const double rank = static_cast<double>(std::max<std::size_t>(1, Pinv(weighted_gram(active, uniform)).rank()));
    const double eps = epsilon();
    const double l = static_cast<double>(phase_);
    const double k = static_cast<double>(features_.size());
    const double log_term = std::log(k * l * (l + 1.0) / delta_);

    schedule_.clear();
    for (std::size_t i = 0; i < active.size(); ++i) {
        const double pi = design.weights[i];
        if (pi <= 0.0) {
            continue;
        }
        const auto pulls = static_cast<std::size_t>(std::ceil(2.0 * rank * pi / (eps * eps) * log_term));
        if (pulls > 0) {
            schedule_.emplace_back(surviving_[i], pulls);
        }
    }
    if (schedule_.empty()) {
        schedule_.emplace_back(surviving_.front(), 1);
    }
    cursor_ = 0;
    pulled_in_slot_ = 0;
    gram_ = matcore::SymMatrix(features_.front().size());
    moment_.assign(features_.front().size(), 0.0);
}

void PhasedElimination::finish_phase() {
    theta_hat_ = Pinv(gram_).apply(moment_);
    std::vector<double> means;
    means.reserve(surviving_.size());
    for (std::size_t a : surviving_) {
        means.push_back(matcore::dot(theta_hat_, features_[a]));
    }
    const auto keep = phased_elim_round(means, epsilon());
    std::vector<std::size_t> next;
    next.reserve(keep.size());
    for (std::size_t i : keep) {
        next.push_back(surviving_[i]);
    }
    surviving_ = std::move(next);
    start_phase();
}

std::size_t PhasedElimination::select() {
    return schedule_[cursor_].first;
}

void PhasedElimination::observe(std::size_t arm, double reward) {
    require(arm == schedule_[cursor_].first, "PhasedElimination::observe: arm differs from the scheduled arm");
    gram_ = matcore::rank1_update(gram_, features_[arm], 1.0);
    matcore::axpy(reward, features_[arm], moment_);
    if (++pulled_in_slot_ == schedule_[cursor_].second) {
        pulled_in_slot_ = 0;
        if (++cursor_ == schedule_.size()) {
            finish_phase();
        }
    }
}

FixedPolicy::FixedPolicy(Vec action) : action_(std::move(action)) {
    require(std::abs(matcore::norm(action_) - 1.0) <= 1e-10, "FixedPolicy: action must be a unit vector");
}

LinUCBSphere::LinUCBSphere(std::size_t dim, LinUCBConfig cfg) : cfg_(cfg), acc_(dim, cfg.lambda) {}

double LinUCBSphere::beta() const {
    return est::beta_linucb(static_cast<double>(rounds_), cfg_.delta, cfg_.lambda, cfg_.L, cfg_.eta, dim());
}

Vec LinUCBSphere::next_action(Rng&) {
    return linucb_select_sphere(acc_, beta());
}

void LinUCBSphere::observe(const Vec& action, double reward) {
    acc_.update(action, reward, 1.0);
    ++rounds_;
}

Vec LinUCBSphere::estimate() const {
    return unit_or_fallback(acc_.estimate(), matcore::unit_vector(dim(), dim() - 1));
}

Telemetry LinUCBSphere::telemetry() const {
    return Telemetry{acc_.design().lambda_min(), acc_.design().lambda_max(), rounds_};
}

std::optional<bool> LinUCBSphere::covers(const Vec& theta) const {
    return est::contains(est::ConfidenceEllipsoid{acc_.estimate(), acc_.design().matrix(), beta()}, theta);
}

BanditPLS::BanditPLS(std::size_t horizon)
    : budget_(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(horizon))))) {
    require(horizon >= 1, "BanditPLS: horizon must be positive");
}

Vec BanditPLS::bloch_estimate() const {
    Vec r(3, 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        if (counts_[i]) {
            r[i] = sums_[i] / static_cast<double>(counts_[i]);
        }
    }
    return r;
}

Vec BanditPLS::next_action(Rng&) {
    if (committed_) {
        return *committed_;
    }
    if (explored_ >= budget_) {
        const Vec r = bloch_estimate();
        const bool every_axis = counts_[0] && counts_[1] && counts_[2];
        if (every_axis && matcore::norm(r) > 0.0) {
            committed_ = matcore::normalized(r);
            return *committed_;
        }
        // Degenerate estimate: one more round on each axis.
        budget_ = explored_ + 3;
    }
    return matcore::unit_vector(3, explored_ % 3);
}

void BanditPLS::observe(const Vec& action, double reward) {
    if (committed_) {
        return;
    }
    const std::size_t axis = explored_ % 3;
    require(action[axis] == 1.0, "BanditPLS::observe: action differs from the exploration axis");
    sums_[axis] += reward;
    ++counts_[axis];
    ++explored_;
}

Vec BanditPLS::estimate() const {
    if (committed_) {
        return *committed_;
    }
    return unit_or_fallback(bloch_estimate(), matcore::unit_vector(3, 2));
}

GridPhasedElimination::GridPhasedElimination(std::vector<Vec> grid, double delta)
    : grid_(grid), pe_(std::move(grid), delta) {}

Vec GridPhasedElimination::next_action(Rng&) {
    last_ = pe_.select();
    return grid_[last_];
}

void GridPhasedElimination::observe(const Vec&, double reward) {
    pe_.observe(last_, reward);
}

Vec GridPhasedElimination::estimate() const {
    return unit_or_fallback(pe_.theta_hat(), grid_[pe_.surviving().front()]);
}

std::vector<Vec> fibonacci_sphere(std::size_t n) {
    require(n >= 1, "fibonacci_sphere: need at least one point");
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    std::vector<Vec> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(i);
        pts.push_back(matcore::normalized({r * std::cos(phi), r * std::sin(phi), z}));
    }
    return pts;
}

}  // namespace qmab::pol
