#ifndef QMAB_QCB_HPP
#define QMAB_QCB_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmab/estimators.hpp"
#include "qmab/matcore.hpp"
#include "qmab/rng.hpp"

// Quantum contextual bandit: the context is a translation-invariant Pauli
// Hamiltonian and each arm is a fixed state known only through its per-family
// expectation values.
namespace qmab::qcb {

using matcore::Vec;

enum class Family { ZZ, X, Z, XX, XZX };

inline constexpr std::size_t kFamilyCount = 5;
inline constexpr std::array<Family, kFamilyCount> kFamilyOrder{Family::ZZ, Family::X, Family::Z, Family::XX,
                                                               Family::XZX};

std::string family_name(Family f);

struct ContextVector {
    std::vector<Family> families;
    std::vector<double> coefficients;
    std::size_t n_qubits = 1;
    bool reward_is_negative_energy = true;
    std::array<double, 2> params{0.0, 0.0};

    // n * coefficient laid out in kFamilyOrder, zero for absent families.
    Vec features() const;
};

// H = sum_i (Z_i Z_{i+1} + h X_i)
ContextVector ising_context(double h, std::size_t n);
// H = sum_i (Z_i - j1 X_i X_{i+1} - j2 X_{i-1} Z_i X_{i+1})
ContextVector cluster_context(double j1, double j2, std::size_t n);

struct ActionProfile {
    std::string name;
    std::map<Family, double> expectations;

    // E[reward] = -sum_f coeff_f * n * <f>
    double expected_reward(const ContextVector& ctx) const;
};

std::vector<ActionProfile> default_ising_profiles();
std::vector<ActionProfile> default_cluster_profiles();

// -sum_f coeff_f * (sum of n independent +-1 outcomes with mean <f>).
double qcb_reward(const ActionProfile& profile, const ContextVector& ctx, Rng& rng);

struct GramIngest {
    Vec coords;
    bool grew = false;
};

class GramBasis {
public:
    explicit GramBasis(std::size_t ambient_dim = kFamilyCount) : ambient_(ambient_dim) {}

    std::size_t d_eff() const { return basis_.size(); }
    const std::vector<Vec>& basis() const { return basis_; }
    std::size_t ambient_dim() const { return ambient_; }

private:
    friend GramIngest gram_ingest(GramBasis& basis, const Vec& c);

    std::size_t ambient_;
    std::vector<Vec> basis_;
};

// Orthogonalizes c against the basis, grows it by the normalized residual when
// the residual is above 1e-8 ||c||, and returns the coordinates of c.
GramIngest gram_ingest(GramBasis& basis, const Vec& c);

// argmax_a theta_a . c + alpha sqrt(c^T V_a^{-1} c), lowest index on ties.
std::size_t clinucb_step(const std::vector<est::LSEAccumulator>& per_arm, const Vec& c_eff, double alpha);

// alpha_t = m + sqrt(2 ln(1/delta) + d ln(1 + t L^2 / d))
double alpha_t(double t, double delta, std::size_t d, double L, double m);

struct CLinUCBConfig {
    double lambda = 1.0;
    double delta = 0.1;
    double m = 1.0;
    double L = 1.0;
    std::optional<double> alpha_override;
};

class CLinUCB {
public:
    CLinUCB(std::size_t arms, CLinUCBConfig cfg);

    // Ingests the context, picks an arm, and remembers the coordinates for observe().
    std::size_t select(const Vec& context_features);
    void observe(std::size_t arm, double reward);

    std::size_t d_eff() const { return basis_.d_eff(); }
    std::size_t rounds() const { return rounds_; }
    const std::vector<est::LSEAccumulator>& arms() const { return arms_; }
    double current_alpha() const;

private:
    std::size_t arm_count_;
    CLinUCBConfig cfg_;
    GramBasis basis_;
    std::vector<est::LSEAccumulator> arms_;
    Vec last_coords_;
    std::size_t rounds_ = 0;
};

struct QCBRow {
    std::array<double, 2> params{0.0, 0.0};
    std::size_t chosen = 0;
    std::size_t optimal = 0;
    double reward = 0.0;
    double regret = 0.0;
    bool misclassified = false;
};

struct QCBTrace {
    std::vector<QCBRow> rows;
    std::vector<std::size_t> d_eff;
};

std::size_t classifier_regret(const QCBTrace& trace);

struct PhaseRow {
    double param1 = 0.0;
    double param2 = 0.0;
    std::size_t arm = 0;
};

// Rows for rounds t > burn_in (rounds are numbered from 1).
std::vector<PhaseRow> phase_map_export(const QCBTrace& trace, std::size_t burn_in);
void write_phase_map_csv(const std::vector<PhaseRow>& rows, std::ostream& out);

enum class Model { Ising, Cluster };

struct QCBConfig {
    Model model = Model::Ising;
    std::size_t n = 10;
    std::array<double, 2> range{-2.0, 2.0};  // h interval, or the side of the (j1, j2) box
    std::size_t T = 2000;
    CLinUCBConfig bandit;
    bool L_from_contexts = true;  // L = largest context norm over the sampling range
    std::vector<ActionProfile> profiles;  // empty: the model's defaults
};

QCBTrace run_qcb(const QCBConfig& cfg, std::uint64_t seed);

}  // namespace qmab::qcb

#endif
