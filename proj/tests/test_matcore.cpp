#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "qmab/errors.hpp"
#include "qmab/matcore.hpp"
#include "qmab/rng.hpp"

using namespace qmab;
using namespace qmab::matcore;

namespace {

SymMatrix random_psd(std::size_t n, Rng& rng, double ridge) {
    SymMatrix m = SymMatrix::identity(n, ridge);
    for (std::size_t k = 0; k < n + 2; ++k) {
        Vec a(n);
        for (auto& x : a) {
            x = rng.normal();
        }
        m = rank1_update(m, a, rng.uniform());
    }
    return m;
}

Eigen::MatrixXd to_eigen(const SymMatrix& m) {
    Eigen::MatrixXd e(m.dim(), m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i) {
        for (std::size_t j = 0; j < m.dim(); ++j) {
            e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
        }
    }
    return e;
}

void expect_vec_near(const Vec& a, const Vec& b, double tol) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(a[i], b[i], tol) << "component " << i;
    }
}

}  // namespace

TEST(EigSym, IdentityHasUnitEigenvalues) {
    const auto e = eig_sym(SymMatrix::identity(3));
    expect_vec_near(e.values, {1.0, 1.0, 1.0}, 1e-15);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(norm(e.vectors[i]), 1.0, 1e-12);
        for (std::size_t j = i + 1; j < 3; ++j) {
            EXPECT_NEAR(dot(e.vectors[i], e.vectors[j]), 0.0, 1e-10);
        }
    }
}

TEST(EigSym, DiagonalMatrix) {
    const auto e = eig_sym(SymMatrix::diagonal({2.0, 5.0}));
    expect_vec_near(e.values, {2.0, 5.0}, 1e-15);
    expect_vec_near(e.vectors[0], {1.0, 0.0}, 1e-15);
    expect_vec_near(e.vectors[1], {0.0, 1.0}, 1e-15);
}

TEST(EigSym, TwoByTwoCoupled) {
    const auto e = eig_sym(SymMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}}));
    expect_vec_near(e.values, {1.0, 3.0}, 1e-14);
    const double s = 1.0 / std::sqrt(2.0);
    // Sign rule: the largest-magnitude component is positive, first index on ties.
    expect_vec_near(e.vectors[0], {s, -s}, 1e-14);
    expect_vec_near(e.vectors[1], {s, s}, 1e-14);
}

TEST(EigSym, RejectsNonFinite) {
    SymMatrix m = SymMatrix::identity(2);
    m.set(0, 1, std::numeric_limits<double>::quiet_NaN());
    EXPECT_THROW(eig_sym(m), InputError);
}

TEST(EigSym, RejectsOversizedMatrix) {
    EXPECT_THROW(eig_sym(SymMatrix::identity(17)), ContractError);
}

TEST(EigSym, MatchesEigenOracleOnRandomMatrices) {
    Rng rng(11);
    for (std::size_t n : {2u, 3u, 5u, 8u, 16u}) {
        for (int rep = 0; rep < 10; ++rep) {
            SymMatrix m(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i; j < n; ++j) {
                    m.set(i, j, rng.normal());
                }
            }
            const auto ours = eig_sym(m);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(m));
            for (std::size_t i = 0; i < n; ++i) {
                EXPECT_NEAR(ours.values[i], oracle.eigenvalues()(static_cast<Eigen::Index>(i)),
                            1e-12 * (1.0 + m.frobenius()));
            }
        }
    }
}

TEST(EigSym, ReconstructionAndOrthonormality) {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 2 + rep % 6;
        const SymMatrix m = random_psd(n, rng, 0.1);
        const auto e = eig_sym(m);
        EXPECT_LE((e.reconstruct() - m).frobenius(), 1e-10 * m.frobenius());
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(norm(e.vectors[i]), 1.0, 1e-12);
            if (i > 0) {
                EXPECT_LE(e.values[i - 1], e.values[i]);
            }
            for (std::size_t j = i + 1; j < n; ++j) {
                EXPECT_LE(std::abs(dot(e.vectors[i], e.vectors[j])), 1e-10);
            }
        }
    }
}

TEST(EigSym, LogDetMatchesOracle) {
    Rng rng(9);
    const SymMatrix m = random_psd(4, rng, 0.5);
    const double oracle = std::log(to_eigen(m).determinant());
    EXPECT_NEAR(eig_sym(m).log_det(), oracle, 1e-12);
}

TEST(Rank1Update, UnitAxis) {
    const auto v = rank1_update(SymMatrix::identity(2), {1.0, 0.0}, 1.0);
    EXPECT_DOUBLE_EQ(v(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(v(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(v(0, 1), 0.0);
}

TEST(Rank1Update, ZeroWeightIsIdentity) {
    const auto v = rank1_update(SymMatrix::identity(2), {3.0, -7.0}, 0.0);
    EXPECT_EQ((v - SymMatrix::identity(2)).frobenius(), 0.0);
}

TEST(Rank1Update, DiagonalDirection) {
    const double s = 1.0 / std::sqrt(2.0);
    const auto v = rank1_update(SymMatrix::identity(2), {s, s}, 2.0);
    const auto expected = SymMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}});
    EXPECT_LE((v - expected).frobenius(), 1e-15);
}

TEST(Rank1Update, DimensionMismatch) {
    EXPECT_THROW(rank1_update(SymMatrix::identity(2), {1.0, 0.0, 0.0}, 1.0), ContractError);
    EXPECT_THROW(rank1_update(SymMatrix::identity(2), {1.0, 0.0}, -1.0), ContractError);
}

TEST(Rank1Update, EigenvaluePerturbationBounds) {
    Rng rng(21);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rep % 4;
        const SymMatrix m = random_psd(n, rng, 0.01);
        Vec a(n);
        for (auto& x : a) {
            x = rng.normal();
        }
        const double w = 3.0 * rng.uniform();
        const auto before = eig_sym(m);
        const auto after = eig_sym(rank1_update(m, a, w));
        EXPECT_GE(after.min(), before.min() - 1e-12);
        EXPECT_LE(after.max(), before.max() + w * dot(a, a) + 1e-12);
    }
}

TEST(WeightedNorm, Examples) {
    EXPECT_DOUBLE_EQ(weighted_norm({1.0, 0.0}, SymMatrix::identity(2)), 1.0);
    EXPECT_DOUBLE_EQ(weighted_norm({0.0, 0.0}, SymMatrix::identity(2)), 0.0);
    EXPECT_NEAR(weighted_norm({1.0, 1.0}, SymMatrix::diagonal({4.0, 9.0})), std::sqrt(13.0), 1e-15);
}

TEST(WeightedNorm, NullSpaceGivesZero) {
    EXPECT_DOUBLE_EQ(weighted_norm({0.0, 2.0}, SymMatrix::diagonal({1.0, 0.0})), 0.0);
}

TEST(WeightedNorm, RejectsIndefiniteMatrix) {
    EXPECT_THROW(weighted_norm({0.0, 1.0}, SymMatrix::diagonal({1.0, -1.0})), PsdViolationError);
}

TEST(SolvePsd, Examples) {
    expect_vec_near(solve_psd(SymMatrix::identity(2), {3.0, 4.0}), {3.0, 4.0}, 1e-15);
    expect_vec_near(solve_psd(SymMatrix::diagonal({2.0, 4.0}), {2.0, 4.0}), {1.0, 1.0}, 1e-15);
    expect_vec_near(solve_psd(SymMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}}), {1.0, 0.0}),
                    {2.0 / 3.0, -1.0 / 3.0}, 1e-15);
}

TEST(SolvePsd, SingularMatrixRejected) {
    EXPECT_THROW(solve_psd(SymMatrix::diagonal({1.0, 0.0}), {1.0, 1.0}), SingularMatrixError);
}

TEST(SolvePsd, RoundTripOnRandomWellConditioned) {
    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rep % 5;
        const SymMatrix v = random_psd(n, rng, 1.0);
        Vec x(n);
        for (auto& c : x) {
            c = rng.normal();
        }
        const Vec b = v.apply(x);
        const Vec got = solve_psd(v, b);
        expect_vec_near(got, x, 1e-9);
        EXPECT_LE(norm(sub(v.apply(got), b)), 1e-9 * norm(b));
    }
}

TEST(SolvePsd, MatchesEigenLdlt) {
    Rng rng(8);
    const SymMatrix v = random_psd(5, rng, 0.2);
    Vec b{1.0, -2.0, 0.5, 3.0, 0.0};
    const Eigen::VectorXd eb = Eigen::Map<const Eigen::VectorXd>(b.data(), 5);
    const Eigen::VectorXd oracle = to_eigen(v).ldlt().solve(eb);
    const Vec ours = solve_psd(v, b);
    for (int i = 0; i < 5; ++i) {
        EXPECT_NEAR(ours[static_cast<std::size_t>(i)], oracle(i), 1e-10);
    }
}

TEST(SymMatrix, FromRowsRejectsAsymmetry) {
    EXPECT_THROW(SymMatrix::from_rows({{1.0, 2.0}, {0.0, 1.0}}), ContractError);
}

TEST(SymMatrix, AppendDimension) {
    SymMatrix m = SymMatrix::from_rows({{2.0, 1.0}, {1.0, 3.0}});
    m.append_dimension(5.0);
    ASSERT_EQ(m.dim(), 3u);
    EXPECT_DOUBLE_EQ(m(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(m(2, 2), 5.0);
    EXPECT_DOUBLE_EQ(m(0, 2), 0.0);
    EXPECT_DOUBLE_EQ(m(2, 1), 0.0);
}

TEST(Vectors, Helpers) {
    EXPECT_DOUBLE_EQ(dot({1.0, 2.0}, {3.0, 4.0}), 11.0);
    EXPECT_DOUBLE_EQ(norm({3.0, 4.0}), 5.0);
    expect_vec_near(normalized({3.0, 4.0}), {0.6, 0.8}, 1e-15);
    EXPECT_THROW(dot({1.0}, {1.0, 2.0}), ContractError);
    Vec y{1.0, 1.0};
    axpy(2.0, {1.0, -1.0}, y);
    expect_vec_near(y, {3.0, -1.0}, 0.0);
    expect_vec_near(unit_vector(3, 1), {0.0, 1.0, 0.0}, 0.0);
}
