#ifndef QMAB_MATCORE_HPP
#define QMAB_MATCORE_HPP

#include <cstddef>
#include <initializer_list>
#include <vector>

// Small dense symmetric linear algebra. Every matrix in this library is at
// most 16 x 16 (Bloch vectors are 3-d, QCB effective dimensions are <= 5).
namespace qmab::matcore {

using Vec = std::vector<double>;

class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t n, double diagonal = 0.0);

    static SymMatrix identity(std::size_t n, double scale = 1.0);
    static SymMatrix diagonal(const Vec& d);
    // Rejects input that is not square or not symmetric.
    static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t dim() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    // Writes both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double value);

    Vec apply(const Vec& x) const;
    double quad(const Vec& x) const;
    double frobenius() const;
    double trace() const;
    bool all_finite() const;

    // Grows the matrix by one row and column holding `diagonal` on the new diagonal entry.
    void append_dimension(double diagonal);

    SymMatrix operator+(const SymMatrix& other) const;
    SymMatrix operator-(const SymMatrix& other) const;
    SymMatrix operator*(double s) const;

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

struct EigenDecomposition {
    Vec values;                // ascending
    std::vector<Vec> vectors;  // vectors[i] pairs with values[i]

    std::size_t dim() const { return values.size(); }
    double min() const { return values.front(); }
    double max() const { return values.back(); }
    double log_det() const;
    SymMatrix reconstruct() const;
};

EigenDecomposition eig_sym(const SymMatrix& m);
SymMatrix rank1_update(const SymMatrix& v, const Vec& a, double w);
double weighted_norm(const Vec& x, const SymMatrix& m);
Vec solve_psd(const SymMatrix& v, const Vec& b);
// V^{-1} b from an already computed decomposition of a positive definite V.
Vec solve_eig(const EigenDecomposition& eig, const Vec& b);

constexpr double kSingularThreshold = 1e-12;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
Vec normalized(const Vec& a);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scaled(const Vec& a, double s);
void axpy(double s, const Vec& x, Vec& y);
Vec unit_vector(std::size_t dim, std::size_t axis);

}  // namespace qmab::matcore

#endif
