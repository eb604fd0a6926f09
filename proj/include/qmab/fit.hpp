#ifndef QMAB_FIT_HPP
#define QMAB_FIT_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace qmab::harness {

enum class FitModel {
    Log2Affine,     // c log^2 t + b
    SqrtTLogT,      // c sqrt(t log t)
    LogOverTPower,  // c (log t / t)^m
    Power,          // c t^m
    Sqrt,           // c sqrt(t)
    LogAffine,      // c log t + b
};

std::string to_string(FitModel model);
FitModel fit_model_from_string(const std::string& name);

struct FitResult {
    FitModel model = FitModel::Power;
    double coef = 0.0;      // c
    double offset = 0.0;    // b (affine models)
    double exponent = 0.0;  // m (power models)
    double residual = 0.0;  // RMS error in the original y coordinates
    std::size_t points = 0;

    double predict(double t) const;
};

// Ordinary least squares in the model's linearized coordinates. Power models
// regress ln y on ln x and need y > 0; log models need t > 1.
FitResult fit_scaling(const std::vector<double>& t, const std::vector<double>& y, FitModel model);

struct Series {
    std::vector<double> mean;
    std::vector<double> stddev;  // sample standard deviation, 0 for a single series
};

Series aggregate(const std::vector<std::vector<double>>& series);

// Up to `points` rounds in [first, last], evenly spaced in log t, duplicates dropped.
std::vector<std::size_t> log_grid(std::size_t first, std::size_t last, std::size_t points);

}  // namespace qmab::harness

#endif
