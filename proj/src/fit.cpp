#include "qmab/fit.hpp"

#include <algorithm>
#include <cmath>

#include "qmab/errors.hpp"

namespace qmab::harness {

namespace {

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
};

Line ols(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 1e-300 * n)) {
        throw InputError("fit_scaling: degenerate design, all abscissae are equal");
    }
    const double slope = sxy / sxx;
    return Line{slope, my - slope * mx};
}

double through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    if (!(sxx > 0.0)) {
        throw InputError("fit_scaling: degenerate design, all regressors vanish");
    }
    return sxy / sxx;
}

void require_distinct(const std::vector<double>& t) {
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    if (*lo == *hi) {
        throw InputError("fit_scaling: degenerate design, all abscissae are equal");
    }
}

}  // namespace

std::string to_string(FitModel model) {
    switch (model) {
        case FitModel::Log2Affine:
            return "log2_affine";
        case FitModel::SqrtTLogT:
            return "sqrt_t_log_t";
        case FitModel::LogOverTPower:
            return "log_over_t_power";
        case FitModel::Power:
            return "power";
        case FitModel::Sqrt:
            return "sqrt";
        case FitModel::LogAffine:
            return "log_affine";
    }
    return "unknown";
}

FitModel fit_model_from_string(const std::string& name) {
    for (FitModel m : {FitModel::Log2Affine, FitModel::SqrtTLogT, FitModel::LogOverTPower, FitModel::Power,
                       FitModel::Sqrt, FitModel::LogAffine}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown fit model '" + name + "'");
}

double FitResult::predict(double t) const {
    switch (model) {
        case FitModel::Log2Affine:
            return coef * std::log(t) * std::log(t) + offset;
        case FitModel::SqrtTLogT:
            return coef * std::sqrt(t * std::log(t));
        case FitModel::LogOverTPower:
            return coef * std::pow(std::log(t) / t, exponent);
        case FitModel::Power:
            return coef * std::pow(t, exponent);
        case FitModel::Sqrt:
            return coef * std::sqrt(t);
        case FitModel::LogAffine:
            return coef * std::log(t) + offset;
    }
    return 0.0;
}

FitResult fit_scaling(const std::vector<double>& t, const std::vector<double>& y, FitModel model) {
    if (t.size() != y.size()) {
        throw InputError("fit_scaling: abscissa and ordinate lengths differ");
    }
    if (t.size() < 10) {
        throw InputError("fit_scaling: at least 10 points are required");
    }
    const bool needs_log = model != FitModel::Power && model != FitModel::Sqrt;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(y[i])) {
            throw InputError("fit_scaling: non-finite data");
        }
        if (t[i] <= 0.0 || (needs_log && t[i] <= 1.0)) {
            throw InputError("fit_scaling: abscissae must be positive (and above 1 for log models)");
        }
    }
    require_distinct(t);

    FitResult r;
    r.model = model;
    r.points = t.size();
    std::vector<double> x(t.size()), z(t.size());
    switch (model) {
        case FitModel::Log2Affine:
        case FitModel::LogAffine: {
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double l = std::log(t[i]);
                x[i] = model == FitModel::Log2Affine ? l * l : l;
            }
            const Line line = ols(x, y);
            r.coef = line.slope;
            r.offset = line.intercept;
            break;
        }
        case FitModel::SqrtTLogT:
        case FitModel::Sqrt: {
            for (std::size_t i = 0; i < t.size(); ++i) {
                x[i] = model == FitModel::Sqrt ? std::sqrt(t[i]) : std::sqrt(t[i] * std::log(t[i]));
            }
            r.coef = through_origin(x, y);
            break;
        }
        case FitModel::LogOverTPower:
        case FitModel::Power: {
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (y[i] <= 0.0) {
                    throw InputError("fit_scaling: power models need positive ordinates");
                }
                x[i] = model == FitModel::Power ? std::log(t[i]) : std::log(std::log(t[i]) / t[i]);
                z[i] = std::log(y[i]);
            }
            const Line line = ols(x, z);
            r.exponent = line.slope;
            r.coef = std::exp(line.intercept);
            break;
        }
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double e = y[i] - r.predict(t[i]);
        ss += e * e;
    }
    r.residual = std::sqrt(ss / static_cast<double>(t.size()));
    return r;
}

Series aggregate(const std::vector<std::vector<double>>& series) {
    if (series.empty()) {
        throw InputError("aggregate: no series");
    }
    const std::size_t n = series.front().size();
    for (const auto& s : series) {
        if (s.size() != n) {
            throw InputError("aggregate: series lengths differ");
        }
    }
    Series out;
    out.mean.assign(n, 0.0);
    out.stddev.assign(n, 0.0);
    const double k = static_cast<double>(series.size());
    for (std::size_t i = 0; i < n; ++i) {
        // Fixed summation order (series order) keeps the result reproducible.
        double sum = 0.0;
        for (const auto& s : series) {
            sum += s[i];
        }
        const double mean = sum / k;
        double ss = 0.0;
        for (const auto& s : series) {
            ss += (s[i] - mean) * (s[i] - mean);
        }
        out.mean[i] = mean;
        out.stddev[i] = series.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
    }
    return out;
}

std::vector<std::size_t> log_grid(std::size_t first, std::size_t last, std::size_t points) {
    require(first >= 1 && first < last && points >= 2, "log_grid: need 1 <= first < last and points >= 2");
    std::vector<std::size_t> g;
    const double a = std::log(static_cast<double>(first));
    const double b = std::log(static_cast<double>(last));
    for (std::size_t i = 0; i < points; ++i) {
        const double v = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
        auto r = static_cast<std::size_t>(std::llround(v));
        r = std::clamp(r, first, last);
        if (g.empty() || r > g.back()) {
            g.push_back(r);
        }
    }
    return g;
}

}  // namespace qmab::harness
