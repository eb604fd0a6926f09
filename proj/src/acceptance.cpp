#include "qmab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <string>

#include "qmab/errors.hpp"
#include "qmab/estimators.hpp"
#include "qmab/experiment.hpp"
#include "qmab/fit.hpp"
#include "qmab/qcb.hpp"
#include "qmab/thermo.hpp"

namespace qmab::harness {

namespace {

using matcore::Vec;

std::string fmt(const char* pattern, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, pattern, a);
    return buf;
}

std::string num(double x) {
    return fmt("%.4g", x);
}

// Seeds 1..n, fixed so every criterion is reproducible.
std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t n) {
    std::vector<std::uint64_t> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = base + i;
    }
    return s;
}

std::vector<double> as_double(const std::vector<std::size_t>& v) {
    return {v.begin(), v.end()};
}

// Values of `series` at 1-based rounds `grid`.
std::vector<double> sample(const std::vector<double>& series, const std::vector<std::size_t>& grid) {
    std::vector<double> out;
    out.reserve(grid.size());
    for (std::size_t t : grid) {
        out.push_back(series.at(t - 1));
    }
    return out;
}

std::vector<double> column(const EpisodeTrace& trace, double TraceRow::*field) {
    std::vector<double> out;
    out.reserve(trace.rows.size());
    for (const auto& r : trace.rows) {
        out.push_back(r.*field);
    }
    return out;
}

// Mean over seeds of a per-episode series sampled on the grid.
std::vector<double> mean_on_grid(const std::vector<std::vector<double>>& per_seed) {
    return aggregate(per_seed).mean;
}

using Runner = std::function<EpisodeTrace(std::uint64_t)>;

std::vector<EpisodeTrace> run_seeds(const std::vector<std::uint64_t>& seeds, unsigned threads, const Runner& fn) {
    std::vector<EpisodeTrace> out(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t i) { out[i] = fn(seeds[i]); });
    return out;
}

EpisodeTrace sphere_run(const env::EnvironmentSpec& env, const PolicyConfig& pc, std::size_t dim, std::size_t T,
                        std::uint64_t seed, EpisodeOptions opts) {
    auto policy = make_sphere_policy(pc, dim, T, seed);
    return run_sphere_episode(env, *policy, T, seed, opts);
}

env::EnvironmentSpec random_psmaqb(std::uint64_t seed) {
    EnvironmentConfig ec;
    ec.kind = "psmaqb";
    return make_environment(ec, seed);
}

// ---------------------------------------------------------------------------

CriterionResult eigenvalue_control(const AcceptanceOptions& o) {
    CriterionResult r{1, "eigenvalue-control invariant", false, "", 0.0};
    const std::size_t d = 3;
    const std::size_t k = 10;
    const std::size_t batches = 2000;
    const std::size_t T = batches * 2 * (d - 1) * k;
    PolicyConfig pc;
    pc.kind = "vvn";
    pc.lambda0 = 2.0;
    pc.k = k;
    pc.weight_beta_override = o.weight_beta_override;
    EpisodeOptions opts;
    const auto seeds = seed_range(1, 100);
    std::vector<std::size_t> violations(seeds.size(), 0);
    std::vector<double> worst(seeds.size(), std::numeric_limits<double>::infinity());
    const double ratio = 2.0 / (3.0 * static_cast<double>(d - 1));
    const auto start = std::chrono::steady_clock::now();
    parallel_for(seeds.size(), o.threads, [&](std::size_t i) {
        const auto tr = sphere_run(random_psmaqb(seeds[i]), pc, d, T, seeds[i], opts);
        for (const auto& row : tr.rows) {
            const double bound = std::sqrt(ratio * row.lmax);
            worst[i] = std::min(worst[i], row.lmin - bound);
            if (!(row.lmin >= bound)) {
                ++violations[i];
            }
        }
    });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::size_t total = 0;
    for (auto v : violations) {
        total += v;
    }
    const double margin = *std::min_element(worst.begin(), worst.end());
    r.passed = total == 0 && secs < 120.0;
    r.detail = "violations=" + std::to_string(total) + " over " + std::to_string(seeds.size()) + "x" +
               std::to_string(T) + " rounds, min(lmin - bound)=" + num(margin) + ", runtime " + num(secs) +
               " s (limit 120 s)";
    return r;
}

struct VVNRuns {
    std::vector<std::size_t> grid;
    std::vector<double> regret;
    std::vector<double> infidelity;
};

VVNRuns vvn_psmaqb_runs(const AcceptanceOptions& o) {
    const std::size_t T = 40000;
    PolicyConfig pc;
    pc.kind = "vvn";
    pc.lambda0 = 2.0;
    pc.k = 10;
    pc.weight_beta_override = o.weight_beta_override;
    EpisodeOptions opts;
    opts.eigenvalues = false;
    opts.infidelity = true;
    VVNRuns out;
    out.grid = log_grid(100, T, 40);
    const auto seeds = seed_range(1, 100);
    std::vector<std::vector<double>> regret(seeds.size());
    std::vector<std::vector<double>> infid(seeds.size());
    parallel_for(seeds.size(), o.threads, [&](std::size_t i) {
        const auto tr = sphere_run(random_psmaqb(seeds[i]), pc, 3, T, seeds[i], opts);
        regret[i] = sample(tr.cumulative_regret(), out.grid);
        infid[i] = sample(tr.infidelity, out.grid);
    });
    out.regret = mean_on_grid(regret);
    out.infidelity = mean_on_grid(infid);
    return out;
}

// Criteria 2 and 3 read the same runs.
const VVNRuns& shared_vvn_runs(const AcceptanceOptions& o) {
    static std::map<double, VVNRuns> cache;
    const double key = o.weight_beta_override.value_or(-1.0);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, vvn_psmaqb_runs(o)).first;
    }
    return it->second;
}

CriterionResult vvn_polylog_regret(const AcceptanceOptions& o) {
    CriterionResult r{2, "VVN polylog regret", false, "", 0.0};
    const auto& runs = shared_vvn_runs(o);
    const auto t = as_double(runs.grid);
    const auto log2 = fit_scaling(t, runs.regret, FitModel::Log2Affine);
    const auto sqrt_fit = fit_scaling(t, runs.regret, FitModel::Sqrt);
    r.passed = log2.coef >= 1.5 && log2.coef <= 6.5 && log2.residual < sqrt_fit.residual;
    r.detail = "m=" + num(log2.coef) + " (target [1.5, 6.5]), b=" + num(log2.offset) + ", residual log^2=" +
               num(log2.residual) + " vs sqrt=" + num(sqrt_fit.residual) + ", R(T)=" + num(runs.regret.back());
    return r;
}

CriterionResult online_infidelity(const AcceptanceOptions& o) {
    CriterionResult r{3, "online infidelity rate", false, "", 0.0};
    const auto& runs = shared_vvn_runs(o);
    const auto fit = fit_scaling(as_double(runs.grid), runs.infidelity, FitModel::LogOverTPower);
    const double m_signed = -fit.exponent;
    r.passed = m_signed >= -1.15 && m_signed <= -0.85;
    r.detail = "fitted (log t / t)^m exponent m=" + num(fit.exponent) + ", signed rate " + num(m_signed) +
               " (target -1.0 +- 0.15), final infidelity " + num(runs.infidelity.back());
    return r;
}

CriterionResult circle_comparison(const AcceptanceOptions& o) {
    CriterionResult r{4, "LinUCB-VN vs LinUCB on the circle", false, "", 0.0};
    const std::size_t T = 10000;
    const auto seeds = seed_range(1, 100);
    const auto grid = log_grid(100, T, 40);
    auto env_for = [](std::uint64_t seed) {
        EnvironmentConfig ec;
        ec.kind = "sphere";
        ec.dim = 2;
        ec.noise = env::NoiseModel::vanishing_subgaussian();
        return make_environment(ec, seed);
    };

    PolicyConfig lin;
    lin.kind = "linucb";
    lin.lambda = 1.0;
    lin.delta = 0.1;
    PolicyConfig vn;
    vn.kind = "vn";
    vn.lambda0 = 2.0;
    vn.delta_prime = 0.1;
    vn.batch_budget = 5000;
    vn.weight_beta_override = o.weight_beta_override;

    std::vector<std::vector<double>> lin_regret(seeds.size());
    std::vector<std::vector<double>> vn_regret(seeds.size());
    std::vector<std::vector<double>> vn_lmin(seeds.size());
    std::vector<std::vector<double>> vn_lmax(seeds.size());
    parallel_for(seeds.size(), o.threads, [&](std::size_t i) {
        const auto env = env_for(seeds[i]);
        EpisodeOptions quiet;
        quiet.eigenvalues = false;
        const auto a = sphere_run(env, lin, 2, T, seeds[i], quiet);
        lin_regret[i] = sample(a.cumulative_regret(), grid);
        const auto b = sphere_run(env, vn, 2, T, seeds[i], EpisodeOptions{});
        vn_regret[i] = sample(b.cumulative_regret(), grid);
        vn_lmin[i] = sample(column(b, &TraceRow::lmin), grid);
        vn_lmax[i] = sample(column(b, &TraceRow::lmax), grid);
    });
    const auto t = as_double(grid);
    const auto f_lin = fit_scaling(t, mean_on_grid(lin_regret), FitModel::SqrtTLogT);
    const auto f_vn = fit_scaling(t, mean_on_grid(vn_regret), FitModel::Log2Affine);
    const auto f_min = fit_scaling(t, mean_on_grid(vn_lmin), FitModel::Power);
    const auto f_max = fit_scaling(t, mean_on_grid(vn_lmax), FitModel::Power);
    const bool ok_lin = f_lin.coef >= 0.4 && f_lin.coef <= 1.8;
    const bool ok_vn = f_vn.coef >= 0.8 && f_vn.coef <= 4.0;
    const bool ok_min = std::abs(f_min.exponent - 1.0) <= 0.15;
    const bool ok_max = std::abs(f_max.exponent - 2.0) <= 0.2;
    r.passed = ok_lin && ok_vn && ok_min && ok_max;
    r.detail = "LinUCB c=" + num(f_lin.coef) + (ok_lin ? " ok" : " FAIL") + " [0.4, 1.8]; VN m=" + num(f_vn.coef) +
               (ok_vn ? " ok" : " FAIL") + " [0.8, 4]; lmin exponent " + num(f_min.exponent) +
               (ok_min ? " ok" : " FAIL") + " [0.85, 1.15]; lmax exponent " + num(f_max.exponent) +
               (ok_max ? " ok" : " FAIL") + " [1.8, 2.2]";
    return r;
}

CriterionResult confidence_coverage(const AcceptanceOptions& o) {
    CriterionResult r{5, "confidence coverage", false, "", 0.0};
    const std::size_t T = 2000;
    const std::size_t n = 500;
    const auto seeds = seed_range(1, n);
    auto env_for = [](std::uint64_t seed) {
        EnvironmentConfig ec;
        ec.kind = "sphere";
        ec.dim = 3;
        ec.noise = env::NoiseModel::gaussian(1.0);
        return make_environment(ec, seed);
    };
    const double nn = static_cast<double>(n);

    PolicyConfig lin;
    lin.kind = "linucb";
    lin.delta = 0.1;
    std::vector<int> fail(n, 0);
    parallel_for(n, o.threads, [&](std::size_t i) {
        EpisodeOptions opts;
        opts.eigenvalues = false;
        opts.coverage = true;
        const auto tr = sphere_run(env_for(seeds[i]), lin, 3, T, seeds[i], opts);
        for (const auto& row : tr.rows) {
            if (row.coverage && !*row.coverage) {
                fail[i] = 1;
                break;
            }
        }
    });
    double rate = 0.0;
    for (int f : fail) {
        rate += f;
    }
    rate /= nn;
    const double lin_limit = 0.1 + 3.0 * std::sqrt(0.1 * 0.9 / nn);
    bool ok = rate <= lin_limit;
    r.detail = "LinUCB simultaneous failure " + num(rate) + " (limit " + num(lin_limit) + ")";

    for (std::size_t k : {std::size_t{10}, std::size_t{48}}) {
        PolicyConfig vvn;
        vvn.kind = "vvn";
        vvn.lambda0 = 2.0;
        vvn.k = k;
        std::vector<int> miss(n, 0);
        parallel_for(n, o.threads, [&](std::size_t i) {
            const auto env = env_for(seeds[i]);
            const auto theta = std::get<env::SphereLinear>(env).theta();
            auto policy = make_sphere_policy(vvn, 3, T, seeds[i]);
            EpisodeOptions opts;
            opts.eigenvalues = false;
            run_sphere_episode(env, *policy, T, seeds[i], opts);
            miss[i] = policy->covers(theta).value_or(false) ? 0 : 1;
        });
        double m = 0.0;
        for (int f : miss) {
            m += f;
        }
        m /= nn;
        const double p = std::exp(-static_cast<double>(k) / 24.0);
        const double limit = p + 3.0 * std::sqrt(p * (1.0 - p) / nn);
        const bool ok_k = m <= limit;
        ok = ok && ok_k;
        r.detail += "; MoM k=" + std::to_string(k) + " final failure " + num(m) + " (limit " + num(limit) + ")";
    }
    r.passed = ok;
    return r;
}

CriterionResult ucb_regret(const AcceptanceOptions& o) {
    CriterionResult r{6, "UCB regret bound", false, "", 0.0};
    const std::size_t T = 10000;
    ExperimentConfig cfg;
    cfg.protocol = "bandit";
    cfg.environment.kind = "discrete";
    cfg.environment.state = quantum::Bloch{-0.5, 0.0, 0.5};
    cfg.environment.observables = {quantum::DiscreteObservable::from_direction({0.0, 0.0, 1.0}, 1.0, 0.0),
                                   quantum::DiscreteObservable::from_direction({1.0, 0.0, 0.0}, 1.0, 0.0)};
    cfg.policy.kind = "ucb";
    cfg.policy.eta = 0.5;
    cfg.T = T;
    cfg.seeds = seed_range(1, 200);
    validate(cfg);
    const auto traces = run_experiment(cfg, o.threads);

    const auto env = std::get<env::DiscreteMAQB>(make_environment(cfg.environment, 1));
    double gap_sum = 0.0;
    for (double g : suboptimality_gaps(env)) {
        gap_sum += g;
    }
    double full = 0.0;
    double half = 0.0;
    for (const auto& tr : traces) {
        full += tr.rows.back().cum_regret;
        half += tr.rows[T / 2 - 1].cum_regret;
    }
    full /= static_cast<double>(traces.size());
    half /= static_cast<double>(traces.size());
    const double Td = static_cast<double>(T);
    const double bound = 8.0 * std::sqrt(Td * 2.0 * std::log(Td)) + gap_sum;
    const double ratio = full / half;
    r.passed = full <= bound && ratio < 1.5;
    r.detail = "mean R(T)=" + num(full) + " (bound " + num(bound) + "), R(T)/R(T/2)=" + num(ratio) + " (< 1.5)";
    return r;
}

CriterionResult elliptical(const AcceptanceOptions& o) {
    CriterionResult r{7, "elliptical potential", false, "", 0.0};
    const std::size_t n = 100;
    const std::size_t T = 5000;
    const auto seeds = seed_range(1, n);
    std::vector<int> held(n, 0);
    std::vector<double> slack(n, 0.0);
    parallel_for(n, o.threads, [&](std::size_t i) {
        Rng rng = Rng::stream(seeds[i], "elliptical");
        std::vector<Vec> actions;
        actions.reserve(T);
        for (std::size_t t = 0; t < T; ++t) {
            const double radius = std::cbrt(rng.uniform());
            actions.push_back(matcore::scaled(env::random_unit_vector(3, rng), radius));
        }
        const auto ep = est::elliptical_potential(actions, matcore::SymMatrix::identity(3), 1.0);
        held[i] = ep.holds() ? 1 : 0;
        slack[i] = ep.rhs - ep.lhs;
    });
    int count = 0;
    for (int h : held) {
        count += h;
    }
    r.passed = count == static_cast<int>(n);
    r.detail = std::to_string(count) + "/" + std::to_string(n) + " sequences satisfy the inequality, min slack " +
               num(*std::min_element(slack.begin(), slack.end()));
    return r;
}

quantum::ProjectorAction direction_with_fidelity(double p) {
    const double c = 2.0 * p - 1.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    return quantum::ProjectorAction(quantum::Bloch{s, 0.0, c});
}

CriterionResult jc_statistics(const AcceptanceOptions& o) {
    CriterionResult r{8, "JC work statistics", false, "", 0.0};
    const std::vector<double> ps{0.0, 0.3, 0.9, 1.0};
    const std::vector<std::size_t> ns{0, 1, 5};
    const std::size_t N = 100000;
    const thermo::JCConfig cfg{1.0, 0};
    const quantum::PureQubit state(quantum::Bloch{0.0, 0.0, 1.0});
    std::vector<double> z(ps.size() * ns.size(), 0.0);
    std::vector<double> ident(ps.size() * ns.size(), 0.0);
    parallel_for(z.size(), o.threads, [&](std::size_t idx) {
        const double p = ps[idx / ns.size()];
        const std::size_t n = ns[idx % ns.size()];
        const auto dir = direction_with_fidelity(p);
        Rng rng = Rng::stream(1000 + idx, "jc-grid");
        double sum = 0.0;
        double sq = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double w = thermo::jc_round(cfg, state, dir, n, rng).work;
            sum += w;
            sq += w * w;
        }
        const double mean = sum / static_cast<double>(N);
        const double var = std::max(0.0, sq / static_cast<double>(N) - mean * mean);
        const double se = std::sqrt(var / static_cast<double>(N));
        const double expected = thermo::jc_expected_work(cfg.omega, p, n);
        z[idx] = std::abs(mean - expected) / (4.0 * se + 1e-12);
        ident[idx] = std::abs(thermo::jc_dissipation(cfg.omega, p, n) - (cfg.omega - expected));
    });
    const double worst_z = *std::max_element(z.begin(), z.end());
    const double worst_id = *std::max_element(ident.begin(), ident.end());
    r.passed = worst_z <= 1.0 && worst_id <= 1e-12;
    r.detail = "max |mean - formula| / (4 SE) = " + num(worst_z) + " (<= 1), max dissipation identity error " +
               num(worst_id) + " (<= 1e-12)";
    return r;
}

CriterionResult thermal_limit(const AcceptanceOptions& o) {
    CriterionResult r{9, "thermal quasi-static limit", false, "", 0.0};
    const std::vector<std::size_t> Ms{100, 1000, 10000};
    const std::vector<double> epss{0.05, 0.2};
    const double beta = 1.0;
    struct Cell {
        double err = 0.0;
        double se = 0.0;
        double tail = 0.0;
    };
    // Index: ((eps * 2 + branch) * Ms.size() + m).
    std::vector<Cell> cells(epss.size() * 2 * Ms.size());
    parallel_for(cells.size(), o.threads, [&](std::size_t idx) {
        const std::size_t m = idx % Ms.size();
        const int branch = static_cast<int>((idx / Ms.size()) % 2);
        const double eps = epss[idx / (2 * Ms.size())];
        const std::size_t M = Ms[m];
        const std::size_t N = M >= 10000 ? 50000 : 100000;
        const auto levels = thermo::thermal_work_levels(M, eps, beta);
        Rng rng = Rng::stream(7000 + idx, "thermal-limit");
        std::vector<double> w(N);
        double sum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            w[i] = thermo::thermal_work_given_branch(levels, branch, rng);
            sum += w[i];
        }
        const double mean = sum / static_cast<double>(N);
        double sq = 0.0;
        std::size_t far = 0;
        for (double x : w) {
            sq += (x - mean) * (x - mean);
            if (std::abs(x - mean) >= 0.1 / beta) {
                ++far;
            }
        }
        const double p_i = branch == 0 ? 1.0 - eps : eps;
        const double limit = (std::log(2.0) + std::log(p_i)) / beta;
        cells[idx].err = std::abs(mean - limit);
        cells[idx].se = std::sqrt(sq / static_cast<double>(N - 1) / static_cast<double>(N));
        cells[idx].tail = static_cast<double>(far) / static_cast<double>(N);
    });
    bool ok = true;
    std::string detail;
    for (std::size_t e = 0; e < epss.size(); ++e) {
        for (int branch = 0; branch < 2; ++branch) {
            const double eps = epss[e];
            const double p0 = 1.0 - eps;
            detail += (detail.empty() ? "" : "; ") + std::string("eps=") + num(eps) + " i=" + std::to_string(branch) +
                      " err";
            for (std::size_t m = 0; m < Ms.size(); ++m) {
                const auto& c = cells[(e * 2 + static_cast<std::size_t>(branch)) * Ms.size() + m];
                const double bound =
                    3.0 * (2.0 / eps) * (p0 - 0.5) / static_cast<double>(Ms[m]) / beta + 3.0 * c.se;
                const bool within = c.err <= bound;
                const bool decreasing =
                    m == 0 || c.err < cells[(e * 2 + static_cast<std::size_t>(branch)) * Ms.size() + m - 1].err;
                const bool tail_ok =
                    m == 0 || c.tail <= cells[(e * 2 + static_cast<std::size_t>(branch)) * Ms.size() + m - 1].tail;
                ok = ok && within && decreasing && tail_ok;
                detail += " " + num(c.err) + (within ? "" : "(>bound)") + (decreasing ? "" : "(not decreasing)") +
                          "/tail " + num(c.tail) + (tail_ok ? "" : "(not shrinking)");
            }
            const auto& first = cells[(e * 2 + static_cast<std::size_t>(branch)) * Ms.size()];
            const auto& last = cells[(e * 2 + static_cast<std::size_t>(branch)) * Ms.size() + Ms.size() - 1];
            if (!(last.tail < first.tail)) {
                ok = false;
                detail += "(tail did not shrink overall)";
            }
        }
    }
    r.passed = ok;
    r.detail = detail;
    return r;
}

CriterionResult dissipation_separation(const AcceptanceOptions& o) {
    CriterionResult r{10, "dissipation separation", false, "", 0.0};
    const std::size_t T = 10000;
    const auto seeds = seed_range(1, 50);
    const auto grid = log_grid(1000, T, 10);
    thermo::ExtractionConfig xc;

    PolicyConfig vvn;
    vvn.kind = "vvn";
    vvn.lambda0 = 2.0;
    vvn.k = 10;
    vvn.weight_beta_override = o.weight_beta_override;
    std::vector<std::vector<double>> d_vvn(seeds.size());
    parallel_for(seeds.size(), o.threads, [&](std::size_t i) {
        const auto state = std::get<env::PSMAQB>(random_psmaqb(seeds[i])).state;
        auto policy = make_sphere_policy(vvn, 3, T, seeds[i]);
        const auto res = thermo::run_extraction(thermo::Protocol::JC, state, *policy, T, xc, seeds[i]);
        d_vvn[i] = sample(res.trace.dissipation, grid);
    });
    const auto mean_vvn = mean_on_grid(d_vvn);
    std::vector<double> scaled;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double l = std::log(static_cast<double>(grid[j]));
        scaled.push_back(mean_vvn[j] / (l * l));
    }
    const double spread = *std::max_element(scaled.begin(), scaled.end()) /
                          *std::min_element(scaled.begin(), scaled.end());
    const bool ok_vvn = spread < 2.0;

    std::vector<double> etc(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        std::vector<double> finals(seeds.size());
        parallel_for(seeds.size(), o.threads, [&](std::size_t i) {
            const auto state = std::get<env::PSMAQB>(random_psmaqb(seeds[i])).state;
            pol::BanditPLS policy(grid[j]);
            const auto res = thermo::run_extraction(thermo::Protocol::JC, state, policy, grid[j], xc, seeds[i]);
            finals[i] = res.ledger.cumulative;
        });
        for (double f : finals) {
            etc[j] += f / static_cast<double>(seeds.size());
        }
    }
    const auto t = as_double(grid);
    const auto f_sqrt = fit_scaling(t, etc, FitModel::Sqrt);
    const auto f_log2 = fit_scaling(t, etc, FitModel::Log2Affine);
    const auto f_log = fit_scaling(t, etc, FitModel::LogAffine);
    const bool ok_etc = f_sqrt.residual < f_log2.residual && f_sqrt.residual < f_log.residual;
    r.passed = ok_vvn && ok_etc;
    r.detail = "VVN D/log^2 t max/min=" + num(spread) + (ok_vvn ? " ok" : " FAIL") + " (< 2), D(T)=" +
               num(mean_vvn.back()) + "; ETC c=" + num(f_sqrt.coef) + " residual sqrt=" + num(f_sqrt.residual) +
               " vs log^2=" + num(f_log2.residual) + " log=" + num(f_log.residual) + (ok_etc ? " ok" : " FAIL");
    return r;
}

CriterionResult qcb_phases(const AcceptanceOptions& o) {
    CriterionResult r{11, "QCB phase identification", false, "", 0.0};
    const std::size_t T = 2000;
    const std::size_t burn_in = 200;
    const auto seeds = seed_range(1, 20);
    qcb::QCBConfig cfg;
    cfg.model = qcb::Model::Ising;
    cfg.n = 10;
    cfg.range = {-2.0, 2.0};
    cfg.T = T;
    std::vector<qcb::QCBTrace> traces(seeds.size());
    parallel_for(seeds.size(), o.threads, [&](std::size_t i) { traces[i] = qcb::run_qcb(cfg, seeds[i]); });

    std::size_t hits = 0;
    std::size_t total = 0;
    double first_half = 0.0;
    double second_half = 0.0;
    bool ising_deff = true;
    for (const auto& tr : traces) {
        for (std::size_t t = 0; t < tr.rows.size(); ++t) {
            const auto& row = tr.rows[t];
            if (t + 1 > burn_in) {
                const double h = std::abs(row.params[0]);
                if (h > 1.5 || h < 0.5) {
                    ++total;
                    hits += row.misclassified ? 0 : 1;
                }
            }
            if (row.misclassified) {
                if (t < T / 2) {
                    first_half += 1.0;
                } else {
                    second_half += 1.0;
                }
            }
        }
        ising_deff = ising_deff && tr.d_eff.back() == 2;
    }
    cfg.model = qcb::Model::Cluster;
    cfg.T = 200;
    const auto cluster = qcb::run_qcb(cfg, 1);
    const bool cluster_deff = cluster.d_eff.back() == 3;

    const double match = static_cast<double>(hits) / static_cast<double>(std::max<std::size_t>(1, total));
    const double growth = first_half > 0.0 ? second_half / first_half : 0.0;
    r.passed = match >= 0.9 && growth < 0.2 && ising_deff && cluster_deff;
    r.detail = "match " + num(match) + " (>= 0.9) over " + std::to_string(total) +
               " rounds, second/first half classifier-regret growth " + num(growth) + " (< 0.2), d_eff Ising " +
               std::to_string(traces.front().d_eff.back()) + " cluster " + std::to_string(cluster.d_eff.back());
    return r;
}

CriterionResult lower_bound_floor(const AcceptanceOptions& o) {
    CriterionResult r{12, "lower-bound sanity floor", false, "", 0.0};
    const std::size_t T = 10000;
    const auto seeds = seed_range(1, 50);
    const double d = 2.0;
    const double floor = (d - 1.0) * std::log(static_cast<double>(T) / (d + 1.0));
    const std::vector<std::string> kinds{"linucb", "vn", "vvn", "bandit_pls", "phased_elim"};
    bool ok = true;
    for (const auto& kind : kinds) {
        PolicyConfig pc;
        pc.kind = kind;
        pc.grid = 64;
        pc.weight_beta_override = o.weight_beta_override;
        EpisodeOptions opts;
        opts.eigenvalues = false;
        const auto traces = run_seeds(seeds, o.threads, [&](std::uint64_t s) {
            return sphere_run(random_psmaqb(s), pc, 3, T, s, opts);
        });
        double mean = 0.0;
        for (const auto& tr : traces) {
            mean += tr.rows.back().cum_regret / static_cast<double>(traces.size());
        }
        const bool above = mean > floor;
        ok = ok && above;
        r.detail += (r.detail.empty() ? "" : ", ") + kind + "=" + num(mean) + (above ? "" : " (below floor)");
    }
    r.detail += "; floor " + num(floor);
    r.passed = ok;
    return r;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
    using Fn = CriterionResult (*)(const AcceptanceOptions&);
    static const Fn table[kCriterionCount] = {eigenvalue_control, vvn_polylog_regret,  online_infidelity,
                                              circle_comparison,  confidence_coverage, ucb_regret,
                                              elliptical,         jc_statistics,       thermal_limit,
                                              dissipation_separation, qcb_phases,      lower_bound_floor};
    if (id < 1 || id > kCriterionCount) {
        throw ContractError("run_criterion: unknown criterion " + std::to_string(id));
    }
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r = table[id - 1](options);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& options) {
    std::vector<CriterionResult> out;
    out.reserve(ids.size());
    for (int id : ids) {
        out.push_back(run_criterion(id, options));
    }
    return out;
}

std::string format_result(const CriterionResult& r) {
    char head[32];
    std::snprintf(head, sizeof head, "%s %2d  ", r.passed ? "PASS" : "FAIL", r.id);
    char tail[32];
    std::snprintf(tail, sizeof tail, " (%.1f s)", r.seconds);
    return head + r.title + ": " + r.detail + tail;
}

}  // namespace qmab::harness
