#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmab/acceptance.hpp"
#include "qmab/config.hpp"
#include "qmab/errors.hpp"
#include "qmab/experiment.hpp"
#include "qmab/fit.hpp"
#include "qmab/qcb.hpp"
#include "qmab/trace.hpp"

namespace fs = std::filesystem;
using namespace qmab;
using namespace qmab::harness;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAcceptance = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_traces(const ExperimentConfig& cfg, const std::vector<EpisodeTrace>& traces, const std::string& out) {
    if (out.empty()) {
        for (const auto& tr : traces) {
            std::cout << "# seed " << tr.seed << "\n";
            write_csv(tr, std::cout);
        }
        return;
    }
    fs::create_directories(out);
    for (const auto& tr : traces) {
        std::ofstream f(fs::path(out) / ("seed_" + std::to_string(tr.seed) + ".csv"));
        write_csv(tr, f);
    }
    if (cfg.protocol == "qcb") {
        for (auto seed : cfg.seeds) {
            const auto q = qcb::run_qcb(make_qcb_config(cfg), seed);
            std::ofstream f(fs::path(out) / ("phase_map_" + std::to_string(seed) + ".csv"));
            write_phase_map_csv(phase_map_export(q, cfg.qcb.burn_in), f);
        }
    }
    std::fprintf(stderr, "wrote %zu trace(s) to %s\n", traces.size(), out.c_str());
}

double final_regret(const EpisodeTrace& tr) {
    return tr.rows.empty() ? 0.0 : tr.rows.back().cum_regret;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum multi-armed bandit experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::uint64_t> seeds;
    std::string out;
    unsigned threads = 1;

    auto* run = app.add_subcommand("run", "Run one experiment config and write per-seed CSV traces");
    run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seeds, "Override the config's seeds");
    run->add_option("--out", out, "Output directory (default: stdout)");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    std::string pointer;
    std::vector<std::string> values;
    auto* sweep = app.add_subcommand("sweep", "Run a config over a grid of values for one field");
    sweep->add_option("config", config_path, "Base config (JSON)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--param", pointer, "JSON pointer of the swept field, e.g. /policy/lambda0")->required();
    sweep->add_option("--values", values, "JSON values to substitute")->required();
    sweep->add_option("--seed", seeds, "Override the config's seeds");
    sweep->add_option("--out", out, "Summary CSV path (default: stdout)");
    sweep->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    std::vector<std::string> inputs;
    std::vector<std::string> models{"log2_affine"};
    std::string column_name = "cum_regret";
    std::size_t points = 40;
    std::size_t first = 100;
    auto* fit = app.add_subcommand("fit", "Fit scaling models to the seed-mean of a trace column");
    fit->add_option("inputs", inputs, "Trace CSV files")->required()->check(CLI::ExistingFile);
    fit->add_option("--model", models, "Models: log2_affine, sqrt_t_log_t, log_over_t_power, power, sqrt, log_affine");
    fit->add_option("--column", column_name, "cum_regret, inst_regret, reward, lmin or lmax");
    fit->add_option("--points", points, "Log-spaced grid points");
    fit->add_option("--first", first, "First round of the grid");
    fit->add_option("--out", out, "Write the JSON result here (default: stdout)");

    std::vector<int> only;
    auto* report = app.add_subcommand("report", "Run the acceptance criteria and print one line per criterion");
    report->add_option("--only", only, "Criterion ids")->check(CLI::Range(1, kCriterionCount));
    report->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    report->add_option("--out", out, "Also write the report here");
    double weight_beta = 0.0;
    report->add_option("--weight-beta", weight_beta,
                       "Sensitivity run: replace beta in the VN/VVN batch weight (not a faithful run)")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = load_config(config_path);
            if (!seeds.empty()) {
                cfg.seeds = seeds;
                validate(cfg);
            }
            const auto traces = run_experiment(cfg, threads);
            write_traces(cfg, traces, out.empty() ? cfg.output : out);
            return kExitOk;
        }
        if (*sweep) {
            const auto base = nlohmann::json::parse(read_file(config_path));
            std::ostringstream csv;
            csv << "value,seed,final_regret\n";
            for (const auto& v : values) {
                auto j = base;
                nlohmann::json parsed;
                try {
                    parsed = nlohmann::json::parse(v);
                } catch (const nlohmann::json::exception&) {
                    parsed = v;
                }
                j[nlohmann::json::json_pointer(pointer)] = parsed;
                auto cfg = parse_config(j.dump());
                if (!seeds.empty()) {
                    cfg.seeds = seeds;
                    validate(cfg);
                }
                for (const auto& tr : run_experiment(cfg, threads)) {
                    csv << v << ',' << tr.seed << ',' << format_double(final_regret(tr)) << '\n';
                }
            }
            if (out.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream(out) << csv.str();
            }
            return kExitOk;
        }
        if (*fit) {
            std::vector<EpisodeTrace> traces;
            std::size_t T = 0;
            for (const auto& path : inputs) {
                std::ifstream in(path);
                traces.push_back(read_csv(in));
                T = T == 0 ? traces.back().size() : std::min(T, traces.back().size());
            }
            if (T <= first) {
                throw InputError("traces are shorter than the first grid round");
            }
            const auto grid = log_grid(first, T, points);
            std::vector<std::vector<double>> per_seed;
            for (const auto& tr : traces) {
                std::vector<double> col;
                for (std::size_t t : grid) {
                    const auto& row = tr.rows[t - 1];
                    if (column_name == "cum_regret") col.push_back(row.cum_regret);
                    else if (column_name == "inst_regret") col.push_back(row.inst_regret);
                    else if (column_name == "reward") col.push_back(row.reward);
                    else if (column_name == "lmin") col.push_back(row.lmin);
                    else if (column_name == "lmax") col.push_back(row.lmax);
                    else throw InputError("unknown column '" + column_name + "'");
                }
                per_seed.push_back(std::move(col));
            }
            const auto mean = aggregate(per_seed).mean;
            const std::vector<double> t(grid.begin(), grid.end());
            nlohmann::json result = nlohmann::json::array();
            for (const auto& name : models) {
                const auto f = fit_scaling(t, mean, fit_model_from_string(name));
                result.push_back({{"model", to_string(f.model)},
                                  {"coef", f.coef},
                                  {"offset", f.offset},
                                  {"exponent", f.exponent},
                                  {"residual", f.residual},
                                  {"points", f.points}});
            }
            if (out.empty()) {
                std::cout << result.dump(2) << "\n";
            } else {
                std::ofstream(out) << result.dump(2) << "\n";
            }
            return kExitOk;
        }
        if (*report) {
            if (only.empty()) {
                for (int id = 1; id <= kCriterionCount; ++id) {
                    only.push_back(id);
                }
            }
            AcceptanceOptions options;
            options.threads = threads;
            if (weight_beta > 0.0) {
                options.weight_beta_override = weight_beta;
            }
            std::ostringstream text;
            bool all = true;
            for (int id : only) {
                const auto r = run_criterion(id, options);
                const auto line = format_result(r);
                std::printf("%s\n", line.c_str());
                std::fflush(stdout);
                text << line << "\n";
                all = all && r.passed;
            }
            if (!out.empty()) {
                std::ofstream(out) << text.str();
            }
            return all ? kExitOk : kExitAcceptance;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
