#include "qmab/trace.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "qmab/errors.hpp"

namespace qmab::harness {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw InputError("read_csv: malformed number '" + s + "'");
    }
    return v;
}

}  // namespace

void EpisodeTrace::append(std::string action, double reward, double inst_regret, double lmin, double lmax,
                          std::optional<bool> coverage) {
    TraceRow row;
    row.round = rows.size() + 1;
    row.action = std::move(action);
    row.reward = reward;
    row.inst_regret = inst_regret;
    row.cum_regret = (rows.empty() ? 0.0 : rows.back().cum_regret) + inst_regret;
    row.lmin = lmin;
    row.lmax = lmax;
    row.coverage = coverage;
    rows.push_back(std::move(row));
}

std::vector<double> EpisodeTrace::cumulative_regret() const {
    std::vector<double> c;
    c.reserve(rows.size());
    for (const auto& r : rows) {
        c.push_back(r.cum_regret);
    }
    return c;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_action(const matcore::Vec& a) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) {
            s.push_back(';');
        }
        s += format_double(a[i]);
    }
    return s;
}

std::string format_action(std::size_t arm) {
    return std::to_string(arm);
}

void write_csv(const EpisodeTrace& trace, std::ostream& out) {
    out << kTraceHeader << '\n';
    for (const auto& r : trace.rows) {
        out << r.round << ',' << r.action << ',' << format_double(r.reward) << ',' << format_double(r.inst_regret)
            << ',' << format_double(r.cum_regret) << ',' << format_double(r.lmin) << ',' << format_double(r.lmax)
            << ',';
        if (r.coverage) {
            out << (*r.coverage ? '1' : '0');
        }
        out << '\n';
    }
}

EpisodeTrace read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) {
        throw InputError("read_csv: missing or unexpected header");
    }
    EpisodeTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 8) {
            throw InputError("read_csv: expected 8 fields, got " + std::to_string(f.size()));
        }
        TraceRow r;
        r.round = static_cast<std::size_t>(std::stoull(f[0]));
        r.action = f[1];
        r.reward = parse_double(f[2]);
        r.inst_regret = parse_double(f[3]);
        r.cum_regret = parse_double(f[4]);
        r.lmin = parse_double(f[5]);
        r.lmax = parse_double(f[6]);
        if (f[7] == "1") {
            r.coverage = true;
        } else if (f[7] == "0") {
            r.coverage = false;
        } else if (!f[7].empty()) {
            throw InputError("read_csv: coverage must be 0, 1 or empty");
        }
        trace.rows.push_back(std::move(r));
    }
    return trace;
}

}  // namespace qmab::harness
