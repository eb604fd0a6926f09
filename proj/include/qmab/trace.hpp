#ifndef QMAB_TRACE_HPP
#define QMAB_TRACE_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qmab/matcore.hpp"

namespace qmab::harness {

// One round. `action` is an arm index or the action components joined by ';'.
struct TraceRow {
    std::size_t round = 0;
    std::string action;
    double reward = 0.0;
    double inst_regret = 0.0;
    double cum_regret = 0.0;
    double lmin = 0.0;
    double lmax = 0.0;
    std::optional<bool> coverage;
};

struct EpisodeTrace {
    std::uint64_t seed = 0;
    std::vector<TraceRow> rows;
    // Per-round infidelity of the policy's estimate, when tracked.
    std::vector<double> infidelity;
    // Cumulative dissipation per round, for work-extraction runs.
    std::vector<double> dissipation;

    std::size_t size() const { return rows.size(); }
    void append(std::string action, double reward, double inst_regret, double lmin, double lmax,
                std::optional<bool> coverage);
    std::vector<double> cumulative_regret() const;
};

inline constexpr const char* kTraceHeader = "round,action,reward,inst_regret,cum_regret,lmin,lmax,coverage";

std::string format_double(double x);
std::string format_action(const matcore::Vec& a);
std::string format_action(std::size_t arm);

void write_csv(const EpisodeTrace& trace, std::ostream& out);
// Throws InputError on a malformed header or row.
EpisodeTrace read_csv(std::istream& in);

}  // namespace qmab::harness

#endif
