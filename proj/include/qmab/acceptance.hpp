#ifndef QMAB_ACCEPTANCE_HPP
#define QMAB_ACCEPTANCE_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

// Desk-scale statistical checks of the library's headline behaviour. Each
// criterion runs its full seed budget and reports the measured statistic next
// to the threshold it was compared against.
namespace qmab::harness {

inline constexpr int kCriterionCount = 12;

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    unsigned threads = 1;
    // Sensitivity runs only: replaces beta inside the VN and VVN batch weight.
    std::optional<double> weight_beta_override;
};

// Throws ContractError for an id outside 1..kCriterionCount.
CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& options = {});

// "PASS  3  online infidelity rate: <detail> (1.2 s)"
std::string format_result(const CriterionResult& r);

}  // namespace qmab::harness

#endif
