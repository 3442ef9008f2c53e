#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "causal.hpp"

namespace pcitk {

struct SearchOptions {
    double threshold = 0.7;        // parsimony rule: smallest size with champion pci_min above it
    int max_cardinality = 0;       // 0 = no cap (requires p <= 24)
    int workers = 0;               // 0 = hardware concurrency
    enum class Metric { Mean, Min } champion_metric = Metric::Mean;
};

// One table row per evaluated subset; curves are not stored (they are
// cheap to regenerate for the handful of champions).
struct SubsetScore {
    std::uint64_t mask = 0;
    int size = 0;
    bool feasible = false;
    double pci_min = 0.0, pci_mean = 0.0, pci_max = 0.0;
    Accuracy accuracy = Accuracy::Negligible;
    double rho_lo = 0.0, rho_hi = 0.0;  // feasible interval, valid when feasible
};

struct SearchResult {
    std::vector<SubsetScore> table;               // ascending mask
    std::vector<std::optional<PciProfile>> champions;  // index k-1 = best subset of size k
    std::optional<PciProfile> selected;
    double threshold = 0.7;
    std::size_t subset_count = 0;     // rows evaluated
    std::size_t infeasible_count = 0;
    RhoGrid grid;
    std::vector<std::string> predictor_names;
    SearchOptions::Metric champion_metric = SearchOptions::Metric::Mean;
};

std::vector<std::size_t> subset_from_mask(std::uint64_t mask);
std::string subset_label(std::uint64_t mask, const std::vector<std::string>& names);

// Scores every non-empty subset (up to the cardinality cap) on the grid.
// Subsets are independent; execution parallelizes over them and the result
// is bit-identical for any worker count.
SearchResult enumerate_and_score(const MomentEstimates& m, const RhoGrid& grid,
                                 const SearchOptions& opts = {});

// Smallest cardinality whose champion clears the threshold on its minimum
// PCI; absent when no champion qualifies.
std::optional<PciProfile> select_parsimonious(const SearchResult& sr, double threshold);

nlohmann::json search_table_json(const SearchResult& sr);
std::string search_table_csv(const SearchResult& sr);

}  // namespace pcitk
