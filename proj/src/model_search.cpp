#include "model_search.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace pcitk {

namespace {

constexpr std::size_t kMaxSubsets = std::size_t{1} << 24;

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Appends all masks over p bits with exactly k bits set, ascending.
void gosper_masks(int p, int k, std::vector<std::uint64_t>& out) {
    if (k == 0 || k > p) return;
    std::uint64_t v = (std::uint64_t{1} << k) - 1;
    const std::uint64_t limit = std::uint64_t{1} << p;
    while (v < limit) {
        out.push_back(v);
        const std::uint64_t c = v & (~v + 1);
        const std::uint64_t r = v + c;
        if (r >= limit) break;
        v = (((r ^ v) >> 2) / c) | r;
    }
}

}  // namespace

std::vector<std::size_t> subset_from_mask(std::uint64_t mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; mask != 0; ++i, mask >>= 1)
        if (mask & 1) idx.push_back(i);
    return idx;
}

std::string subset_label(std::uint64_t mask, const std::vector<std::string>& names) {
    std::string s;
    for (std::size_t i : subset_from_mask(mask)) {
        if (!s.empty()) s += "+";
        s += i < names.size() ? names[i] : ("x" + std::to_string(i));
    }
    return s;
}

SearchResult enumerate_and_score(const MomentEstimates& m, const RhoGrid& grid,
                                 const SearchOptions& opts) {
    const int p = static_cast<int>(m.p());
    if (p < 1) throw InvalidArgument("no predictors to search over");
    if (opts.max_cardinality < 0) throw InvalidArgument("negative cardinality cap");
    const int cap = opts.max_cardinality == 0 ? p : std::min(opts.max_cardinality, p);
    if (opts.max_cardinality == 0 && p > 24)
        throw InvalidArgument("p=" + std::to_string(p) +
                              " predictors give 2^p-1 subsets; exhaustive search is capped at "
                              "p=24 — set a max cardinality to proceed");

    // Masks in ascending order. The uncapped case is the contiguous range
    // 1..2^p-1 and needs no materialized list.
    std::vector<std::uint64_t> capped_masks;
    std::size_t total = 0;
    if (opts.max_cardinality == 0) {
        total = (std::size_t{1} << p) - 1;
    } else {
        for (int k = 1; k <= cap; ++k) gosper_masks(p, k, capped_masks);
        std::sort(capped_masks.begin(), capped_masks.end());
        total = capped_masks.size();
    }
    if (total > kMaxSubsets)
        throw InvalidArgument("subset count " + std::to_string(total) +
                              " exceeds the exhaustive-search capacity; lower the cardinality cap");

    SearchResult sr;
    sr.grid = grid;
    sr.threshold = opts.threshold;
    sr.predictor_names = m.predictor_names;
    sr.champion_metric = opts.champion_metric;
    sr.table.resize(total);
    sr.subset_count = total;

    auto mask_at = [&](std::size_t i) -> std::uint64_t {
        return opts.max_cardinality == 0 ? static_cast<std::uint64_t>(i + 1) : capped_masks[i];
    };

    auto score_one = [&](std::size_t i) {
        const std::uint64_t mask = mask_at(i);
        const SubsetStats st = subset_stats(m, subset_from_mask(mask));
        SubsetScore row;
        row.mask = mask;
        row.size = static_cast<int>(st.indices.size());
        const FeasibleSet fs = scan_feasible(m, st, grid);
        if (fs.empty()) {
            row.feasible = false;
        } else {
            row.feasible = true;
            row.rho_lo = fs.rho_lo();
            row.rho_hi = fs.rho_hi();
            double lo = 1.0, hi = 0.0, sum = 0.0;
            for (int g = fs.first; g <= fs.last; ++g) {
                const double v = pci_value(m, st, fs.grid[static_cast<std::size_t>(g)]);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                sum += v;
            }
            row.pci_min = lo;
            row.pci_max = hi;
            row.pci_mean = sum / static_cast<double>(fs.count());
            row.accuracy = classify_accuracy(row.pci_mean);
        }
        sr.table[i] = row;
    };

    int workers = opts.workers > 0 ? opts.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, 64);

    if (workers == 1 || total < 1024) {
        for (std::size_t i = 0; i < total; ++i) score_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::exception_ptr first_error;
        std::mutex error_mu;
        constexpr std::size_t kBlock = 64;
        auto worker = [&]() {
            try {
                while (!failed.load(std::memory_order_relaxed)) {
                    const std::size_t b = next.fetch_add(kBlock);
                    if (b >= total) break;
                    const std::size_t e = std::min(total, b + kBlock);
                    for (std::size_t i = b; i < e; ++i) score_one(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lk(error_mu);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    // Champions: serial pass in ascending mask order. Ties on the metric
    // keep the earlier (smaller) mask.
    std::vector<int> champ_idx(static_cast<std::size_t>(p), -1);
    for (std::size_t i = 0; i < total; ++i) {
        const SubsetScore& row = sr.table[i];
        if (!row.feasible) {
            ++sr.infeasible_count;
            continue;
        }
        const double metric = opts.champion_metric == SearchOptions::Metric::Mean ? row.pci_mean
                                                                                  : row.pci_min;
        const auto slot = static_cast<std::size_t>(row.size - 1);
        if (champ_idx[slot] < 0) {
            champ_idx[slot] = static_cast<int>(i);
        } else {
            const SubsetScore& cur = sr.table[static_cast<std::size_t>(champ_idx[slot])];
            const double cur_metric = opts.champion_metric == SearchOptions::Metric::Mean
                                          ? cur.pci_mean
                                          : cur.pci_min;
            if (metric > cur_metric) champ_idx[slot] = static_cast<int>(i);
        }
    }

    sr.champions.resize(static_cast<std::size_t>(p));
    for (std::size_t k = 0; k < static_cast<std::size_t>(p); ++k) {
        if (champ_idx[k] >= 0) {
            const std::uint64_t mask = sr.table[static_cast<std::size_t>(champ_idx[k])].mask;
            sr.champions[k] = pci_profile(m, subset_from_mask(mask), grid);
        }
    }

    sr.selected = select_parsimonious(sr, opts.threshold);
    return sr;
}

std::optional<PciProfile> select_parsimonious(const SearchResult& sr, double threshold) {
    for (const auto& champ : sr.champions)
        if (champ && champ->pci_min > threshold) return champ;
    return std::nullopt;
}

nlohmann::json search_table_json(const SearchResult& sr) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : sr.table) {
        nlohmann::json r;
        r["mask"] = row.mask;
        r["size"] = row.size;
        r["predictors"] = subset_label(row.mask, sr.predictor_names);
        r["feasible"] = row.feasible;
        if (row.feasible) {
            r["pci_min"] = row.pci_min;
            r["pci_mean"] = row.pci_mean;
            r["pci_max"] = row.pci_max;
            r["accuracy"] = accuracy_name(row.accuracy);
            r["rho_lo"] = row.rho_lo;
            r["rho_hi"] = row.rho_hi;
        } else {
            r["pci_min"] = nullptr;
            r["pci_mean"] = nullptr;
            r["pci_max"] = nullptr;
            r["accuracy"] = nullptr;
            r["rho_lo"] = nullptr;
            r["rho_hi"] = nullptr;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string search_table_csv(const SearchResult& sr) {
    std::string out = "mask,size,predictors,feasible,pci_min,pci_mean,pci_max,accuracy,rho_lo,rho_hi\n";
    for (const auto& row : sr.table) {
        out += std::to_string(row.mask);
        out += ',';
        out += std::to_string(row.size);
        out += ',';
        out += subset_label(row.mask, sr.predictor_names);
        out += ',';
        out += row.feasible ? "1" : "0";
        if (row.feasible) {
            out += ',' + fmt_g17(row.pci_min) + ',' + fmt_g17(row.pci_mean) + ',' +
                   fmt_g17(row.pci_max) + ',' + accuracy_name(row.accuracy) + ',' +
                   fmt_g17(row.rho_lo) + ',' + fmt_g17(row.rho_hi);
        } else {
            out += ",,,,,";
        }
        out += '\n';
    }
    return out;
}

}  // namespace pcitk
