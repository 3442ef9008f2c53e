#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pcitk {

struct SearchResult;
struct SuccessCurve;

// Self-contained SVG documents (no external assets), deterministic bytes.
std::string svg_pci_by_size(const SearchResult& sr);
std::string svg_success_curves(const std::vector<SuccessCurve>& curves);
std::string svg_survival_panels(const nlohmann::json& audit);

}  // namespace pcitk
