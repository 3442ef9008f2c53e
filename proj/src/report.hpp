#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dataset.hpp"
#include "model_search.hpp"
#include "moments.hpp"
#include "responders.hpp"

namespace pcitk {

struct AnalysisConfig {
    std::string input_path;
    CsvSchema schema;
    EndpointTransform transform = EndpointTransform::Identity;
    double rho_step = 0.01;
    double threshold = 0.7;
    int max_cardinality = 0;  // 0 = none
    int workers = 0;          // 0 = hardware; never echoed into the report
    SearchOptions::Metric champion_metric = SearchOptions::Metric::Mean;

    void check() const;
};

AnalysisConfig analysis_config_from_json(const nlohmann::json& j);

// A fitted model: the moment estimates plus the chosen predictor subset.
// This is what the score subcommand consumes.
struct Model {
    MomentEstimates moments;
    std::vector<std::size_t> subset;
    double rho_step = 0.01;

    std::vector<std::string> subset_names() const;
};

nlohmann::json model_to_json(const MomentEstimates& m, const PciProfile& profile,
                             double rho_step, double threshold);
Model model_from_json(const nlohmann::json& j);

nlohmann::json curves_to_json(const std::vector<SuccessCurve>& curves,
                              const std::vector<std::string>& subset_names);
std::vector<SuccessCurve> curves_from_json(const nlohmann::json& j);

// Scoring entry points for external patients (CSV columns or name=value
// pairs matched to the model's predictor names).
std::vector<SuccessCurve> score_patients_csv(const Model& model, const std::string& csv_text);
SuccessCurve score_values(const Model& model, const nlohmann::json& values);

struct AnalyzeResult {
    nlohmann::json report;
    std::optional<nlohmann::json> model;
    nlohmann::json search_table;
    std::string search_csv;
    std::string fig_pci_by_size;
    std::string fig_success_curves;
    std::string fig_survival;
};

// load -> moments -> search -> select -> score cohort -> subgroup audit.
// Pure with respect to the filesystem except for reading the input CSV;
// output bytes depend only on (input bytes, config).
AnalyzeResult run_analyze(const AnalysisConfig& cfg);

// Writes report.json, search_table.{json,csv}, model.json (when a model
// was selected) and the three figure SVGs into out_dir.
void write_analyze_outputs(const AnalyzeResult& res, const std::string& out_dir);

}  // namespace pcitk
