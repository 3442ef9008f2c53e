#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pcitk {

enum class Arm : int { Control = 0, Treated = 1 };

enum class EndpointTransform : int { Identity = 0, Log = 1 };

struct PatientRecord {
    std::string id;
    Arm arm = Arm::Control;
    double time = 0.0;   // raw survival time, months; always > 0
    bool event = false;  // true = death observed, false = censored
    std::vector<double> predictors;
};

// Immutable after construction; safe to share across threads.
struct Dataset {
    std::vector<std::string> predictor_names;
    std::vector<PatientRecord> records;
    EndpointTransform transform = EndpointTransform::Identity;
    std::size_t dropped_rows = 0;  // incomplete/invalid rows skipped at load

    std::size_t predictor_count() const { return predictor_names.size(); }
    std::size_t arm_count(Arm a) const;
    std::size_t arm_uncensored_count(Arm a) const;

    // Endpoint value used by moment estimation (log of time when the log
    // transform is active). Survival analysis always uses the raw time.
    double endpoint_value(const PatientRecord& r) const;

    // Enforces the load-time contract: >= 2 records per arm, unique ids,
    // consistent predictor vector lengths. Throws on violation.
    void check() const;
};

struct CsvSchema {
    std::string id_column = "id";
    std::string arm_column = "arm";
    std::string time_column = "time";
    std::string event_column = "event";
    // Empty means: every column not mapped above is a predictor, in header order.
    std::vector<std::string> predictor_columns;
};

Dataset load_csv(const std::string& path, const CsvSchema& schema, EndpointTransform transform);
Dataset parse_csv(const std::string& text, const CsvSchema& schema, EndpointTransform transform);

// Report-only: per-arm counts, per-column ranges, degenerate columns and the
// n >= p + 2 sufficiency flags. Never throws.
nlohmann::json validation_report(const Dataset& ds);

CsvSchema csv_schema_from_json(const nlohmann::json& j);

}  // namespace pcitk
