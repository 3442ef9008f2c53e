#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "text_util.hpp"

namespace pcitk {

namespace {

// 0/1 flags (arm, event). Anything else counts as unparseable.
bool parse_flag(const std::string& cell, int& out) {
    double v;
    if (!parse_double(cell, v)) return false;
    if (v == 0.0) { out = 0; return true; }
    if (v == 1.0) { out = 1; return true; }
    return false;
}

}  // namespace

std::size_t Dataset::arm_count(Arm a) const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [&](const PatientRecord& r) { return r.arm == a; }));
}

std::size_t Dataset::arm_uncensored_count(Arm a) const {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(), [&](const PatientRecord& r) { return r.arm == a && r.event; }));
}

double Dataset::endpoint_value(const PatientRecord& r) const {
    return transform == EndpointTransform::Log ? std::log(r.time) : r.time;
}

void Dataset::check() const {
    if (predictor_names.empty()) throw SchemaError("dataset declares no predictor columns");
    std::unordered_set<std::string> names(predictor_names.begin(), predictor_names.end());
    if (names.size() != predictor_names.size())
        throw SchemaError("duplicate predictor column name");
    std::unordered_set<std::string> ids;
    for (const auto& r : records) {
        if (r.predictors.size() != predictor_names.size())
            throw SchemaError("record '" + r.id + "' has a predictor vector of wrong length");
        if (!(r.time > 0.0)) throw SchemaError("record '" + r.id + "' has non-positive time");
        if (!ids.insert(r.id).second)
            throw SchemaError("duplicate patient id '" + r.id + "'");
    }
    if (arm_count(Arm::Control) < 2 || arm_count(Arm::Treated) < 2)
        throw DataError("fewer than 2 usable rows in one arm (control=" +
                        std::to_string(arm_count(Arm::Control)) +
                        ", treated=" + std::to_string(arm_count(Arm::Treated)) + ")");
}

Dataset parse_csv(const std::string& text, const CsvSchema& schema, EndpointTransform transform) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty CSV input");

    const std::vector<std::string> raw_header = split_csv_line(line);
    std::vector<std::string> header(raw_header.size());
    std::unordered_map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < raw_header.size(); ++i) {
        header[i] = trim(raw_header[i]);
        col_index.emplace(header[i], i);
    }

    auto require = [&](const std::string& name) -> std::size_t {
        auto it = col_index.find(name);
        if (it == col_index.end()) throw SchemaError("required column '" + name + "' not found in header");
        return it->second;
    };

    const std::size_t c_id = require(schema.id_column);
    const std::size_t c_arm = require(schema.arm_column);
    const std::size_t c_time = require(schema.time_column);
    const std::size_t c_event = require(schema.event_column);

    std::vector<std::string> pred_names = schema.predictor_columns;
    if (pred_names.empty()) {
        for (const auto& h : header) {
            if (h != schema.id_column && h != schema.arm_column && h != schema.time_column &&
                h != schema.event_column && !h.empty())
                pred_names.push_back(h);
        }
    }
    if (pred_names.empty()) throw SchemaError("no predictor columns in header");

    std::vector<std::size_t> pred_cols;
    pred_cols.reserve(pred_names.size());
    for (const auto& name : pred_names) pred_cols.push_back(require(name));

    Dataset ds;
    ds.predictor_names = pred_names;
    ds.transform = transform;

    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        auto cell = [&](std::size_t c) -> std::string {
            return c < cells.size() ? cells[c] : std::string();
        };

        PatientRecord rec;
        rec.id = trim(cell(c_id));
        int arm_flag = 0, event_flag = 0;
        bool ok = !rec.id.empty() && parse_flag(cell(c_arm), arm_flag) &&
                  parse_flag(cell(c_event), event_flag) && parse_double(cell(c_time), rec.time) &&
                  rec.time > 0.0;
        if (ok) {
            rec.arm = arm_flag == 1 ? Arm::Treated : Arm::Control;
            rec.event = event_flag == 1;
            rec.predictors.reserve(pred_cols.size());
            for (std::size_t c : pred_cols) {
                double v;
                if (!parse_double(cell(c), v)) { ok = false; break; }
                rec.predictors.push_back(v);
            }
        }
        if (!ok) {
            ++ds.dropped_rows;  // complete-case rule: any bad mapped cell drops the row
            continue;
        }
        ds.records.push_back(std::move(rec));
    }

    ds.check();
    return ds;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema, EndpointTransform transform) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open CSV file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), schema, transform);
}

nlohmann::json validation_report(const Dataset& ds) {
    nlohmann::json rep;
    const std::size_t p = ds.predictor_count();
    const std::size_t n0 = ds.arm_count(Arm::Control), n1 = ds.arm_count(Arm::Treated);
    const std::size_t u0 = ds.arm_uncensored_count(Arm::Control);
    const std::size_t u1 = ds.arm_uncensored_count(Arm::Treated);

    rep["n"] = ds.records.size();
    rep["p"] = p;
    rep["dropped_rows"] = ds.dropped_rows;
    rep["arms"] = {
        {"control", {{"n", n0}, {"uncensored", u0}}},
        {"treated", {{"n", n1}, {"uncensored", u1}}},
    };
    // Moment estimation needs p + 2 uncensored rows per arm.
    rep["moments_sample_size_ok"] = {
        {"required_per_arm", p + 2},
        {"control", u0 >= p + 2},
        {"treated", u1 >= p + 2},
    };
    rep["endpoint_transform"] = ds.transform == EndpointTransform::Log ? "log" : "identity";
    rep["censored_excluded_from_moments"] = true;

    nlohmann::json cols = nlohmann::json::array();
    std::vector<std::string> constant_cols;
    for (std::size_t j = 0; j < p; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& r : ds.records) {
            lo = std::min(lo, r.predictors[j]);
            hi = std::max(hi, r.predictors[j]);
        }
        nlohmann::json c;
        c["name"] = ds.predictor_names[j];
        if (ds.records.empty()) {
            c["min"] = nullptr;
            c["max"] = nullptr;
            c["constant"] = false;
        } else {
            c["min"] = lo;
            c["max"] = hi;
            c["constant"] = (lo == hi);
            if (lo == hi) constant_cols.push_back(ds.predictor_names[j]);
        }
        cols.push_back(std::move(c));
    }
    rep["columns"] = std::move(cols);
    rep["constant_columns"] = constant_cols;

    double tlo = std::numeric_limits<double>::infinity();
    double thi = -std::numeric_limits<double>::infinity();
    for (const auto& r : ds.records) {
        tlo = std::min(tlo, r.time);
        thi = std::max(thi, r.time);
    }
    if (ds.records.empty()) {
        rep["time_range"] = nullptr;
    } else {
        rep["time_range"] = {{"min", tlo}, {"max", thi}};
    }
    return rep;
}

CsvSchema csv_schema_from_json(const nlohmann::json& j) {
    CsvSchema s;
    if (j.contains("id")) s.id_column = j.at("id").get<std::string>();
    if (j.contains("arm")) s.arm_column = j.at("arm").get<std::string>();
    if (j.contains("time")) s.time_column = j.at("time").get<std::string>();
    if (j.contains("event")) s.event_column = j.at("event").get<std::string>();
    if (j.contains("predictors")) s.predictor_columns = j.at("predictors").get<std::vector<std::string>>();
    return s;
}

}  // namespace pcitk
