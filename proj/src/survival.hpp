#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pcitk {

struct Dataset;
struct SuccessCurve;

// Product-limit estimator. Step function, right-continuous; censored
// observations shrink risk sets but contribute no factor. Deaths are
// processed before censorings at tied times.
struct KmCurve {
    std::vector<double> event_times;    // strictly increasing, deaths only
    std::vector<double> survival;       // value just after each event time
    std::vector<std::size_t> at_risk;   // risk-set size at each event time
    std::size_t n = 0;
};

KmCurve km_estimate(std::span<const double> times, std::span<const bool> events);

struct LogRankResult {
    double statistic = 0.0;  // chi-square, 1 df
    double p_value = 1.0;
    double observed[2] = {0.0, 0.0};
    double expected[2] = {0.0, 0.0};
};

LogRankResult log_rank(std::span<const double> t1, std::span<const bool> e1,
                       std::span<const double> t2, std::span<const bool> e2);

// Upper tail of the chi-square(1) law via the regularized incomplete gamma
// function; absolute error below 1e-12.
double chi_square1_upper_tail(double x);
double gamma_q(double a, double x);

// Kaplan-Meier per arm inside each responder class, log-rank across arms
// for Good and Bad (Rare is reported descriptively). Control patients get
// their class from the same predictor model, so both arms are comparable
// within a class. Empty class-arm cells skip the comparison with a
// warning.
nlohmann::json subgroup_audit(const Dataset& ds, const std::vector<SuccessCurve>& curves);

nlohmann::json km_to_json(const KmCurve& km);
nlohmann::json log_rank_to_json(const LogRankResult& lr);

}  // namespace pcitk
