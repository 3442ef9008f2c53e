#include "survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "dataset.hpp"
#include "errors.hpp"
#include "responders.hpp"

namespace pcitk {

KmCurve km_estimate(std::span<const double> times, std::span<const bool> events) {
    if (times.empty()) throw InvalidArgument("Kaplan-Meier needs at least one observation");
    if (times.size() != events.size())
        throw InvalidArgument("times and event flags differ in length");
    for (double t : times)
        if (!(t > 0.0)) throw InvalidArgument("survival times must be positive");

    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (times[a] != times[b]) return times[a] < times[b];
        return events[a] > events[b];  // deaths before censorings at ties
    });

    KmCurve km;
    km.n = times.size();
    double s = 1.0;
    std::size_t at_risk = times.size();
    std::size_t i = 0;
    while (i < order.size()) {
        const double t = times[order[i]];
        std::size_t deaths = 0, censored = 0;
        while (i < order.size() && times[order[i]] == t) {
            if (events[order[i]]) ++deaths; else ++censored;
            ++i;
        }
        if (deaths > 0) {
            s *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
            km.event_times.push_back(t);
            km.survival.push_back(s);
            km.at_risk.push_back(at_risk);
        }
        at_risk -= deaths + censored;
    }
    return km;
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw InvalidArgument("gamma_q requires a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // Series for P(a, x); Q = 1 - P.
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Continued fraction for Q(a, x), modified Lentz.
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int n = 1; n < 500; ++n) {
        const double an = -n * (n - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-17) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

double chi_square1_upper_tail(double x) {
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5, 0.5 * x);
}

LogRankResult log_rank(std::span<const double> t1, std::span<const bool> e1,
                       std::span<const double> t2, std::span<const bool> e2) {
    if (t1.empty() || t2.empty()) throw InvalidArgument("log-rank needs two non-empty groups");
    if (t1.size() != e1.size() || t2.size() != e2.size())
        throw InvalidArgument("times and event flags differ in length");

    struct Obs { double t; bool event; int group; };
    std::vector<Obs> obs;
    obs.reserve(t1.size() + t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i) obs.push_back({t1[i], e1[i], 0});
    for (std::size_t i = 0; i < t2.size(); ++i) obs.push_back({t2[i], e2[i], 1});
    std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.t < b.t; });

    bool any_event = std::any_of(obs.begin(), obs.end(), [](const Obs& o) { return o.event; });
    if (!any_event) throw DataError("log-rank is degenerate: no events in either group");

    double at_risk[2] = {static_cast<double>(t1.size()), static_cast<double>(t2.size())};
    LogRankResult res;
    double variance = 0.0;

    std::size_t i = 0;
    while (i < obs.size()) {
        const double t = obs[i].t;
        double deaths[2] = {0.0, 0.0};
        double removed[2] = {0.0, 0.0};
        while (i < obs.size() && obs[i].t == t) {
            if (obs[i].event) deaths[obs[i].group] += 1.0;
            removed[obs[i].group] += 1.0;
            ++i;
        }
        const double d = deaths[0] + deaths[1];
        const double n = at_risk[0] + at_risk[1];
        if (d > 0.0 && n > 0.0) {
            res.observed[0] += deaths[0];
            res.observed[1] += deaths[1];
            res.expected[0] += d * at_risk[0] / n;
            res.expected[1] += d * at_risk[1] / n;
            if (n > 1.0)
                variance += d * (at_risk[0] / n) * (at_risk[1] / n) * (n - d) / (n - 1.0);
        }
        at_risk[0] -= removed[0];
        at_risk[1] -= removed[1];
    }

    if (!(variance > 0.0))
        throw DataError("log-rank is degenerate: zero variance over the shared risk sets");
    const double diff = res.observed[0] - res.expected[0];
    res.statistic = diff * diff / variance;
    res.p_value = chi_square1_upper_tail(res.statistic);
    return res;
}

nlohmann::json km_to_json(const KmCurve& km) {
    return {{"n", km.n},
            {"event_times", km.event_times},
            {"survival", km.survival},
            {"at_risk", km.at_risk}};
}

nlohmann::json log_rank_to_json(const LogRankResult& lr) {
    return {{"statistic", lr.statistic},
            {"p_value", lr.p_value},
            {"observed", {lr.observed[0], lr.observed[1]}},
            {"expected", {lr.expected[0], lr.expected[1]}}};
}

namespace {
constexpr double kLongTermMonths = 24.0;

struct ArmData {
    std::vector<double> times;
    std::vector<bool> events;
    std::size_t long_term = 0;
};
}  // namespace

nlohmann::json subgroup_audit(const Dataset& ds, const std::vector<SuccessCurve>& curves) {
    if (curves.size() != ds.records.size())
        throw InvalidArgument("success curves do not align with the dataset records");

    // [class][arm]
    ArmData cells[3][2];
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const auto& rec = ds.records[i];
        const int c = static_cast<int>(curves[i].classification);
        const int a = rec.arm == Arm::Control ? 0 : 1;
        cells[c][a].times.push_back(rec.time);  // raw times, censored included
        cells[c][a].events.push_back(rec.event);
        if (rec.time > kLongTermMonths) ++cells[c][a].long_term;
    }

    nlohmann::json out;
    out["long_term_threshold_months"] = kLongTermMonths;
    nlohmann::json warnings = nlohmann::json::array();

    auto describe = [&](ResponderClass cls, bool with_test) {
        const int c = static_cast<int>(cls);
        const ArmData& ctl = cells[c][0];
        const ArmData& trt = cells[c][1];
        nlohmann::json j;
        j["n_control"] = ctl.times.size();
        j["n_treated"] = trt.times.size();
        j["long_term_survivors"] = {{"control", ctl.long_term}, {"treated", trt.long_term}};
        if (!with_test) return j;

        j["km_control"] = ctl.times.empty() ? nlohmann::json(nullptr)
                                            : km_to_json(km_estimate(ctl.times, ctl.events));
        j["km_treated"] = trt.times.empty() ? nlohmann::json(nullptr)
                                            : km_to_json(km_estimate(trt.times, trt.events));
        if (ctl.times.empty() || trt.times.empty()) {
            j["log_rank"] = nullptr;
            warnings.push_back(std::string(responder_class_name(cls)) +
                               " responders: one arm has no patients; comparison skipped");
        } else {
            try {
                j["log_rank"] = log_rank_to_json(
                    log_rank(trt.times, trt.events, ctl.times, ctl.events));
            } catch (const Error& e) {
                j["log_rank"] = nullptr;
                warnings.push_back(std::string(responder_class_name(cls)) + " responders: " +
                                   e.what());
            }
        }
        return j;
    };

    out["classes"]["good"] = describe(ResponderClass::Good, true);
    out["classes"]["bad"] = describe(ResponderClass::Bad, true);
    out["classes"]["rare"] = describe(ResponderClass::Rare, false);
    out["log_rank_groups"] = {"treated", "control"};
    out["warnings"] = std::move(warnings);
    return out;
}

}  // namespace pcitk
