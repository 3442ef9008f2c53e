#include "responders.hpp"

#include <cmath>
#include <thread>

#include "dataset.hpp"
#include "errors.hpp"

namespace pcitk {

const char* responder_class_name(ResponderClass c) {
    switch (c) {
        case ResponderClass::Good: return "good";
        case ResponderClass::Rare: return "rare";
        case ResponderClass::Bad: return "bad";
    }
    return "unknown";
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

double success_prob_at(const MomentEstimates& m, const SubsetStats& st, double rho,
                       double mean_delta) {
    const double sd = conditional_sd(m, st, rho);
    if (sd == 0.0) return mean_delta > 0.0 ? 1.0 : (mean_delta < 0.0 ? 0.0 : 0.5);
    return normal_cdf(mean_delta / sd);
}

}  // namespace

double success_probability(const MomentEstimates& m, const std::vector<std::size_t>& subset,
                           const Eigen::VectorXd& s, double rho) {
    const SubsetStats st = subset_stats(m, subset);
    if (!rho_feasible(m, st, rho))
        throw InfeasibleError("rho=" + std::to_string(rho) + " is infeasible for this subset");
    return success_prob_at(m, st, rho, conditional_mean_delta(m, st, s));
}

ResponderClass classify(const std::vector<double>& probs) {
    if (probs.empty()) throw InvalidArgument("classification needs at least one feasible rho");
    bool all_above = true, all_below = true;
    for (double p : probs) {
        all_above = all_above && p > 0.5;
        all_below = all_below && p < 0.5;
    }
    if (all_above) return ResponderClass::Good;
    if (all_below) return ResponderClass::Bad;
    return ResponderClass::Rare;
}

SuccessCurve score_patient(const MomentEstimates& m, const SubsetStats& st, const FeasibleSet& fs,
                           const Eigen::VectorXd& s, const std::string& id) {
    SuccessCurve curve;
    curve.patient_id = id;
    curve.mean_delta = conditional_mean_delta(m, st, s);
    curve.rho = fs.rhos();
    curve.prob_by_rho.reserve(curve.rho.size());
    for (double r : curve.rho)
        curve.prob_by_rho.push_back(success_prob_at(m, st, r, curve.mean_delta));
    curve.classification = classify(curve.prob_by_rho);
    return curve;
}

std::vector<SuccessCurve> score_cohort(const MomentEstimates& m,
                                       const std::vector<std::size_t>& subset, const Dataset& ds,
                                       const RhoGrid& grid, int workers) {
    const SubsetStats st = subset_stats(m, subset);
    const FeasibleSet fs = feasible_rhos(m, st, grid);

    const std::size_t n = ds.records.size();
    std::vector<SuccessCurve> out(n);
    auto score_range = [&](std::size_t b, std::size_t e) {
        Eigen::VectorXd s(static_cast<Eigen::Index>(ds.predictor_count()));
        for (std::size_t i = b; i < e; ++i) {
            const auto& rec = ds.records[i];
            for (Eigen::Index j = 0; j < s.size(); ++j)
                s[j] = rec.predictors[static_cast<std::size_t>(j)];
            out[i] = score_patient(m, st, fs, s, rec.id);
        }
    };

    const int w = std::max(1, workers);
    if (w == 1 || n < 2) {
        score_range(0, n);
    } else {
        const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(w), n);
        std::vector<std::thread> pool;
        pool.reserve(nw);
        const std::size_t chunk = (n + nw - 1) / nw;
        for (std::size_t t = 0; t < nw; ++t) {
            const std::size_t b = t * chunk;
            const std::size_t e = std::min(n, b + chunk);
            if (b >= e) break;
            pool.emplace_back(score_range, b, e);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

}  // namespace pcitk
