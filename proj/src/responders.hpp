#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "causal.hpp"

namespace pcitk {

struct Dataset;

enum class ResponderClass : int { Good = 0, Rare = 1, Bad = 2 };

const char* responder_class_name(ResponderClass c);

// Probability of treatment success for one patient across the feasible
// grid. The paper-scale classification uses strict inequalities: a single
// probability at exactly 0.5 makes the patient Rare.
struct SuccessCurve {
    std::string patient_id;
    std::vector<double> rho;          // feasible grid values
    std::vector<double> prob_by_rho;  // aligned with rho
    ResponderClass classification = ResponderClass::Rare;
    double mean_delta = 0.0;
};

double normal_cdf(double x);

// P(Y1 - Y0 > 0 | S = s) at one correlation. A degenerate conditional sd
// collapses to the limiting value 1 / 0.5 / 0 by the sign of the mean.
double success_probability(const MomentEstimates& m, const std::vector<std::size_t>& subset,
                           const Eigen::VectorXd& s, double rho);

ResponderClass classify(const std::vector<double>& probs);

SuccessCurve score_patient(const MomentEstimates& m, const SubsetStats& st, const FeasibleSet& fs,
                           const Eigen::VectorXd& s, const std::string& id);

// One curve per record, in dataset order. Parallelizes over patients when
// workers > 1; output is identical for any worker count.
std::vector<SuccessCurve> score_cohort(const MomentEstimates& m,
                                       const std::vector<std::size_t>& subset, const Dataset& ds,
                                       const RhoGrid& grid, int workers = 1);

}  // namespace pcitk
