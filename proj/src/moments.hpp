#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace pcitk {

struct Dataset;

// Tolerances shared by the moment and causal layers.
inline constexpr double kPdTolerance = 1e-10;          // min-eigenvalue guard
inline constexpr double kConditionLimit = 1e12;        // collinearity limit
inline constexpr double kRoundoffClamp = 1e-9;         // admissible clamp magnitude

// Every identifiable first/second moment of (Y0, Y1, S). The correlation
// between Y0 and Y1 is not identifiable and lives in the sensitivity grid.
struct MomentEstimates {
    double mu0 = 0.0;  // mean endpoint, control arm
    double mu1 = 0.0;  // mean endpoint, treated arm
    double var0 = 0.0;
    double var1 = 0.0;
    Eigen::VectorXd muS;       // pooled predictor means
    Eigen::MatrixXd SigmaS;    // pooled predictor covariance (arm-mean centered)
    Eigen::VectorXd cov0S;     // Cov(Y0, S), control arm
    Eigen::VectorXd cov1S;     // Cov(Y1, S), treated arm
    std::size_t n0 = 0;        // uncensored rows used, control arm
    std::size_t n1 = 0;        // uncensored rows used, treated arm
    std::vector<std::string> predictor_names;

    std::size_t p() const { return predictor_names.size(); }
    void check() const;  // symmetry, positive definiteness, shape agreement
};

// Unbiased within-arm endpoint moments (n-1 denominators, each arm's own
// means); predictor covariance pooled across arms with per-arm centering.
// Censored records are excluded. Permutation invariant: rows are reduced in
// a canonical (arm, id) order, so equal datasets give bit-identical results.
MomentEstimates estimate_moments(const Dataset& ds);

nlohmann::json moments_to_json(const MomentEstimates& m);
MomentEstimates moments_from_json(const nlohmann::json& j);

}  // namespace pcitk
