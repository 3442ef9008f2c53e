#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "moments.hpp"

namespace pcitk {

// Sensitivity grid over the unidentifiable correlation between the two
// potential outcomes: values k*step for k in [-K, K], all inside (-1, 1).
struct RhoGrid {
    double step = 0.01;
    std::vector<double> values;
};

RhoGrid make_rho_grid(double step = 0.01);

// Per-subset quantities reused by every downstream evaluation: restricted
// covariance blocks, the solved direction Sigma_A^-1 * d_A and the three
// quadratic forms that drive feasibility.
struct SubsetStats {
    std::vector<std::size_t> indices;  // sorted, unique
    std::uint64_t mask = 0;
    Eigen::MatrixXd Sigma;
    Eigen::VectorXd cov0, cov1, d, Sinv_d, mu;
    double explained = 0.0;  // d' Sigma^-1 d
    double q00 = 0.0, q01 = 0.0, q11 = 0.0;
};

SubsetStats subset_stats(const MomentEstimates& m, const std::vector<std::size_t>& subset);

// Variance of the individual effect Y1 - Y0 at a given correlation.
inline double sigma_delta_sq(const MomentEstimates& m, double rho) {
    return m.var0 + m.var1 - 2.0 * rho * std::sqrt(m.var0 * m.var1);
}

double min_eigenvalue(const Eigen::MatrixXd& sym);

// Joint covariance of (Y0, Y1, S_A) at the given correlation.
Eigen::MatrixXd joint_covariance(const MomentEstimates& m, const SubsetStats& st, double rho);

bool rho_feasible(const MomentEstimates& m, const SubsetStats& st, double rho);

// Contiguous run of feasible grid indices (the PSD region of an affine
// matrix family is convex, so the feasible set is an interval).
struct FeasibleSet {
    std::vector<double> grid;  // full grid values
    int first = 0;
    int last = -1;  // inclusive; empty when last < first

    bool empty() const { return last < first; }
    std::size_t count() const { return empty() ? 0 : static_cast<std::size_t>(last - first + 1); }
    std::vector<double> rhos() const;
    double rho_lo() const { return grid[static_cast<std::size_t>(first)]; }
    double rho_hi() const { return grid[static_cast<std::size_t>(last)]; }
};

// Never throws; empty set is a legal return (used by the model search).
FeasibleSet scan_feasible(const MomentEstimates& m, const SubsetStats& st, const RhoGrid& grid);

// Throws InfeasibleError (with the eigenvalues at rho = 0 as diagnostics)
// when no grid point is feasible.
FeasibleSet feasible_rhos(const MomentEstimates& m, const SubsetStats& st, const RhoGrid& grid);
FeasibleSet feasible_rhos(const MomentEstimates& m, const std::vector<std::size_t>& subset,
                          const RhoGrid& grid);

// Prediction accuracy scale on the mean PCI; boundaries are inclusive on
// the left class (0.3 -> Negligible, 0.5 -> Low, ...).
enum class Accuracy : int { Negligible = 0, Low = 1, Moderate = 2, High = 3, VeryHigh = 4 };

Accuracy classify_accuracy(double pci_mean);
const char* accuracy_name(Accuracy a);

struct PciProfile {
    std::vector<std::size_t> subset;
    std::uint64_t mask = 0;
    std::vector<double> rho;  // feasible grid values
    std::vector<double> pci;  // aligned with rho
    double pci_min = 0.0, pci_mean = 0.0, pci_max = 0.0;
    Accuracy accuracy = Accuracy::Negligible;
};

// PCI at one correlation: explained(A) / sigma_delta^2(rho), clamped to
// [0, 1] only against round-off (beyond kRoundoffClamp it is an error).
double compute_pci(const MomentEstimates& m, const std::vector<std::size_t>& subset, double rho);

PciProfile pci_profile(const MomentEstimates& m, const std::vector<std::size_t>& subset,
                       const RhoGrid& grid);

// Conditional law of the individual effect given the patient's predictors.
// The conditional mean is free of rho; only the spread depends on it.
struct ConditionalDelta {
    double mean_delta = 0.0;
    std::vector<double> rho;        // feasible grid values
    std::vector<double> var_delta;  // sigma_delta^2(rho)
    std::vector<double> sd_given_s; // sqrt(var_delta - explained)
};

ConditionalDelta conditional_delta(const MomentEstimates& m, const std::vector<std::size_t>& subset,
                                   const Eigen::VectorXd& s, const RhoGrid& grid);

// Internal building blocks shared with the search and responder layers so
// every path computes bit-identical values.
double pci_value(const MomentEstimates& m, const SubsetStats& st, double rho);
double conditional_mean_delta(const MomentEstimates& m, const SubsetStats& st,
                              const Eigen::VectorXd& s);
double conditional_sd(const MomentEstimates& m, const SubsetStats& st, double rho);

}  // namespace pcitk
