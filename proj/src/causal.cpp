#include "causal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "errors.hpp"

namespace pcitk {

RhoGrid make_rho_grid(double step) {
    if (!(step > 0.0) || step > 0.5)
        throw InvalidArgument("rho step must lie in (0, 0.5], got " + std::to_string(step));
    const int k_max = static_cast<int>(std::ceil(1.0 / step)) - 1;
    RhoGrid g;
    g.step = step;
    g.values.reserve(static_cast<std::size_t>(2 * k_max + 1));
    for (int k = -k_max; k <= k_max; ++k) g.values.push_back(k * step);
    return g;
}

SubsetStats subset_stats(const MomentEstimates& m, const std::vector<std::size_t>& subset) {
    if (subset.empty()) throw InvalidArgument("predictor subset is empty");
    SubsetStats st;
    st.indices = subset;
    std::sort(st.indices.begin(), st.indices.end());
    st.indices.erase(std::unique(st.indices.begin(), st.indices.end()), st.indices.end());
    for (std::size_t i : st.indices) {
        if (i >= m.p())
            throw InvalidArgument("subset index " + std::to_string(i) + " out of range (p=" +
                                  std::to_string(m.p()) + ")");
        st.mask |= (std::uint64_t{1} << i);
    }

    const auto k = static_cast<Eigen::Index>(st.indices.size());
    st.Sigma.resize(k, k);
    st.cov0.resize(k);
    st.cov1.resize(k);
    st.mu.resize(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        const auto ia = static_cast<Eigen::Index>(st.indices[static_cast<std::size_t>(a)]);
        st.cov0[a] = m.cov0S[ia];
        st.cov1[a] = m.cov1S[ia];
        st.mu[a] = m.muS[ia];
        for (Eigen::Index b = 0; b < k; ++b)
            st.Sigma(a, b) = m.SigmaS(ia, static_cast<Eigen::Index>(st.indices[static_cast<std::size_t>(b)]));
    }
    st.d = st.cov1 - st.cov0;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(st.Sigma);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw DataError("restricted predictor covariance is not positive definite");
    st.Sinv_d = ldlt.solve(st.d);
    const Eigen::VectorXd Sinv_c0 = ldlt.solve(st.cov0);
    const Eigen::VectorXd Sinv_c1 = ldlt.solve(st.cov1);
    st.q00 = st.cov0.dot(Sinv_c0);
    st.q01 = st.cov0.dot(Sinv_c1);
    st.q11 = st.cov1.dot(Sinv_c1);
    st.explained = std::max(0.0, st.d.dot(st.Sinv_d));
    return st;
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd joint_covariance(const MomentEstimates& m, const SubsetStats& st, double rho) {
    const auto k = static_cast<Eigen::Index>(st.indices.size());
    Eigen::MatrixXd M(k + 2, k + 2);
    const double g = std::sqrt(m.var0 * m.var1);
    M(0, 0) = m.var0;
    M(1, 1) = m.var1;
    M(0, 1) = M(1, 0) = rho * g;
    for (Eigen::Index a = 0; a < k; ++a) {
        M(0, a + 2) = M(a + 2, 0) = st.cov0[a];
        M(1, a + 2) = M(a + 2, 1) = st.cov1[a];
        for (Eigen::Index b = 0; b < k; ++b) M(a + 2, b + 2) = st.Sigma(a, b);
    }
    return M;
}

bool rho_feasible(const MomentEstimates& m, const SubsetStats& st, double rho) {
    return min_eigenvalue(joint_covariance(m, st, rho)) >= -kPdTolerance;
}

std::vector<double> FeasibleSet::rhos() const {
    if (empty()) return {};
    return std::vector<double>(grid.begin() + first, grid.begin() + last + 1);
}

namespace {

// Lazy evaluation of the minimum eigenvalue along the grid. lambda_min of
// an affine matrix family is concave in the parameter, so the feasible set
// {rho : lambda_min >= -tol} is an interval and both of its ends can be
// located by searching instead of scanning all grid points.
class EigScan {
public:
    EigScan(const MomentEstimates& m, const SubsetStats& st, const std::vector<double>& grid)
        : grid_(grid), M_(joint_covariance(m, st, 0.0)), g_(std::sqrt(m.var0 * m.var1)),
          memo_(grid.size(), 0.0), known_(grid.size(), false) {}

    double operator()(int i) {
        const auto u = static_cast<std::size_t>(i);
        if (!known_[u]) {
            M_(0, 1) = M_(1, 0) = grid_[u] * g_;
            es_.compute(M_, Eigen::EigenvaluesOnly);
            memo_[u] = es_.eigenvalues().minCoeff();
            known_[u] = true;
        }
        return memo_[u];
    }

private:
    const std::vector<double>& grid_;
    Eigen::MatrixXd M_;
    double g_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_;
    std::vector<double> memo_;
    std::vector<bool> known_;
};

}  // namespace

FeasibleSet scan_feasible(const MomentEstimates& m, const SubsetStats& st, const RhoGrid& grid) {
    FeasibleSet fs;
    fs.grid = grid.values;
    const int n = static_cast<int>(grid.values.size());
    EigScan f(m, st, grid.values);

    // Ternary search for the argmax of the concave sequence f.
    int lo = 0, hi = n - 1;
    while (hi - lo > 2) {
        const int m1 = lo + (hi - lo) / 3;
        const int m2 = hi - (hi - lo) / 3;
        const double f1 = f(m1), f2 = f(m2);
        if (f1 < f2) {
            lo = m1 + 1;
        } else if (f1 > f2) {
            hi = m2 - 1;
        } else {
            lo = m1;
            hi = m2;
        }
    }
    int best = lo;
    for (int i = lo + 1; i <= hi; ++i)
        if (f(i) > f(best)) best = i;

    if (f(best) < -kPdTolerance) return fs;  // empty

    // f is nondecreasing up to the argmax and nonincreasing after it, so
    // the two boundary searches are plain binary searches.
    int a = 0, b = best;
    while (a < b) {
        const int mid = a + (b - a) / 2;
        if (f(mid) >= -kPdTolerance) b = mid; else a = mid + 1;
    }
    fs.first = a;

    a = best;
    b = n - 1;
    while (a < b) {
        const int mid = a + (b - a + 1) / 2;
        if (f(mid) >= -kPdTolerance) a = mid; else b = mid - 1;
    }
    fs.last = a;
    return fs;
}

FeasibleSet feasible_rhos(const MomentEstimates& m, const SubsetStats& st, const RhoGrid& grid) {
    FeasibleSet fs = scan_feasible(m, st, grid);
    if (fs.empty()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(joint_covariance(m, st, 0.0),
                                                          Eigen::EigenvaluesOnly);
        std::ostringstream msg;
        msg << "no grid correlation yields a positive semidefinite joint covariance; "
               "eigenvalues at rho=0:";
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            msg << ' ' << es.eigenvalues()[i];
        throw InfeasibleError(msg.str());
    }
    return fs;
}

FeasibleSet feasible_rhos(const MomentEstimates& m, const std::vector<std::size_t>& subset,
                          const RhoGrid& grid) {
    return feasible_rhos(m, subset_stats(m, subset), grid);
}

Accuracy classify_accuracy(double pci_mean) {
    if (pci_mean <= 0.3) return Accuracy::Negligible;
    if (pci_mean <= 0.5) return Accuracy::Low;
    if (pci_mean <= 0.7) return Accuracy::Moderate;
    if (pci_mean <= 0.9) return Accuracy::High;
    return Accuracy::VeryHigh;
}

const char* accuracy_name(Accuracy a) {
    switch (a) {
        case Accuracy::Negligible: return "negligible";
        case Accuracy::Low: return "low";
        case Accuracy::Moderate: return "moderate";
        case Accuracy::High: return "high";
        case Accuracy::VeryHigh: return "very_high";
    }
    return "unknown";
}

double pci_value(const MomentEstimates& m, const SubsetStats& st, double rho) {
    const double s2 = sigma_delta_sq(m, rho);
    if (!(s2 > 0.0))
        throw InfeasibleError("variance of the individual effect is non-positive at rho=" +
                              std::to_string(rho));
    double v = st.explained / s2;
    if (v > 1.0) {
        if (v > 1.0 + kRoundoffClamp)
            throw DataError("PCI exceeds 1 beyond the round-off clamp (value " +
                            std::to_string(v) + ")");
        v = 1.0;
    }
    return v;
}

double compute_pci(const MomentEstimates& m, const std::vector<std::size_t>& subset, double rho) {
    if (!(rho >= -1.0 && rho <= 1.0))
        throw InvalidArgument("rho must lie in [-1, 1]");
    const SubsetStats st = subset_stats(m, subset);
    if (!rho_feasible(m, st, rho))
        throw InfeasibleError("rho=" + std::to_string(rho) +
                              " is infeasible for this subset (joint covariance not PSD)");
    return pci_value(m, st, rho);
}

PciProfile pci_profile(const MomentEstimates& m, const std::vector<std::size_t>& subset,
                       const RhoGrid& grid) {
    const SubsetStats st = subset_stats(m, subset);
    const FeasibleSet fs = feasible_rhos(m, st, grid);

    PciProfile prof;
    prof.subset = st.indices;
    prof.mask = st.mask;
    prof.rho = fs.rhos();
    prof.pci.reserve(prof.rho.size());
    double lo = 1.0, hi = 0.0, sum = 0.0;
    for (double r : prof.rho) {
        const double v = pci_value(m, st, r);
        prof.pci.push_back(v);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    prof.pci_min = lo;
    prof.pci_max = hi;
    prof.pci_mean = sum / static_cast<double>(prof.pci.size());
    prof.accuracy = classify_accuracy(prof.pci_mean);
    return prof;
}

double conditional_mean_delta(const MomentEstimates& m, const SubsetStats& st,
                              const Eigen::VectorXd& s) {
    const auto k = static_cast<Eigen::Index>(st.indices.size());
    double dot = 0.0;
    for (Eigen::Index a = 0; a < k; ++a) {
        const auto ia = static_cast<Eigen::Index>(st.indices[static_cast<std::size_t>(a)]);
        if (ia >= s.size()) throw InvalidArgument("predictor vector too short for subset");
        dot += st.Sinv_d[a] * (s[ia] - st.mu[a]);
    }
    return (m.mu1 - m.mu0) + dot;
}

double conditional_sd(const MomentEstimates& m, const SubsetStats& st, double rho) {
    const double s2 = sigma_delta_sq(m, rho);
    (void)pci_value(m, st, rho);  // enforces the round-off guard
    return std::sqrt(std::max(0.0, s2 - st.explained));
}

ConditionalDelta conditional_delta(const MomentEstimates& m, const std::vector<std::size_t>& subset,
                                   const Eigen::VectorXd& s, const RhoGrid& grid) {
    const SubsetStats st = subset_stats(m, subset);
    const FeasibleSet fs = feasible_rhos(m, st, grid);

    ConditionalDelta cd;
    cd.mean_delta = conditional_mean_delta(m, st, s);
    cd.rho = fs.rhos();
    cd.var_delta.reserve(cd.rho.size());
    cd.sd_given_s.reserve(cd.rho.size());
    for (double r : cd.rho) {
        cd.var_delta.push_back(sigma_delta_sq(m, r));
        cd.sd_given_s.push_back(conditional_sd(m, st, r));
    }
    return cd;
}

}  // namespace pcitk
