#include "moments.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dataset.hpp"
#include "errors.hpp"

namespace pcitk {

void MomentEstimates::check() const {
    const auto np = static_cast<Eigen::Index>(p());
    if (muS.size() != np || cov0S.size() != np || cov1S.size() != np ||
        SigmaS.rows() != np || SigmaS.cols() != np)
        throw SchemaError("moment estimates have inconsistent dimensions");
    if (!(var0 > 0.0) || !(var1 > 0.0))
        throw DataError("non-positive endpoint variance");
    if (!SigmaS.isApprox(SigmaS.transpose(), 1e-12))
        throw DataError("predictor covariance is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(SigmaS, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > kPdTolerance) || hi / lo > kConditionLimit) {
        // Name the columns loading on the near-null direction.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ev(SigmaS);
        Eigen::VectorXd v = ev.eigenvectors().col(0).cwiseAbs();
        const double vmax = v.maxCoeff();
        std::string cols;
        for (Eigen::Index j = 0; j < v.size(); ++j) {
            if (v[j] > 0.1 * vmax) {
                if (!cols.empty()) cols += ", ";
                cols += predictor_names[static_cast<std::size_t>(j)];
            }
        }
        throw DataError("predictor covariance is singular or ill-conditioned (min eigenvalue " +
                        std::to_string(lo) + "); collinear columns: " + cols);
    }
}

MomentEstimates estimate_moments(const Dataset& ds) {
    const std::size_t p = ds.predictor_count();
    if (p == 0) throw SchemaError("dataset has no predictors");

    // Canonical reduction order makes the estimator exactly permutation
    // invariant, not just up to floating-point reassociation.
    std::vector<std::size_t> order;
    order.reserve(ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i)
        if (ds.records[i].event) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = ds.records[a];
        const auto& rb = ds.records[b];
        if (ra.arm != rb.arm) return ra.arm < rb.arm;
        return ra.id < rb.id;
    });

    std::vector<std::size_t> idx0, idx1;
    for (std::size_t i : order)
        (ds.records[i].arm == Arm::Control ? idx0 : idx1).push_back(i);

    const std::size_t n0 = idx0.size(), n1 = idx1.size();
    if (n0 < p + 2 || n1 < p + 2)
        throw DataError("insufficient uncensored rows for moment estimation: need >= " +
                        std::to_string(p + 2) + " per arm, have control=" + std::to_string(n0) +
                        ", treated=" + std::to_string(n1));

    const auto pi = static_cast<Eigen::Index>(p);
    auto arm_stats = [&](const std::vector<std::size_t>& idx, double& mu, double& var,
                         Eigen::VectorXd& mS, Eigen::VectorXd& covYS) {
        const double n = static_cast<double>(idx.size());
        mu = 0.0;
        mS = Eigen::VectorXd::Zero(pi);
        for (std::size_t i : idx) {
            mu += ds.endpoint_value(ds.records[i]);
            for (Eigen::Index j = 0; j < pi; ++j)
                mS[j] += ds.records[i].predictors[static_cast<std::size_t>(j)];
        }
        mu /= n;
        mS /= n;
        var = 0.0;
        covYS = Eigen::VectorXd::Zero(pi);
        for (std::size_t i : idx) {
            const double dy = ds.endpoint_value(ds.records[i]) - mu;
            var += dy * dy;
            for (Eigen::Index j = 0; j < pi; ++j)
                covYS[j] += dy * (ds.records[i].predictors[static_cast<std::size_t>(j)] - mS[j]);
        }
        var /= (n - 1.0);
        covYS /= (n - 1.0);
    };

    MomentEstimates m;
    m.predictor_names = ds.predictor_names;
    m.n0 = n0;
    m.n1 = n1;

    Eigen::VectorXd mS0, mS1;
    arm_stats(idx0, m.mu0, m.var0, mS0, m.cov0S);
    arm_stats(idx1, m.mu1, m.var1, mS1, m.cov1S);

    // Pooled predictor mean over all used rows; pooled covariance with
    // per-arm centering (predictors are pre-treatment, arms randomized).
    m.muS = (static_cast<double>(n0) * mS0 + static_cast<double>(n1) * mS1) /
            static_cast<double>(n0 + n1);

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(pi, pi);
    Eigen::VectorXd dev(pi);
    auto accumulate = [&](const std::vector<std::size_t>& idx, const Eigen::VectorXd& center) {
        for (std::size_t i : idx) {
            for (Eigen::Index j = 0; j < pi; ++j)
                dev[j] = ds.records[i].predictors[static_cast<std::size_t>(j)] - center[j];
            scatter.selfadjointView<Eigen::Lower>().rankUpdate(dev, 1.0);
        }
    };
    accumulate(idx0, mS0);
    accumulate(idx1, mS1);
    m.SigmaS = scatter.selfadjointView<Eigen::Lower>();
    m.SigmaS /= static_cast<double>(n0 + n1 - 2);

    m.check();
    return m;
}

nlohmann::json moments_to_json(const MomentEstimates& m) {
    nlohmann::json j;
    j["mu0"] = m.mu0;
    j["mu1"] = m.mu1;
    j["var0"] = m.var0;
    j["var1"] = m.var1;
    j["muS"] = std::vector<double>(m.muS.data(), m.muS.data() + m.muS.size());
    nlohmann::json sigma = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.SigmaS.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.SigmaS.cols(); ++c) row.push_back(m.SigmaS(r, c));
        sigma.push_back(std::move(row));
    }
    j["SigmaS"] = std::move(sigma);
    j["cov0S"] = std::vector<double>(m.cov0S.data(), m.cov0S.data() + m.cov0S.size());
    j["cov1S"] = std::vector<double>(m.cov1S.data(), m.cov1S.data() + m.cov1S.size());
    j["n0"] = m.n0;
    j["n1"] = m.n1;
    j["predictor_names"] = m.predictor_names;
    return j;
}

MomentEstimates moments_from_json(const nlohmann::json& j) {
    MomentEstimates m;
    try {
        m.mu0 = j.at("mu0").get<double>();
        m.mu1 = j.at("mu1").get<double>();
        m.var0 = j.at("var0").get<double>();
        m.var1 = j.at("var1").get<double>();
        m.n0 = j.at("n0").get<std::size_t>();
        m.n1 = j.at("n1").get<std::size_t>();
        m.predictor_names = j.at("predictor_names").get<std::vector<std::string>>();

        const auto muS = j.at("muS").get<std::vector<double>>();
        const auto c0 = j.at("cov0S").get<std::vector<double>>();
        const auto c1 = j.at("cov1S").get<std::vector<double>>();
        const auto& sig = j.at("SigmaS");
        const auto p = static_cast<Eigen::Index>(m.predictor_names.size());
        m.muS = Eigen::Map<const Eigen::VectorXd>(muS.data(), static_cast<Eigen::Index>(muS.size()));
        m.cov0S = Eigen::Map<const Eigen::VectorXd>(c0.data(), static_cast<Eigen::Index>(c0.size()));
        m.cov1S = Eigen::Map<const Eigen::VectorXd>(c1.data(), static_cast<Eigen::Index>(c1.size()));
        m.SigmaS.resize(p, p);
        if (static_cast<Eigen::Index>(sig.size()) != p)
            throw SchemaError("SigmaS row count does not match predictor_names");
        for (Eigen::Index r = 0; r < p; ++r) {
            const auto row = sig.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
            if (static_cast<Eigen::Index>(row.size()) != p)
                throw SchemaError("SigmaS is not square");
            for (Eigen::Index c = 0; c < p; ++c) m.SigmaS(r, c) = row[static_cast<std::size_t>(c)];
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed moment JSON: ") + e.what());
    }
    m.check();
    return m;
}

}  // namespace pcitk
