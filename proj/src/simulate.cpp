#include "simulate.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "moments.hpp"

namespace pcitk {

namespace {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Eigen::MatrixXd SimulationSpec::joint_covariance() const {
    const auto k = static_cast<Eigen::Index>(p());
    Eigen::MatrixXd C(k + 2, k + 2);
    C(0, 0) = var0;
    C(1, 1) = var1;
    C(0, 1) = C(1, 0) = true_rho * std::sqrt(var0 * var1);
    for (Eigen::Index a = 0; a < k; ++a) {
        C(0, a + 2) = C(a + 2, 0) = cov0S[a];
        C(1, a + 2) = C(a + 2, 1) = cov1S[a];
        for (Eigen::Index b = 0; b < k; ++b) C(a + 2, b + 2) = SigmaS(a, b);
    }
    return C;
}

double SimulationSpec::analytic_pci(double rho) const {
    const Eigen::VectorXd d = cov1S - cov0S;
    const double explained = d.dot(SigmaS.ldlt().solve(d));
    const double s2 = var0 + var1 - 2.0 * rho * std::sqrt(var0 * var1);
    return explained / s2;
}

void SimulationSpec::check() const {
    const auto k = static_cast<Eigen::Index>(p());
    if (k < 1) throw SchemaError("simulation spec declares no predictors");
    if (SigmaS.rows() != k || SigmaS.cols() != k || cov0S.size() != k || cov1S.size() != k)
        throw SchemaError("simulation spec has inconsistent dimensions");
    if (!(var0 > 0.0) || !(var1 > 0.0)) throw SchemaError("simulation spec needs positive variances");
    if (!(true_rho >= -1.0 && true_rho <= 1.0)) throw SchemaError("true_rho must lie in [-1, 1]");
    if (!(censoring_rate >= 0.0 && censoring_rate < 1.0))
        throw SchemaError("censoring_rate must lie in [0, 1)");
    if (n < 1) throw SchemaError("simulation spec needs n >= 1");
    if (!predictor_names.empty() && predictor_names.size() != p())
        throw SchemaError("predictor_names length does not match muS");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(joint_covariance(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPdTolerance)
        throw SchemaError("implied joint covariance is not positive semidefinite at true_rho (min eigenvalue " +
                          std::to_string(es.eigenvalues().minCoeff()) + ")");
}

SimulationOutput simulate(const SimulationSpec& spec) {
    spec.check();
    const auto k = static_cast<Eigen::Index>(spec.p());
    const Eigen::Index dim = k + 2;

    std::vector<std::string> names = spec.predictor_names;
    if (names.empty())
        for (Eigen::Index j = 0; j < k; ++j) names.push_back("S" + std::to_string(j + 1));

    // PSD factor via eigendecomposition; tiny negative eigenvalues from
    // round-off are clamped to zero.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.joint_covariance());
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd L = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();

    Eigen::VectorXd mean(dim);
    mean[0] = spec.mu0;
    mean[1] = spec.mu1;
    for (Eigen::Index j = 0; j < k; ++j) mean[j + 2] = spec.muS[j];

    Rng rng(spec.seed);
    int id_width = 1;
    for (std::size_t v = spec.n; v >= 10; v /= 10) ++id_width;

    std::string csv = "id,arm,time,event";
    for (const auto& nm : names) csv += "," + nm;
    csv += '\n';

    nlohmann::json patients = nlohmann::json::array();
    Eigen::VectorXd z(dim);

    for (std::size_t i = 0; i < spec.n; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) z[j] = rng.normal();
        const Eigen::VectorXd x = mean + L * z;
        const double y0 = x[0], y1 = x[1];

        const bool treated = rng.uniform() < 0.5;
        const double latent = treated ? y1 : y0;
        const double raw_time =
            spec.transform == EndpointTransform::Log ? std::exp(latent) : latent;

        const bool censored = rng.uniform() < spec.censoring_rate;
        double time = raw_time;
        if (censored) {
            const double frac = std::max(rng.uniform(), 0x1.0p-53);
            time = raw_time * frac;
        }

        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "P%0*zu", id_width, i + 1);

        csv += idbuf;
        csv += ',';
        csv += treated ? '1' : '0';
        csv += ',';
        csv += fmt_g17(time);
        csv += ',';
        csv += censored ? '0' : '1';
        for (Eigen::Index j = 0; j < k; ++j) csv += ',' + fmt_g17(x[j + 2]);
        csv += '\n';

        patients.push_back({{"id", idbuf},
                            {"arm", treated ? 1 : 0},
                            {"y0", y0},
                            {"y1", y1},
                            {"delta", y1 - y0},
                            {"censored", censored}});
    }

    SimulationOutput out;
    out.csv = std::move(csv);
    out.sidecar = {{"schema", "pcitk-truth/1"},
                   {"spec", simulation_spec_to_json(spec)},
                   {"patients", std::move(patients)}};
    return out;
}

nlohmann::json simulation_spec_to_json(const SimulationSpec& spec) {
    nlohmann::json j;
    j["mu0"] = spec.mu0;
    j["mu1"] = spec.mu1;
    j["var0"] = spec.var0;
    j["var1"] = spec.var1;
    j["true_rho"] = spec.true_rho;
    j["muS"] = std::vector<double>(spec.muS.data(), spec.muS.data() + spec.muS.size());
    nlohmann::json sigma = nlohmann::json::array();
    for (Eigen::Index r = 0; r < spec.SigmaS.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < spec.SigmaS.cols(); ++c) row.push_back(spec.SigmaS(r, c));
        sigma.push_back(std::move(row));
    }
    j["SigmaS"] = std::move(sigma);
    j["cov0S"] = std::vector<double>(spec.cov0S.data(), spec.cov0S.data() + spec.cov0S.size());
    j["cov1S"] = std::vector<double>(spec.cov1S.data(), spec.cov1S.data() + spec.cov1S.size());
    j["n"] = spec.n;
    j["censoring_rate"] = spec.censoring_rate;
    j["seed"] = spec.seed;
    j["transform"] = spec.transform == EndpointTransform::Log ? "log" : "identity";
    if (!spec.predictor_names.empty()) j["predictor_names"] = spec.predictor_names;
    return j;
}

SimulationSpec simulation_spec_from_json(const nlohmann::json& j) {
    SimulationSpec spec;
    try {
        spec.mu0 = j.at("mu0").get<double>();
        spec.mu1 = j.at("mu1").get<double>();
        spec.var0 = j.at("var0").get<double>();
        spec.var1 = j.at("var1").get<double>();
        spec.true_rho = j.at("true_rho").get<double>();
        spec.n = j.at("n").get<std::size_t>();
        spec.censoring_rate = j.value("censoring_rate", 0.0);
        spec.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("transform")) {
            const std::string t = j.at("transform").get<std::string>();
            if (t == "log") spec.transform = EndpointTransform::Log;
            else if (t == "identity") spec.transform = EndpointTransform::Identity;
            else throw SchemaError("unknown transform '" + t + "'");
        }
        if (j.contains("predictor_names"))
            spec.predictor_names = j.at("predictor_names").get<std::vector<std::string>>();

        const auto muS = j.at("muS").get<std::vector<double>>();
        const auto c0 = j.at("cov0S").get<std::vector<double>>();
        const auto c1 = j.at("cov1S").get<std::vector<double>>();
        spec.muS = Eigen::Map<const Eigen::VectorXd>(muS.data(), static_cast<Eigen::Index>(muS.size()));
        spec.cov0S = Eigen::Map<const Eigen::VectorXd>(c0.data(), static_cast<Eigen::Index>(c0.size()));
        spec.cov1S = Eigen::Map<const Eigen::VectorXd>(c1.data(), static_cast<Eigen::Index>(c1.size()));
        const auto& sig = j.at("SigmaS");
        const auto p = static_cast<Eigen::Index>(muS.size());
        spec.SigmaS.resize(p, p);
        for (Eigen::Index r = 0; r < p; ++r) {
            const auto row = sig.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
            if (static_cast<Eigen::Index>(row.size()) != p) throw SchemaError("SigmaS is not square");
            for (Eigen::Index c = 0; c < p; ++c) spec.SigmaS(r, c) = row[static_cast<std::size_t>(c)];
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed simulation spec: ") + e.what());
    }
    spec.check();
    return spec;
}

}  // namespace pcitk
