#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "dataset.hpp"

namespace pcitk {

// Seeded generator with fixed, documented transforms so the same seed
// produces the same stream on every standards-conforming build:
// mt19937_64, 53-bit uniforms, polar method normals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Full joint-normal world for (Y0, Y1, S) at a known correlation, used to
// generate ground-truthed trials.
struct SimulationSpec {
    double mu0 = 0.0, mu1 = 0.0;
    double var0 = 1.0, var1 = 1.0;
    double true_rho = 0.0;
    Eigen::VectorXd muS;
    Eigen::MatrixXd SigmaS;
    Eigen::VectorXd cov0S, cov1S;
    std::size_t n = 0;
    double censoring_rate = 0.0;  // in [0, 1)
    std::uint64_t seed = 0;
    EndpointTransform transform = EndpointTransform::Identity;
    std::vector<std::string> predictor_names;  // default S1..Sp

    std::size_t p() const { return static_cast<std::size_t>(muS.size()); }
    void check() const;  // shapes, rates, PSD of the implied joint covariance

    // Joint covariance of (Y0, Y1, S) at true_rho.
    Eigen::MatrixXd joint_covariance() const;
    // Analytic PCI of the full predictor set at a correlation.
    double analytic_pci(double rho) const;
};

struct SimulationOutput {
    std::string csv;           // id, arm, time, event, predictors
    nlohmann::json sidecar;    // latent y0, y1, delta per patient
};

// Per patient: draw (Y0, Y1, S), flip a fair coin for the arm, reveal only
// the assigned arm's outcome as the time column (inverse-transforming when
// the log endpoint is configured), then apply independent censoring: with
// probability censoring_rate the patient is censored at a uniform fraction
// of the latent time.
SimulationOutput simulate(const SimulationSpec& spec);

SimulationSpec simulation_spec_from_json(const nlohmann::json& j);
nlohmann::json simulation_spec_to_json(const SimulationSpec& spec);

}  // namespace pcitk
