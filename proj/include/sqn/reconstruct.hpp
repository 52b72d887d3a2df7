// Least-squares reconstruction of the stationary covariance parameters
// (alpha, beta, gamma, delta) from per-setting variances of a scan,
// under the declared stationarity assumption.  The per-setting mixed
// variance is linear in the four parameters, so the fit is a weighted
// linear regression against the predicted coefficient functions.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqn/covariance.hpp"
#include "sqn/measurement.hpp"
#include "sqn/simulator.hpp"

namespace sqn {

enum class Technique { HD, RD };

struct ReconstructionOptions {
    std::size_t bootstrap_rounds = 200;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct PointFit {
    double setting = 0.0;
    double observed = 0.0;
    double std_error = 0.0;
    double predicted = 0.0;
};

struct ReconstructionResult {
    SymmetricCovariance params;
    // 4x4 parameter covariance (rows/cols alpha, beta, gamma, delta);
    // zero rows/cols for inaccessible parameters.
    Eigen::Matrix4d parameter_covariance = Eigen::Matrix4d::Zero();
    std::vector<std::string> inaccessible;  // e.g. {"delta"} for HD scans
    double chi_square = 0.0;
    std::size_t degrees_of_freedom = 0;
    double reduced_chi_square = 0.0;
    std::vector<PointFit> points;

    bool accessible(const std::string& name) const;
    double std_error(int param_index) const;
};

// Fits per-setting variances to the symmetric-covariance prediction.
// HD scans have a structurally zero delta column (delta flagged
// inaccessible); a scan with too few distinct settings throws with the
// unresolved directions named.
ReconstructionResult reconstruct_symmetric_covariance(
    const ScanResult& scan, Technique technique,
    const RdCoefficientFn& rd_fn = default_rd_coefficients,
    const ReconstructionOptions& options = {});

}  // namespace sqn
