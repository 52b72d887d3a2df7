// Linear measurement models mapping the four quadratures
// (p_s, q_s, p_a, q_a) to the two phase-locked photocurrent components
// (I_cos, I_sin).
#pragma once

#include <functional>

#include <Eigen/Dense>

#include "sqn/component_stats.hpp"
#include "sqn/covariance.hpp"

namespace sqn {

using MeasurementMatrix = Eigen::Matrix<double, 2, 4>;

// Detuning (resonator-bandwidth units) -> 2x4 coefficient matrix.
using RdCoefficientFn = std::function<MeasurementMatrix(double)>;

// Approximate dispersive profile used by the default resonator-detection
// model.  Row 1 probes the S mode at the rotated angle theta(Delta) =
// 2 atan(2 Delta); row 2 is the matching A-mode quadrature mixed with an
// S-mode cross term by chi(Delta) = (pi/4)/(1 + Delta^2), which peaks on
// resonance and vanishes far off it.  This profile is a stand-in for the
// exact resonator coefficients and is fully overridable.
MeasurementMatrix default_rd_coefficients(double detuning);

class MeasurementModel {
public:
    // Homodyne detection at LO phase phi: I_cos probes the S mode at
    // angle phi, I_sin the A mode at phi + pi/2 (disjoint rows).
    static MeasurementModel hd(double phi);

    // Resonator detection at the given detuning; rows may couple S and A.
    static MeasurementModel rd(double detuning, RdCoefficientFn fn = default_rd_coefficients);

    static MeasurementModel explicit_matrix(const MeasurementMatrix& m);

    enum class Kind { HD, RD, Explicit };
    Kind kind() const { return kind_; }
    double hd_phase() const { return phi_; }
    double rd_detuning() const { return detuning_; }
    const MeasurementMatrix& matrix() const { return matrix_; }

    // Re-evaluates the RD coefficient function at a new detuning; HD and
    // explicit models reject this.
    MeasurementModel at_detuning(double detuning) const;

private:
    MeasurementModel() = default;

    Kind kind_ = Kind::Explicit;
    double phi_ = 0.0;
    double detuning_ = 0.0;
    MeasurementMatrix matrix_ = MeasurementMatrix::Zero();
    RdCoefficientFn rd_fn_;
};

// (s_cos, s_sin, c) of the measured components: Sigma = M V M^T.  The
// result is Gaussian-flagged, so all joint moments follow by Isserlis
// closure.  Rejects unphysical covariances.
ComponentStats predicted_component_stats(const Matrix4& V, const MeasurementModel& M);

}  // namespace sqn
