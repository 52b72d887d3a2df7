#include "sqn/measurement.hpp"

#include <cmath>
#include <stdexcept>

namespace sqn {

MeasurementMatrix default_rd_coefficients(double detuning) {
    const double theta = 2.0 * std::atan(2.0 * detuning);
    const double chi = (M_PI / 4.0) / (1.0 + detuning * detuning);
    const double ct = std::cos(theta), st = std::sin(theta);
    const double cx = std::cos(chi), sx = std::sin(chi);
    MeasurementMatrix m;
    m << ct, st, 0.0, 0.0,
         -sx * st, sx * ct, -cx * st, cx * ct;
    return m;
}

MeasurementModel MeasurementModel::hd(double phi) {
    MeasurementModel model;
    model.kind_ = Kind::HD;
    model.phi_ = phi;
    const double c = std::cos(phi), s = std::sin(phi);
    // Row 2 is the A-mode quadrature at phi + pi/2.
    model.matrix_ << c, s, 0.0, 0.0,
                     0.0, 0.0, -s, c;
    return model;
}

MeasurementModel MeasurementModel::rd(double detuning, RdCoefficientFn fn) {
    if (!fn)
        throw std::invalid_argument("MeasurementModel::rd: null coefficient function");
    MeasurementModel model;
    model.kind_ = Kind::RD;
    model.detuning_ = detuning;
    model.rd_fn_ = std::move(fn);
    model.matrix_ = model.rd_fn_(detuning);
    if (!model.matrix_.allFinite())
        throw std::invalid_argument("MeasurementModel::rd: coefficient function returned non-finite matrix");
    return model;
}

MeasurementModel MeasurementModel::explicit_matrix(const MeasurementMatrix& m) {
    if (!m.allFinite())
        throw std::invalid_argument("MeasurementModel::explicit_matrix: non-finite entries");
    MeasurementModel model;
    model.kind_ = Kind::Explicit;
    model.matrix_ = m;
    return model;
}

MeasurementModel MeasurementModel::at_detuning(double detuning) const {
    if (kind_ != Kind::RD)
        throw std::logic_error("MeasurementModel::at_detuning: only RD models are detuning-parametric");
    return rd(detuning, rd_fn_);
}

ComponentStats predicted_component_stats(const Matrix4& V, const MeasurementModel& M) {
    const PhysicalityReport report = validate_covariance(V);
    if (!report.pass)
        throw std::invalid_argument("predicted_component_stats: unphysical covariance");

    const Eigen::Matrix2d sigma = M.matrix() * V * M.matrix().transpose();
    const double var_cos = sigma(0, 0);
    const double var_sin = sigma(1, 1);
    const double s_cos = std::sqrt(std::max(0.0, var_cos));
    const double s_sin = std::sqrt(std::max(0.0, var_sin));
    double c = 0.0;
    if (s_cos > 0.0 && s_sin > 0.0) {
        c = sigma(0, 1) / (s_cos * s_sin);
        c = std::clamp(c, -1.0, 1.0);
    }
    return ComponentStats::gaussian(s_cos, s_sin, c);
}

}  // namespace sqn
