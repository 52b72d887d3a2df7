#include "sqn/covariance.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sqn {

namespace {

Eigen::Matrix4d symplectic_form() {
    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    J(0, 1) = 1.0;
    J(1, 0) = -1.0;
    J(2, 3) = 1.0;
    J(3, 2) = -1.0;
    return J;
}

// Quadrature transform of the sideband -> S/A modal change; involutory.
Eigen::Matrix4d sa_transform() {
    Eigen::Matrix4d R;
    const double r = 1.0 / std::sqrt(2.0);
    R << r, 0, r, 0,
         0, r, 0, r,
         r, 0, -r, 0,
         0, r, 0, -r;
    return R;
}

}  // namespace

PhysicalityReport validate_covariance(const Matrix4& V) {
    if (!V.allFinite())
        throw std::invalid_argument("validate_covariance: non-finite entries");

    PhysicalityReport report;
    report.symmetry_defect = (V - V.transpose()).cwiseAbs().maxCoeff();

    const Matrix4 sym = 0.5 * (V + V.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix4> es(sym);
    report.min_eigenvalue = es.eigenvalues().minCoeff();

    Eigen::Matrix4cd uncertainty = sym.cast<std::complex<double>>();
    uncertainty += std::complex<double>(0.0, 1.0) * symplectic_form().cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> esc(uncertainty);
    report.min_uncertainty_eigenvalue = esc.eigenvalues().minCoeff();

    report.pass = report.symmetry_defect <= PhysicalityReport::kTolerance &&
                  report.min_uncertainty_eigenvalue >= -PhysicalityReport::kTolerance;
    return report;
}

Matrix4 basis_change(BasisDirection, const Matrix4& V) {
    const PhysicalityReport report = validate_covariance(V);
    if (!report.pass) {
        std::ostringstream os;
        os << "basis_change: unphysical covariance (symmetry defect " << report.symmetry_defect
           << ", min eig(V+iJ) " << report.min_uncertainty_eigenvalue << ")";
        throw std::invalid_argument(os.str());
    }
    const Eigen::Matrix4d R = sa_transform();
    return R * V * R.transpose();
}

Matrix4 symmetric_covariance_pattern(double alpha, double beta, double gamma, double delta) {
    Matrix4 V;
    V << alpha, gamma, delta, 0,
         gamma, beta, 0, delta,
         delta, 0, beta, -gamma,
         0, delta, -gamma, alpha;
    return V;
}

Matrix4 symmetric_covariance(double alpha, double beta, double gamma, double delta) {
    const Matrix4 V = symmetric_covariance_pattern(alpha, beta, gamma, delta);
    const PhysicalityReport report = validate_covariance(V);
    if (!report.pass) {
        std::ostringstream os;
        os << "symmetric_covariance: unphysical parameters (alpha=" << alpha << ", beta=" << beta
           << ", gamma=" << gamma << ", delta=" << delta << "); min eig(V)=" << report.min_eigenvalue
           << ", min eig(V+iJ)=" << report.min_uncertainty_eigenvalue;
        throw std::invalid_argument(os.str());
    }
    return V;
}

}  // namespace sqn
