// Two-mode covariance matrices over the quadrature order
// (p_s, q_s, p_a, q_a), shot-noise units (vacuum variance 1), with the
// commutation convention [p, q] = 2i.
#pragma once

#include <Eigen/Dense>

namespace sqn {

using Matrix4 = Eigen::Matrix4d;

struct PhysicalityReport {
    double symmetry_defect = 0.0;  // max |V - V^T|
    double min_eigenvalue = 0.0;   // of V
    double min_uncertainty_eigenvalue = 0.0;  // of V + iJ
    bool pass = false;
    static constexpr double kTolerance = 1e-9;
};

// Symmetry defect plus eigenvalue checks of V and of the Hermitian
// uncertainty matrix V + iJ.  Throws on non-finite entries.
PhysicalityReport validate_covariance(const Matrix4& V);

enum class BasisDirection {
    SidebandsToSA,  // (+Omega, -Omega) -> (S, A)
    SAToSidebands,
};

// Orthogonal symplectic congruence induced by
// a_s = (a_+ + a_-)/sqrt2, a_a = (a_+ - a_-)/sqrt2.  The transform is
// involutory, so the two directions apply the same congruence; they are
// mutually inverse.  Rejects unphysical input.
Matrix4 basis_change(BasisDirection direction, const Matrix4& V);

struct SymmetricCovariance {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.0;
    double delta = 0.0;
};

// Expands (alpha, beta, gamma, delta) into the stationary two-mode form
//
//   [ alpha  gamma  delta    0   ]
//   [ gamma  beta     0    delta ]
//   [ delta   0     beta  -gamma ]
//   [   0   delta  -gamma  alpha ]
//
// and validates it; throws std::invalid_argument carrying the
// physicality numbers when the result is unphysical.
Matrix4 symmetric_covariance(double alpha, double beta, double gamma, double delta);

inline Matrix4 symmetric_covariance(const SymmetricCovariance& p) {
    return symmetric_covariance(p.alpha, p.beta, p.gamma, p.delta);
}

// Same expansion without the physicality gate; used where the linearity
// of downstream maps in (alpha, beta, gamma, delta) is exploited.
Matrix4 symmetric_covariance_pattern(double alpha, double beta, double gamma, double delta);

}  // namespace sqn
