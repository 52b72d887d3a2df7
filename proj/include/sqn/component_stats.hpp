// Second-order statistics of the phase-locked photocurrent components
// (cosine/sine), optionally carrying a table of higher joint central
// moments <dIcos^p dIsin^q>.  Everything is in shot-noise units.
#pragma once

#include <map>
#include <optional>
#include <utility>

namespace sqn {

// Central joint moment <X^p Y^q> of a zero-mean bivariate Gaussian with
// standard deviations (sx, sy) and normalized correlation c.  Closed-form
// Isserlis expansion; exact rational coefficients internally.
double gaussian_joint_moment(int p, int q, double sx, double sy, double c);

class ComponentStats {
public:
    // Gaussian-flagged stats: joint moments of any order are filled by
    // Gaussian closure on demand.
    static ComponentStats gaussian(double s_cos, double s_sin, double c);

    // Non-Gaussian stats with an explicit joint-moment table
    // {(p, q) -> <dIcos^p dIsin^q>}, total order p + q <= 14.  The
    // second-order entries must agree with (s_cos, s_sin, c).
    static ComponentStats with_moments(double s_cos, double s_sin, double c,
                                       std::map<std::pair<int, int>, double> joint);

    double s_cos() const { return s_cos_; }
    double s_sin() const { return s_sin_; }
    double c() const { return c_; }
    bool is_gaussian() const { return gaussian_; }

    // Mixed photocurrent variance, Eq.-(5) style: (s_cos^2 + s_sin^2)/2.
    double mixed_variance() const { return 0.5 * (s_cos_ * s_cos_ + s_sin_ * s_sin_); }

    bool has_moment(int p, int q) const;

    // <dIcos^p dIsin^q>.  Table lookup first; Gaussian closure when the
    // stats are Gaussian-flagged; otherwise a missing entry throws --
    // moments are never silently Gaussian-filled.
    double joint_moment(int p, int q) const;

    const std::map<std::pair<int, int>, double>& joint_table() const { return joint_; }

    static constexpr int kMaxJointOrder = 14;

private:
    ComponentStats(double s_cos, double s_sin, double c, bool gaussian,
                   std::map<std::pair<int, int>, double> joint);

    void validate() const;

    double s_cos_ = 1.0;
    double s_sin_ = 1.0;
    double c_ = 0.0;
    bool gaussian_ = true;
    std::map<std::pair<int, int>, double> joint_;
};

}  // namespace sqn
