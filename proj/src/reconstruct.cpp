#include "sqn/reconstruct.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sqn/rng.hpp"

namespace sqn {

namespace {

const char* kParamNames[4] = {"alpha", "beta", "gamma", "delta"};

double mixed_variance_prediction(const MeasurementMatrix& m, const Matrix4& V) {
    const Eigen::Matrix2d sigma = m * V * m.transpose();
    return 0.5 * (sigma(0, 0) + sigma(1, 1));
}

struct VarianceEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

VarianceEstimate point_variance(const std::vector<double>& values, std::size_t rounds,
                                std::uint64_t seed) {
    const std::size_t n = values.size();
    long double mean = 0.0L;
    for (double v : values)
        mean += v;
    mean /= static_cast<long double>(n);
    long double ss = 0.0L;
    for (double v : values) {
        const long double d = v - mean;
        ss += d * d;
    }
    VarianceEstimate est;
    est.value = static_cast<double>(ss / static_cast<long double>(n - 1));

    long double acc = 0.0L, acc2 = 0.0L;
    for (std::size_t r = 0; r < rounds; ++r) {
        auto engine = make_engine(split_seed(seed, 0xce11ULL + r));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        long double s = 0.0L, s2 = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            const long double v = values[pick(engine)];
            s += v;
            s2 += v * v;
        }
        const long double m = s / static_cast<long double>(n);
        const long double var = (s2 / static_cast<long double>(n) - m * m) *
                                static_cast<long double>(n) / (n - 1.0L);
        acc += var;
        acc2 += var * var;
    }
    const long double bm = acc / static_cast<long double>(rounds);
    const long double bv = std::max(0.0L, acc2 / static_cast<long double>(rounds) - bm * bm);
    est.std_error = static_cast<double>(
        std::sqrt(bv * static_cast<long double>(rounds) / (rounds - 1.0L)));
    return est;
}

}  // namespace

bool ReconstructionResult::accessible(const std::string& name) const {
    for (const auto& miss : inaccessible)
        if (miss == name)
            return false;
    return true;
}

double ReconstructionResult::std_error(int param_index) const {
    return std::sqrt(std::max(0.0, parameter_covariance(param_index, param_index)));
}

ReconstructionResult reconstruct_symmetric_covariance(const ScanResult& scan, Technique technique,
                                                      const RdCoefficientFn& rd_fn,
                                                      const ReconstructionOptions& options) {
    if (scan.points.empty())
        throw std::invalid_argument("reconstruct_symmetric_covariance: empty scan");
    if (options.bootstrap_rounds < 2)
        throw std::invalid_argument("reconstruct_symmetric_covariance: need >= 2 bootstrap rounds");

    const std::size_t n_points = scan.points.size();

    // Basis patterns: the prediction is linear in (alpha, beta, gamma, delta).
    std::array<Matrix4, 4> basis = {
        symmetric_covariance_pattern(1, 0, 0, 0),
        symmetric_covariance_pattern(0, 1, 0, 0),
        symmetric_covariance_pattern(0, 0, 1, 0),
        symmetric_covariance_pattern(0, 0, 0, 1),
    };

    Eigen::MatrixXd design(n_points, 4);
    Eigen::VectorXd observed(n_points);
    Eigen::VectorXd sigma(n_points);

    for (const auto& point : scan.points)
        if (point.values.size() < 2)
            throw std::invalid_argument("reconstruct_symmetric_covariance: setting with < 2 samples");

    std::vector<VarianceEstimate> estimates(n_points);
    for_each_chunk(n_points, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            estimates[i] = point_variance(scan.points[i].values, options.bootstrap_rounds,
                                          split_seed(options.seed, i));
        }
    });

    for (std::size_t i = 0; i < n_points; ++i) {
        const double setting = scan.points[i].setting;
        const MeasurementMatrix m = technique == Technique::HD
                                        ? MeasurementModel::hd(setting).matrix()
                                        : rd_fn(setting);
        for (int p = 0; p < 4; ++p)
            design(i, p) = mixed_variance_prediction(m, basis[p]);
        observed(i) = estimates[i].value;
        sigma(i) = std::max(estimates[i].std_error, 1e-12);
    }

    // Structurally absent parameters (zero columns) are inaccessible.
    ReconstructionResult result;
    std::vector<int> active;
    for (int p = 0; p < 4; ++p) {
        if (design.col(p).cwiseAbs().maxCoeff() < 1e-12)
            result.inaccessible.push_back(kParamNames[p]);
        else
            active.push_back(p);
    }

    Eigen::MatrixXd weighted(n_points, active.size());
    Eigen::VectorXd rhs(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        for (std::size_t j = 0; j < active.size(); ++j)
            weighted(i, j) = design(i, active[j]) / sigma(i);
        rhs(i) = observed(i) / sigma(i);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(weighted, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const double max_sv = svd.singularValues().maxCoeff();
    int rank = 0;
    for (int j = 0; j < svd.singularValues().size(); ++j)
        if (svd.singularValues()(j) >= 1e-10 * max_sv)
            ++rank;
    if (rank < static_cast<int>(active.size())) {
        std::ostringstream os;
        os << "reconstruct_symmetric_covariance: rank-deficient scan; unresolved directions:";
        for (int j = rank; j < static_cast<int>(active.size()); ++j) {
            os << " (";
            for (std::size_t p = 0; p < active.size(); ++p)
                os << (p ? ", " : "") << kParamNames[active[p]] << "=" << svd.matrixV()(p, j);
            os << ")";
        }
        throw std::runtime_error(os.str());
    }

    const Eigen::VectorXd theta = svd.solve(rhs);
    const Eigen::MatrixXd normal = weighted.transpose() * weighted;
    const Eigen::MatrixXd cov = normal.inverse();

    double* slots[4] = {&result.params.alpha, &result.params.beta, &result.params.gamma,
                        &result.params.delta};
    for (int p = 0; p < 4; ++p)
        *slots[p] = 0.0;
    for (std::size_t j = 0; j < active.size(); ++j) {
        *slots[active[j]] = theta(j);
        for (std::size_t k = 0; k < active.size(); ++k)
            result.parameter_covariance(active[j], active[k]) = cov(j, k);
    }

    result.points.resize(n_points);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        double pred = 0.0;
        for (std::size_t j = 0; j < active.size(); ++j)
            pred += design(i, active[j]) * theta(j);
        const double r = (observed(i) - pred) / sigma(i);
        chi2 += r * r;
        result.points[i] = {scan.points[i].setting, observed(i), sigma(i), pred};
    }
    result.chi_square = chi2;
    result.degrees_of_freedom = n_points > active.size() ? n_points - active.size() : 0;
    result.reduced_chi_square =
        result.degrees_of_freedom > 0 ? chi2 / static_cast<double>(result.degrees_of_freedom) : 0.0;
    return result;
}

}  // namespace sqn
