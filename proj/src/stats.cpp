#include "gnbn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gnbn/errors.hpp"
#include "gnbn/math.hpp"

namespace gnbn {

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) throw UsageError("pearson: length mismatch");
    const auto n = x.size();
    if (n < 3) throw UsageError("pearson: need at least 3 observations");
    const Eigen::VectorXd xc = x.array() - x.mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    const double sx = xc.norm();
    const double sy = yc.norm();
    if (sx == 0.0 || sy == 0.0) {
        throw NumericalError("pearson: correlation undefined for a constant input");
    }
    return std::clamp(xc.dot(yc) / (sx * sy), -1.0, 1.0);
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data) {
    const auto p = data.cols();
    Eigen::MatrixXd centered = data;
    for (Eigen::Index j = 0; j < p; ++j) {
        centered.col(j).array() -= centered.col(j).mean();
        const double norm = centered.col(j).norm();
        if (norm == 0.0) {
            throw NumericalError("correlation_matrix: column " + std::to_string(j) +
                                 " is constant");
        }
        centered.col(j) /= norm;
    }
    Eigen::MatrixXd corr = centered.transpose() * centered;
    corr.diagonal().setOnes();
    return corr;
}

double partial_corr_from_corr(const Eigen::MatrixXd& corr, Eigen::Index x, Eigen::Index y,
                              const std::vector<Eigen::Index>& z) {
    if (z.empty()) return corr(x, y);

    std::vector<Eigen::Index> idx = {x, y};
    idx.insert(idx.end(), z.begin(), z.end());
    const auto k = static_cast<Eigen::Index>(idx.size());

    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) {
            sub(a, b) = corr(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (!lu.isInvertible()) {
        throw NumericalError("partial_corr: correlation submatrix is singular");
    }
    const Eigen::MatrixXd prec = lu.inverse();
    return std::clamp(-prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1)), -1.0, 1.0);
}

double partial_corr(Eigen::Index x, Eigen::Index y, const std::vector<Eigen::Index>& z,
                    const Eigen::MatrixXd& data) {
    if (z.empty()) return pearson(data.col(x), data.col(y));

    std::vector<Eigen::Index> idx = {x, y};
    idx.insert(idx.end(), z.begin(), z.end());
    Eigen::MatrixXd sub(data.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) {
        sub.col(static_cast<Eigen::Index>(a)) = data.col(idx[a]);
    }
    std::vector<Eigen::Index> zloc;
    for (std::size_t a = 2; a < idx.size(); ++a) zloc.push_back(static_cast<Eigen::Index>(a));
    return partial_corr_from_corr(correlation_matrix(sub), 0, 1, zloc);
}

CiTestResult ci_test_from_corr(const Eigen::MatrixXd& corr, Eigen::Index n_samples,
                               Eigen::Index x, Eigen::Index y,
                               const std::vector<Eigen::Index>& z, double alpha) {
    CiTestResult res;
    res.df = static_cast<int>(n_samples) - 2 - static_cast<int>(z.size());
    if (res.df < 1) {
        // cannot reject with no degrees of freedom
        res.degenerate = true;
        res.p_value = 1.0;
        return res;
    }
    res.r = partial_corr_from_corr(corr, x, y, z);
    const double r2 = res.r * res.r;
    if (r2 >= 1.0) {
        res.statistic = std::numeric_limits<double>::infinity();
        res.p_value = 0.0;
        res.dependent = true;
        return res;
    }
    res.statistic = res.r * std::sqrt(static_cast<double>(res.df) / (1.0 - r2));
    res.p_value = student_t_two_sided_p(res.statistic, static_cast<double>(res.df));
    res.dependent = res.p_value <= alpha;
    return res;
}

CiTestResult ci_test(Eigen::Index x, Eigen::Index y, const std::vector<Eigen::Index>& z,
                     const Eigen::MatrixXd& data, double alpha) {
    std::vector<Eigen::Index> idx = {x, y};
    idx.insert(idx.end(), z.begin(), z.end());
    Eigen::MatrixXd sub(data.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) {
        sub.col(static_cast<Eigen::Index>(a)) = data.col(idx[a]);
    }
    std::vector<Eigen::Index> zloc;
    for (std::size_t a = 2; a < idx.size(); ++a) zloc.push_back(static_cast<Eigen::Index>(a));
    return ci_test_from_corr(correlation_matrix(sub), data.rows(), 0, 1, zloc, alpha);
}

}  // namespace gnbn
