#include "gnbn/fit.hpp"

#include <cmath>
#include <sstream>

#include "gnbn/errors.hpp"

namespace gnbn {

const LocalDistribution& GaussianBn::local(const std::string& id) const {
    auto it = locals.find(id);
    if (it == locals.end()) throw DataError("no local distribution for node " + id);
    return it->second;
}

double GaussianBn::local_mean(const std::string& id,
                              const std::map<std::string, double>& parent_values) const {
    const LocalDistribution& ld = local(id);
    double mu = ld.intercept;
    for (const auto& [parent, beta] : ld.coefficients) {
        auto it = parent_values.find(parent);
        if (it == parent_values.end()) throw DataError("missing value for parent " + parent);
        mu += beta * it->second;
    }
    return mu;
}

LambdaPolicy LambdaPolicy::fixed(double lambda) {
    if (lambda < 0.0) throw UsageError("ridge lambda must be >= 0");
    LambdaPolicy p;
    p.kind = LambdaPolicyKind::Fixed;
    p.fixed_lambda = lambda;
    return p;
}

LambdaPolicy LambdaPolicy::gcv() { return LambdaPolicy{}; }

std::vector<double> LambdaPolicy::grid() const {
    std::vector<double> g;
    const double llo = std::log10(grid_lo);
    const double lhi = std::log10(grid_hi);
    for (int i = 0; i < grid_points; ++i) {
        const double t = grid_points == 1 ? 0.0
                                          : static_cast<double>(i) /
                                                static_cast<double>(grid_points - 1);
        g.push_back(std::pow(10.0, llo + t * (lhi - llo)));
    }
    return g;
}

namespace {

Eigen::MatrixXd parent_matrix(const std::vector<std::string>& parents, const Dataset& data) {
    Eigen::MatrixXd X(data.n(), static_cast<Eigen::Index>(parents.size()));
    for (std::size_t j = 0; j < parents.size(); ++j) {
        X.col(static_cast<Eigen::Index>(j)) = data.column(parents[j]);
    }
    return X;
}

std::vector<std::string> sorted_parents(const Dag& d, const std::string& node) {
    const auto ps = d.parents(node);
    return {ps.begin(), ps.end()};
}

}  // namespace

LocalDistribution ols_local(const std::string& node, const std::vector<std::string>& parents,
                            const Dataset& data) {
    const Eigen::VectorXd y = data.column(node);
    const auto n = y.size();
    const auto p = static_cast<Eigen::Index>(parents.size());
    if (n <= p + 1) {
        throw DataError("node " + node + ": " + std::to_string(n) +
                        " observations cannot support " + std::to_string(p) + " parents");
    }

    LocalDistribution ld;
    ld.node = node;
    if (p == 0) {
        ld.intercept = y.mean();
        ld.residual_variance = (y.array() - ld.intercept).square().sum() /
                               static_cast<double>(n - 1);
        return ld;
    }

    Eigen::MatrixXd X(n, p + 1);
    X.col(0).setOnes();
    X.rightCols(p) = parent_matrix(parents, data);

    const Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
    if (lu.rank() < p + 1) {
        std::ostringstream oss;
        oss << "node " << node << ": collinear parents {";
        for (std::size_t j = 0; j < parents.size(); ++j) {
            if (j) oss << ", ";
            oss << parents[j];
        }
        oss << "}; OLS design is rank deficient";
        throw NumericalError(oss.str());
    }
    const Eigen::VectorXd beta = lu.solve(X.transpose() * y);

    ld.intercept = beta(0);
    for (std::size_t j = 0; j < parents.size(); ++j) {
        ld.coefficients[parents[j]] = beta(static_cast<Eigen::Index>(j) + 1);
    }
    const double rss = (y - X * beta).squaredNorm();
    ld.residual_variance = rss / static_cast<double>(n - p - 1);
    return ld;
}

LocalDistribution ridge_local(const std::string& node, const std::vector<std::string>& parents,
                              const Dataset& data, const LambdaPolicy& policy) {
    if (parents.empty()) return ols_local(node, parents, data);

    const Eigen::VectorXd y = data.column(node);
    const auto n = y.size();
    const auto p = static_cast<Eigen::Index>(parents.size());

    Eigen::MatrixXd X = parent_matrix(parents, data);
    Eigen::VectorXd col_mean(p), col_sd(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        col_mean(j) = X.col(j).mean();
        X.col(j).array() -= col_mean(j);
        col_sd(j) = std::sqrt(X.col(j).squaredNorm() / static_cast<double>(n - 1));
        if (!(col_sd(j) > 0.0)) {
            throw DataError("node " + node + ": parent " + parents[static_cast<std::size_t>(j)] +
                            " is constant");
        }
        X.col(j) /= col_sd(j);
    }
    const double y_mean = y.mean();
    const Eigen::VectorXd yc = y.array() - y_mean;

    const Eigen::MatrixXd xtx = X.transpose() * X;
    const Eigen::VectorXd xty = X.transpose() * yc;

    auto solve_at = [&](double lambda, double* edf_out) {
        Eigen::MatrixXd reg = xtx;
        reg.diagonal().array() += lambda;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
        const Eigen::VectorXd beta = ldlt.solve(xty);
        if (edf_out) {
            // edf = tr(X (X'X + lambda I)^-1 X') + 1 for the intercept
            const Eigen::MatrixXd inv_xtx = ldlt.solve(xtx);
            *edf_out = inv_xtx.trace() + 1.0;
        }
        return beta;
    };

    double lambda = policy.fixed_lambda;
    if (policy.kind == LambdaPolicyKind::Gcv) {
        double best = std::numeric_limits<double>::infinity();
        for (const double cand : policy.grid()) {
            double edf = 0.0;
            const Eigen::VectorXd beta = solve_at(cand, &edf);
            const double rss = (yc - X * beta).squaredNorm();
            const double denom = 1.0 - edf / static_cast<double>(n);
            if (denom <= 0.0) continue;
            const double gcv = rss / (static_cast<double>(n) * denom * denom);
            if (gcv < best) {
                best = gcv;
                lambda = cand;
            }
        }
    }

    double edf = 0.0;
    const Eigen::VectorXd beta = solve_at(lambda, &edf);
    const double rss = (yc - X * beta).squaredNorm();

    LocalDistribution ld;
    ld.node = node;
    ld.intercept = y_mean;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double b = beta(j) / col_sd(j);  // back to original predictor scale
        ld.coefficients[parents[static_cast<std::size_t>(j)]] = b;
        ld.intercept -= b * col_mean(j);
    }
    const double denom = static_cast<double>(n) - edf;
    ld.residual_variance = rss / (denom > 1.0 ? denom : 1.0);
    return ld;
}

GaussianBn fit_ols(const Dag& d, const Dataset& data) {
    GaussianBn bn;
    bn.dag = d;
    bn.fit_method = FitMethod::Ols;
    for (const auto& node : d.nodes()) {
        bn.locals[node.id] = ols_local(node.id, sorted_parents(d, node.id), data);
    }
    return bn;
}

GaussianBn fit_ridge(const Dag& d, const Dataset& data, const LambdaPolicy& policy) {
    GaussianBn bn;
    bn.dag = d;
    bn.fit_method = FitMethod::Ridge;
    for (const auto& node : d.nodes()) {
        bn.locals[node.id] = ridge_local(node.id, sorted_parents(d, node.id), data, policy);
    }
    return bn;
}

}  // namespace gnbn
