#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gnbn/dataset.hpp"
#include "gnbn/model.hpp"

namespace gnbn {

enum class LambdaPolicyKind { Fixed, Gcv };

// How the ridge penalty is chosen for each node.
struct LambdaPolicy {
    LambdaPolicyKind kind = LambdaPolicyKind::Gcv;
    double fixed_lambda = 0.0;
    // GCV searches this logarithmic grid.
    double grid_lo = 1e-4;
    double grid_hi = 1e4;
    int grid_points = 17;

    static LambdaPolicy fixed(double lambda);
    static LambdaPolicy gcv();
    std::vector<double> grid() const;
};

GaussianBn fit_ols(const Dag& d, const Dataset& data);
GaussianBn fit_ridge(const Dag& d, const Dataset& data,
                     const LambdaPolicy& policy = LambdaPolicy::gcv());

// Single-node ridge solve on standardized predictors with an unpenalized
// intercept; coefficients are reported on the original scale.
LocalDistribution ridge_local(const std::string& node, const std::vector<std::string>& parents,
                              const Dataset& data, const LambdaPolicy& policy);

LocalDistribution ols_local(const std::string& node, const std::vector<std::string>& parents,
                            const Dataset& data);

}  // namespace gnbn
