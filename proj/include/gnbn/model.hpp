#pragma once

#include <map>
#include <string>

#include "gnbn/dag.hpp"

namespace gnbn {

struct LocalDistribution {
    std::string node;
    double intercept = 0.0;
    std::map<std::string, double> coefficients;  // parent id -> beta
    double residual_variance = 0.0;
};

enum class FitMethod { Ols, Ridge };

struct GaussianBn {
    Dag dag;
    std::map<std::string, LocalDistribution> locals;
    FitMethod fit_method = FitMethod::Ols;

    const LocalDistribution& local(const std::string& id) const;
    // Local-distribution mean at the given parent values.
    double local_mean(const std::string& id,
                      const std::map<std::string, double>& parent_values) const;
};

}  // namespace gnbn
