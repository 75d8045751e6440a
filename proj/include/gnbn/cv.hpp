#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gnbn/dataset.hpp"
#include "gnbn/fit.hpp"
#include "gnbn/structure.hpp"

namespace gnbn {

struct CvConfig {
    int runs = 10;
    int folds = 10;
    double alpha = 0.01;
    int max_cond_size = 3;
    int restarts = 0;
    FitMethod fit_method = FitMethod::Ridge;
    LambdaPolicy lambda_policy = LambdaPolicy::gcv();
    std::uint64_t seed = 0;
    int threads = 1;
};

struct TraitCvSummary {
    double rho_g_mean = 0.0;
    double rho_g_sd = 0.0;
    double rho_c_mean = 0.0;
    double rho_c_sd = 0.0;
};

struct CvReport {
    std::map<std::string, TraitCvSummary> traits;
    // per-run per-trait pooled correlations
    std::map<std::string, std::vector<double>> rho_g_runs;
    std::map<std::string, std::vector<double>> rho_c_runs;
    std::vector<GaussianBn> networks;  // one per (run, fold), run-major
    std::vector<std::string> warnings;
    double elapsed_seconds = 0.0;
};

double predictive_correlation(const Eigen::VectorXd& predicted,
                              const Eigen::VectorXd& observed);

// Row subset of a dataset; standardization statistics are recomputed.
Dataset subset_rows(const Dataset& d, const std::vector<Eigen::Index>& rows);

// Seeded fold partition for one run; returns fold index per row.
std::vector<int> fold_assignment(Eigen::Index n, int folds, std::uint64_t seed, int run);

CvReport run_cv(const Dataset& data, const CvConfig& cfg);

}  // namespace gnbn
