#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gnbn {

struct CiTestResult {
    double r = 0.0;         // (partial) correlation
    double statistic = 0.0; // Student's t
    int df = 0;
    double p_value = 1.0;
    bool dependent = false;
    bool degenerate = false;  // df <= 0; declared independent by convention
};

// Sample Pearson correlation. Throws NumericalError on constant input.
double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Partial correlation of columns x, y given columns z, via inversion of the
// correlation submatrix over {x, y} ∪ z.
double partial_corr(Eigen::Index x, Eigen::Index y, const std::vector<Eigen::Index>& z,
                    const Eigen::MatrixXd& data);

// Student's t test for the (partial) Pearson correlation of columns x, y
// given z; df = n - 2 - |z|.
CiTestResult ci_test(Eigen::Index x, Eigen::Index y, const std::vector<Eigen::Index>& z,
                     const Eigen::MatrixXd& data, double alpha);

// Same test evaluated from a precomputed correlation matrix over n samples.
double partial_corr_from_corr(const Eigen::MatrixXd& corr, Eigen::Index x, Eigen::Index y,
                              const std::vector<Eigen::Index>& z);
CiTestResult ci_test_from_corr(const Eigen::MatrixXd& corr, Eigen::Index n_samples,
                               Eigen::Index x, Eigen::Index y,
                               const std::vector<Eigen::Index>& z, double alpha);

// Full correlation matrix of the columns of data.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data);

}  // namespace gnbn
