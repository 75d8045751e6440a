#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gnbn/dataset.hpp"
#include "gnbn/inference.hpp"

namespace gnbn {

enum class GPolicy {
    Identity,      // G_tt = scale * I
    CrossProduct,  // G_tt = scale * X_S X_S^T in SNP space (random regression form)
};

// Multivariate mixed model: traits = mu + Z u + eps with block covariances.
struct GblupModel {
    Eigen::MatrixXd design;                        // Z, n x S
    std::vector<std::vector<Eigen::MatrixXd>> g_blocks;  // T x T grid of S x S blocks
    Eigen::MatrixXd r_blocks;                      // T x T residual covariances (scalars)
    Eigen::VectorXd means;                         // per trait
    std::vector<std::string> trait_ids;

    Eigen::Index n() const { return design.rows(); }
    Eigen::Index num_snps() const { return design.cols(); }
    Eigen::Index num_traits() const { return r_blocks.rows(); }

    // Assembled TS x TS random-effect covariance and Tn x Tn residual covariance.
    Eigen::MatrixXd assembled_g() const;
    Eigen::MatrixXd assembled_r() const;
};

GblupModel build_gblup(const GenotypeMatrix& genotypes, GPolicy g_policy,
                       const Eigen::MatrixXd& trait_covariance,  // genetic, T x T scale
                       const Eigen::MatrixXd& residual_covariance,  // T x T
                       const Eigen::VectorXd& means,
                       const std::vector<std::string>& trait_ids);

GblupModel build_gblup_custom(const GenotypeMatrix& genotypes,
                              std::vector<std::vector<Eigen::MatrixXd>> g_blocks,
                              const Eigen::MatrixXd& residual_covariance,
                              const Eigen::VectorXd& means,
                              const std::vector<std::string>& trait_ids);

// Joint covariance over (stacked traits, stacked random effects):
// [Z G Z^T + R, Z G; (Z G)^T, G], with the matching stacked mean.
JointGaussian joint_covariance(const GblupModel& m);

struct EquivalenceEntry {
    std::string row;
    std::string col;
    double omega = 0.0;
    double implied_beta = 0.0;     // -Omega_ij / Omega_ii
    double simulated_beta = 0.0;   // full-conditional regression from samples
    double standard_error = 0.0;
};

struct EquivalenceReport {
    Eigen::MatrixXd precision;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> zero_pattern;
    std::vector<EquivalenceEntry> entries;
    bool jitter_applied = false;
    int mismatches = 0;  // entries where |implied - simulated| > 3 SE and > tol
};

// Checks that the implied full-conditional coefficients -Omega_ij/Omega_ii are
// reproduced by regressions on a large simulated sample.
EquivalenceReport verify_equivalence(const GblupModel& m, double tol,
                                     Eigen::Index n_samples = 1000000,
                                     std::uint64_t seed = 0);

}  // namespace gnbn
