#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gnbn/dataset.hpp"
#include "gnbn/math.hpp"
#include "gnbn/model.hpp"

namespace gnbn {

struct JointGaussian {
    std::vector<std::string> order;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    Eigen::Index index_of(const std::string& id) const;
};

// Point value or closed interval per evidence node.
struct EvidenceValue {
    double lo = 0.0;
    double hi = 0.0;
    bool is_point() const { return lo == hi; }
    static EvidenceValue point(double v) { return {v, v}; }
    static EvidenceValue interval(double lo, double hi);
};

using Evidence = std::map<std::string, EvidenceValue>;

enum class QueryEngine { Exact, LogicSampling, LikelihoodWeighting };

struct TargetSummary {
    double mean = 0.0;
    double sd = 0.0;                 // posterior standard deviation
    double monte_carlo_se = 0.0;     // 0 for the exact engine
};

struct QueryResult {
    std::map<std::string, TargetSummary> targets;
    double effective_sample_size = 0.0;
    QueryEngine engine = QueryEngine::Exact;
};

// Mean and covariance implied by the BN, in topological-order node layout.
JointGaussian to_joint(const GaussianBn& bn);

// |Omega_ij| <= tol marked zero (true in the returned mask).
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> precision_zero_pattern(
    const JointGaussian& j, double tol);

// Standard Gaussian conditioning on point evidence.
JointGaussian condition_exact(const JointGaussian& j, const Evidence& e);

// Ancestral sampling; columns follow bn's topological order.
Eigen::MatrixXd logic_sample(const GaussianBn& bn, Eigen::Index n, std::uint64_t seed);

QueryResult query(const GaussianBn& bn, const std::set<std::string>& targets,
                  const Evidence& e, QueryEngine engine, Eigen::Index n_samples,
                  std::uint64_t seed);

enum class PredictionMode { Genetic, Causal };

// Rows align with new_genotypes individuals; columns with bn trait nodes
// in sorted-id order (returned in trait_ids).
struct TraitPredictions {
    std::vector<std::string> individual_ids;
    std::vector<std::string> trait_ids;
    Eigen::MatrixXd values;
};

TraitPredictions predict(const GaussianBn& bn, const GenotypeMatrix& new_genotypes,
                         PredictionMode mode,
                         const TraitMatrix* observed_traits = nullptr);

// Saturated-BN construction from the joint along the given ordering; node i's
// coefficients come from the precision matrix of the leading i+1 marginal.
GaussianBn bn_from_joint(const JointGaussian& j, const std::vector<Node>& nodes);

}  // namespace gnbn
