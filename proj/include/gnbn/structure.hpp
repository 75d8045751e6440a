#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gnbn/dag.hpp"
#include "gnbn/dataset.hpp"

namespace gnbn {

struct SearchConfig {
    double alpha = 0.01;
    int max_cond_size = 3;
    int restarts = 0;
    std::uint64_t seed = 0;
};

struct HitonResult {
    std::string target;
    std::set<std::string> pc_set;  // parents-and-children candidates
    long test_count = 0;
};

// SI-HITON-PC with backward correction: forward inclusion in order of marginal
// association strength, each admission re-checked against every conditioning
// subset of the current set up to max_cond_size, then a backward pass removing
// members that become independent given subsets of the others.
HitonResult hiton_pc(const std::string& target, const std::set<std::string>& candidates,
                     const Dataset& data, const SearchConfig& cfg);

// Union over traits of hiton_pc parent/children sets, plus all traits.
std::set<std::string> mb_filter(const Dataset& data, const SearchConfig& cfg,
                                long* test_count = nullptr);

// Decomposable Gaussian BIC: per-node OLS log-likelihood (MLE variance)
// minus (|parents| + 2)/2 * log n.
double bic_score(const Dag& d, const Dataset& data);

// BIC contribution of a single node given a parent set; -inf on a
// rank-deficient local design.
double bic_local(const std::string& node, const std::set<std::string>& parents,
                 const Dataset& data);

// Greedy add/delete/reverse search over tier-valid DAGs, with optional
// random restarts from perturbed starting graphs.
Dag hill_climb(const Dataset& data, const std::set<std::string>& nodes,
               const SearchConfig& cfg);

// Tier-typed node list for a subset of dataset columns.
std::vector<Node> make_nodes(const Dataset& data, const std::set<std::string>& ids);

}  // namespace gnbn
