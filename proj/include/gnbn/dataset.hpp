#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace gnbn {

struct GenotypeMatrix {
    std::vector<std::string> individual_ids;
    std::vector<std::string> snp_ids;
    Eigen::MatrixXd counts;  // n x S, entries in {0,1,2}

    Eigen::Index n() const { return counts.rows(); }
    Eigen::Index num_snps() const { return counts.cols(); }
};

struct TraitMatrix {
    std::vector<std::string> individual_ids;
    std::vector<std::string> trait_ids;
    Eigen::MatrixXd values;  // n x T
    std::vector<int> tiers;  // per trait, 0 = earliest measurement

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index num_traits() const { return values.cols(); }
};

// Per-column location/scale recorded so predictions can be mapped back
// to the original units.
struct ColumnStats {
    std::vector<double> mean;  // indexed like columns(): SNPs then traits
    std::vector<double> sd;
};

struct Dataset {
    GenotypeMatrix genotypes;
    TraitMatrix traits;
    ColumnStats standardization;
    int dropped_individuals = 0;

    Eigen::Index n() const { return genotypes.n(); }

    // Column universe: SNP columns first, then trait columns.
    std::vector<std::string> column_ids() const;
    // Column of the joint (genotype|trait) view by id; throws DataError if absent.
    Eigen::VectorXd column(const std::string& id) const;
    bool is_trait(const std::string& id) const;
    int trait_tier(const std::string& id) const;

    // n x (S+T) matrix, SNPs first.
    Eigen::MatrixXd joint_matrix() const;
};

// Reads genotype and trait CSVs, joins rows on individual id (file order of the
// genotype file), validates allele counts, and attaches trait tiers.
Dataset load_dataset(const std::string& genotype_path,
                     const std::string& trait_path,
                     const std::map<std::string, int>& tier_spec,
                     bool mean_impute = false);

// Standalone loaders for prediction inputs (no join, no tiers).
GenotypeMatrix load_genotype_matrix(const std::string& path);
TraitMatrix load_trait_matrix(const std::string& path);

// Drops SNP columns with minor allele frequency below min_maf.
GenotypeMatrix filter_maf(const GenotypeMatrix& g, double min_maf = 0.01);

// Greedy forward scan; for each pair with |r| > r_max the later column is dropped.
GenotypeMatrix prune_correlated(const GenotypeMatrix& g, double r_max = 0.95);

// Centers and scales every column to unit variance, recording the transform.
Dataset standardize(const Dataset& d);

double minor_allele_frequency(const Eigen::VectorXd& counts);

}  // namespace gnbn
