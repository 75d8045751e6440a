#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gnbn/dataset.hpp"
#include "gnbn/model.hpp"

namespace gnbn {

struct TraitSpec {
    std::string id;
    int tier = 0;
    std::vector<std::pair<std::string, double>> parents;  // SNP or earlier-trait ids
    double residual_variance = 1.0;
    double intercept = 0.0;
};

struct SimSpec {
    Eigen::Index n = 100;
    Eigen::Index s = 10;
    double maf_lo = 0.1;
    double maf_hi = 0.5;
    double ld_rho = 0.0;  // adjacent-SNP latent correlation
    std::vector<TraitSpec> traits;
    std::uint64_t seed = 0;

    // SNP ids are snp<k>, zero-padded so they sort in chromosome order.
    std::string snp_id(Eigen::Index k) const;
};

// Allele counts as the sum of two Gaussian-copula chains thresholded at each
// SNP's allele frequency; adjacent latent correlation ld_rho.
GenotypeMatrix simulate_genotypes(const SimSpec& spec);

struct Simulation {
    Dataset data;
    GaussianBn truth;  // generative model over the simulated columns
};

// Generates traits in tier order from their linear specs and packages the
// combined dataset with the ground-truth network.
Simulation simulate_phenotypes(const GenotypeMatrix& g, const SimSpec& spec);

Simulation simulate(const SimSpec& spec);

}  // namespace gnbn
