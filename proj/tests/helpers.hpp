#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gnbn/dataset.hpp"
#include "gnbn/math.hpp"

namespace test_helpers {

// Scratch directory that cleans up after itself.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("gnbn_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

// Dataset built directly from matrices, bypassing CSV files.
inline gnbn::Dataset make_dataset(const Eigen::MatrixXd& snps,
                                  const std::vector<std::string>& snp_ids,
                                  const Eigen::MatrixXd& traits,
                                  const std::vector<std::string>& trait_ids,
                                  const std::vector<int>& tiers) {
    gnbn::Dataset d;
    d.genotypes.snp_ids = snp_ids;
    d.genotypes.counts = snps;
    d.traits.trait_ids = trait_ids;
    d.traits.values = traits;
    d.traits.tiers = tiers;
    for (Eigen::Index i = 0; i < snps.rows(); ++i) {
        d.genotypes.individual_ids.push_back("i" + std::to_string(i));
        d.traits.individual_ids.push_back("i" + std::to_string(i));
    }
    for (const auto& ids = d.column_ids(); const auto& id : ids) {
        const Eigen::VectorXd c = d.column(id);
        const double m = c.mean();
        d.standardization.mean.push_back(m);
        d.standardization.sd.push_back(std::sqrt(
            (c.array() - m).square().sum() / static_cast<double>(c.size() - 1)));
    }
    return d;
}

// {0,1,2} genotype column with allele frequency p.
inline Eigen::VectorXd random_genotype_column(gnbn::Rng& rng, Eigen::Index n, double p) {
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        c(i) = static_cast<double>(rng.uniform() < p) + static_cast<double>(rng.uniform() < p);
    }
    return c;
}

inline Eigen::VectorXd random_normal_column(gnbn::Rng& rng, Eigen::Index n, double mean = 0.0,
                                            double sd = 1.0) {
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) c(i) = rng.normal(mean, sd);
    return c;
}

}  // namespace test_helpers
