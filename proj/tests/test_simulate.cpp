#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gnbn/dataset.hpp"
#include "gnbn/fit.hpp"
#include "gnbn/inference.hpp"
#include "gnbn/simulate.hpp"
#include "gnbn/stats.hpp"
#include "helpers.hpp"

using namespace gnbn;

TEST_CASE("genotypes live in {0,1,2} with frequencies inside the requested range") {
    SimSpec spec;
    spec.n = 2000;
    spec.s = 12;
    spec.maf_lo = 0.15;
    spec.maf_hi = 0.45;
    spec.seed = 1;
    const auto g = simulate_genotypes(spec);
    CHECK(g.n() == 2000);
    CHECK(g.num_snps() == 12);
    for (Eigen::Index j = 0; j < g.num_snps(); ++j) {
        for (Eigen::Index i = 0; i < g.n(); ++i) {
            const double v = g.counts(i, j);
            REQUIRE((v == 0.0 || v == 1.0 || v == 2.0));
        }
        const double p = g.counts.col(j).sum() / (2.0 * static_cast<double>(g.n()));
        // empirical frequency within the range, give or take 3 binomial SEs
        const double se = std::sqrt(0.45 * 0.55 / (2.0 * static_cast<double>(g.n())));
        CHECK(p > spec.maf_lo - 3 * se);
        CHECK(p < spec.maf_hi + 3 * se);
    }
}

TEST_CASE("ld_rho controls adjacent-snp correlation") {
    SimSpec indep;
    indep.n = 2000;
    indep.s = 10;
    indep.ld_rho = 0.0;
    indep.seed = 2;
    const auto g0 = simulate_genotypes(indep);
    for (Eigen::Index j = 0; j + 1 < g0.num_snps(); ++j) {
        CHECK(std::fabs(pearson(g0.counts.col(j), g0.counts.col(j + 1))) < 0.1);
    }

    SimSpec linked = indep;
    linked.ld_rho = 0.9;
    linked.seed = 3;
    const auto g9 = simulate_genotypes(linked);
    for (Eigen::Index j = 0; j + 1 < g9.num_snps(); ++j) {
        CHECK(pearson(g9.counts.col(j), g9.counts.col(j + 1)) > 0.4);
    }
}

TEST_CASE("trait generation follows the linear spec") {
    SimSpec spec;
    spec.n = 10000;
    spec.s = 5;
    spec.seed = 4;
    spec.traits.push_back({"y", 0, {{"snp1", 1.5}}, 1.0, 0.0});
    const auto sim = simulate(spec);
    const auto ld = ols_local("y", {"snp1"}, sim.data);
    CHECK(ld.coefficients.at("snp1") == doctest::Approx(1.5).epsilon(0.034));
    CHECK(ld.residual_variance == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("zero-coefficient trait is uncorrelated with every snp") {
    SimSpec spec;
    spec.n = 10000;
    spec.s = 6;
    spec.seed = 5;
    spec.traits.push_back({"noise", 0, {}, 1.0, 2.0});
    const auto sim = simulate(spec);
    for (Eigen::Index j = 0; j < sim.data.genotypes.num_snps(); ++j) {
        CHECK(std::fabs(pearson(sim.data.genotypes.counts.col(j), sim.data.column("noise"))) <
              0.05);
    }
    CHECK(sim.data.column("noise").mean() == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("tiered traits generated in order with the implied covariance") {
    SimSpec spec;
    spec.n = 20000;
    spec.s = 2;
    spec.seed = 6;
    spec.traits.push_back({"t2", 1, {{"t1", 2.0}}, 0.5, 0.0});  // listed out of order
    spec.traits.push_back({"t1", 0, {}, 1.0, 0.0});
    const auto sim = simulate(spec);
    const Eigen::VectorXd t1 = sim.data.column("t1");
    const Eigen::VectorXd t2 = sim.data.column("t2");
    const double var1 = (t1.array() - t1.mean()).square().sum() / (spec.n - 1.0);
    const double cov =
        ((t1.array() - t1.mean()) * (t2.array() - t2.mean())).sum() / (spec.n - 1.0);
    CHECK(cov == doctest::Approx(2.0 * var1).epsilon(0.05));
    CHECK(sim.truth.dag.has_arc("t1", "t2"));
}

TEST_CASE("ground-truth model reproduces simulated moments through to_joint") {
    SimSpec spec;
    spec.n = 50000;
    spec.s = 4;
    spec.maf_lo = 0.2;
    spec.maf_hi = 0.4;
    spec.ld_rho = 0.0;
    spec.seed = 7;
    spec.traits.push_back({"a", 0, {{"snp2", 1.0}}, 1.0, 0.0});
    spec.traits.push_back({"b", 1, {{"a", -0.8}, {"snp4", 0.6}}, 0.7, 0.0});
    const auto sim = simulate(spec);
    const auto j = to_joint(sim.truth);
    const Eigen::MatrixXd data = sim.data.joint_matrix();
    const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / (spec.n - 1.0);
    // columns of joint_matrix: snps in id order then traits; map through j.order
    std::map<std::string, Eigen::Index> col;
    Eigen::Index k = 0;
    for (const auto& id : sim.data.column_ids()) col[id] = k++;
    for (const auto& id_a : j.order) {
        const auto ja = j.index_of(id_a);
        CHECK(std::fabs(data.col(col[id_a]).mean() - j.mean(ja)) <
              4.0 * std::sqrt(j.covariance(ja, ja) / static_cast<double>(spec.n)));
        for (const auto& id_b : j.order) {
            const auto jb = j.index_of(id_b);
            const double se = std::sqrt((j.covariance(ja, ja) * j.covariance(jb, jb) +
                                         std::pow(j.covariance(ja, jb), 2)) /
                                        static_cast<double>(spec.n));
            CHECK(std::fabs(cov(col[id_a], col[id_b]) - j.covariance(ja, jb)) <
                  5.0 * se + 1e-9);
        }
    }
}

TEST_CASE("simulation is deterministic by seed") {
    SimSpec spec;
    spec.n = 200;
    spec.s = 8;
    spec.ld_rho = 0.5;
    spec.seed = 8;
    spec.traits.push_back({"y", 0, {{"snp3", 1.0}}, 1.0, 0.0});
    const auto a = simulate(spec);
    const auto b = simulate(spec);
    CHECK(a.data.genotypes.counts == b.data.genotypes.counts);
    CHECK(a.data.traits.values == b.data.traits.values);
    spec.seed = 9;
    const auto c = simulate(spec);
    CHECK(a.data.traits.values != c.data.traits.values);
}

TEST_CASE("snp ids are zero padded and sort in order") {
    SimSpec spec;
    spec.n = 10;
    spec.s = 12;
    spec.seed = 10;
    const auto g = simulate_genotypes(spec);
    CHECK(g.snp_ids.front() == "snp01");
    CHECK(g.snp_ids.back() == "snp12");
    auto sorted = g.snp_ids;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == g.snp_ids);
}
