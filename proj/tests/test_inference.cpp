#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gnbn/errors.hpp"
#include "gnbn/fit.hpp"
#include "gnbn/inference.hpp"
#include "gnbn/math.hpp"
#include "gnbn/simulate.hpp"
#include "helpers.hpp"

using namespace gnbn;

namespace {

GaussianBn make_bn(const std::vector<Node>& nodes,
                   const std::vector<std::tuple<std::string, std::string, double>>& arcs,
                   const std::map<std::string, std::pair<double, double>>& node_params) {
    GaussianBn bn;
    bn.dag = Dag{nodes};
    for (const auto& [p, c, beta] : arcs) bn.dag = bn.dag.add_arc(p, c);
    for (const auto& n : nodes) {
        LocalDistribution ld;
        ld.node = n.id;
        const auto it = node_params.find(n.id);
        ld.intercept = it->second.first;
        ld.residual_variance = it->second.second;
        bn.locals[n.id] = ld;
    }
    for (const auto& [p, c, beta] : arcs) bn.locals[c].coefficients[p] = beta;
    return bn;
}

GaussianBn random_bn(Rng& rng, int n_nodes, double arc_prob) {
    std::vector<Node> nodes;
    for (int i = 0; i < n_nodes; ++i) {
        nodes.push_back({"n" + std::to_string(i), NodeKind::Trait, i});
    }
    GaussianBn bn;
    bn.dag = Dag{nodes};
    for (int i = 0; i < n_nodes; ++i) {
        LocalDistribution ld;
        ld.node = nodes[static_cast<std::size_t>(i)].id;
        ld.intercept = rng.uniform(-2.0, 2.0);
        ld.residual_variance = rng.uniform(0.3, 2.0);
        for (int j = 0; j < i; ++j) {
            if (rng.uniform() < arc_prob) {
                const auto& p = nodes[static_cast<std::size_t>(j)].id;
                bn.dag = bn.dag.add_arc(p, ld.node);
                ld.coefficients[p] = rng.uniform(-1.5, 1.5);
            }
        }
        bn.locals[ld.node] = ld;
    }
    return bn;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& s) {
    const Eigen::MatrixXd c = s.rowwise() - s.colwise().mean();
    return c.transpose() * c / static_cast<double>(s.rows() - 1);
}

}  // namespace

TEST_CASE("to_joint with no arcs is diagonal") {
    const auto bn = make_bn({{"a", NodeKind::Trait, 0}, {"b", NodeKind::Trait, 0}}, {},
                            {{"a", {1.0, 2.0}}, {"b", {-3.0, 0.5}}});
    const auto j = to_joint(bn);
    CHECK(j.mean(j.index_of("a")) == doctest::Approx(1.0));
    CHECK(j.mean(j.index_of("b")) == doctest::Approx(-3.0));
    CHECK(j.covariance(j.index_of("a"), j.index_of("a")) == doctest::Approx(2.0));
    CHECK(j.covariance(j.index_of("b"), j.index_of("b")) == doctest::Approx(0.5));
    CHECK(j.covariance(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("to_joint one-step algebra: Y = 2X + e") {
    const auto bn = make_bn({{"x", NodeKind::Trait, 0}, {"y", NodeKind::Trait, 1}},
                            {{"x", "y", 2.0}}, {{"x", {0.0, 1.0}}, {"y", {0.0, 1.0}}});
    const auto j = to_joint(bn);
    const auto xi = j.index_of("x"), yi = j.index_of("y");
    CHECK(j.covariance(yi, yi) == doctest::Approx(5.0));
    CHECK(j.covariance(xi, yi) == doctest::Approx(2.0));
}

TEST_CASE("to_joint matches sampled moments on a random 6-node model") {
    Rng rng(201);
    const auto bn = random_bn(rng, 6, 0.5);
    const auto j = to_joint(bn);
    const Eigen::Index n = 1000000;
    const auto s = logic_sample(bn, n, 7);
    const Eigen::VectorXd mean = s.colwise().mean();
    const Eigen::MatrixXd cov = sample_covariance(s);
    for (Eigen::Index a = 0; a < j.covariance.rows(); ++a) {
        const double mean_se = std::sqrt(j.covariance(a, a) / static_cast<double>(n));
        CHECK(std::fabs(mean(a) - j.mean(a)) < 4.0 * mean_se);
        for (Eigen::Index b = 0; b <= a; ++b) {
            const double se = std::sqrt(
                (j.covariance(a, a) * j.covariance(b, b) + j.covariance(a, b) * j.covariance(a, b)) /
                static_cast<double>(n));
            CHECK(std::fabs(cov(a, b) - j.covariance(a, b)) < 4.0 * se + 1e-9);
        }
    }
}

TEST_CASE("precision zero pattern follows the graph") {
    // chain x -> y -> z: omega_xz = 0
    const auto chain = make_bn(
        {{"x", NodeKind::Trait, 0}, {"y", NodeKind::Trait, 1}, {"z", NodeKind::Trait, 2}},
        {{"x", "y", 1.2}, {"y", "z", -0.7}},
        {{"x", {0, 1}}, {"y", {0, 1}}, {"z", {0, 1}}});
    const auto j = to_joint(chain);
    const auto zero = precision_zero_pattern(j, 1e-8);
    CHECK(zero(j.index_of("x"), j.index_of("z")));
    CHECK_FALSE(zero(j.index_of("x"), j.index_of("y")));
    CHECK_FALSE(zero(j.index_of("y"), j.index_of("z")));

    // saturated 3-node model: no off-diagonal zeros
    const auto sat = make_bn(
        {{"x", NodeKind::Trait, 0}, {"y", NodeKind::Trait, 1}, {"z", NodeKind::Trait, 2}},
        {{"x", "y", 1.0}, {"x", "z", 0.5}, {"y", "z", -0.8}},
        {{"x", {0, 1}}, {"y", {0, 1}}, {"z", {0, 1}}});
    const auto js = to_joint(sat);
    const auto zs = precision_zero_pattern(js, 1e-8);
    for (Eigen::Index a = 0; a < 3; ++a) {
        for (Eigen::Index b = 0; b < 3; ++b) {
            if (a != b) CHECK_FALSE(zs(a, b));
        }
    }
}

TEST_CASE("zero pattern equals d-separation given all other nodes") {
    Rng rng(202);
    for (int rep = 0; rep < 30; ++rep) {
        const auto bn = random_bn(rng, 7, 0.4);
        const auto j = to_joint(bn);
        const auto zero = precision_zero_pattern(j, 1e-8);
        const auto& order = j.order;
        for (std::size_t a = 0; a < order.size(); ++a) {
            for (std::size_t b = a + 1; b < order.size(); ++b) {
                std::set<std::string> rest;
                for (const auto& id : order) {
                    if (id != order[a] && id != order[b]) rest.insert(id);
                }
                const bool dsep = bn.dag.d_separated(order[a], order[b], rest);
                REQUIRE(zero(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) ==
                        dsep);
            }
        }
    }
}

TEST_CASE("exact conditioning: identity and bivariate closed form") {
    Rng rng(203);
    const auto bn = random_bn(rng, 4, 0.5);
    const auto j = to_joint(bn);
    const auto same = condition_exact(j, {});
    CHECK((same.covariance - j.covariance).cwiseAbs().maxCoeff() < 1e-12);

    // unit-variance pair with correlation rho
    const double rho = 0.8;
    const auto biv = make_bn({{"x", NodeKind::Trait, 0}, {"y", NodeKind::Trait, 1}},
                             {{"x", "y", rho}}, {{"x", {0, 1}}, {"y", {0, 1 - rho * rho}}});
    const auto jb = to_joint(biv);
    Evidence e;
    e["x"] = EvidenceValue::point(1.7);
    const auto cond = condition_exact(jb, e);
    CHECK(cond.order == std::vector<std::string>{"y"});
    CHECK(cond.mean(0) == doctest::Approx(rho * 1.7).epsilon(1e-12));
    CHECK(cond.covariance(0, 0) == doctest::Approx(1 - rho * rho).epsilon(1e-12));
}

TEST_CASE("logic sampling basics") {
    const auto root = make_bn({{"x", NodeKind::Trait, 0}}, {}, {{"x", {3.0, 4.0}}});
    const Eigen::Index n = 400000;
    const auto s = logic_sample(root, n, 11);
    CHECK(s.rows() == n);
    CHECK(s.col(0).mean() == doctest::Approx(3.0).epsilon(0.01));
    const double var = sample_covariance(s)(0, 0);
    CHECK(var == doctest::Approx(4.0).epsilon(4.0 / std::sqrt(static_cast<double>(n)) * 4));

    const auto again = logic_sample(root, 1000, 11);
    const auto once_more = logic_sample(root, 1000, 11);
    CHECK(again == once_more);
}

TEST_CASE("query: exact vs likelihood weighting on point evidence") {
    Rng rng(204);
    const auto bn = random_bn(rng, 5, 0.5);
    Evidence e;
    e["n0"] = EvidenceValue::point(0.5);
    e["n2"] = EvidenceValue::point(-1.0);
    const auto exact = query(bn, {"n3", "n4"}, e, QueryEngine::Exact, 0, 0);
    const auto lw =
        query(bn, {"n3", "n4"}, e, QueryEngine::LikelihoodWeighting, 1000000, 13);
    for (const std::string id : {"n3", "n4"}) {
        const auto& a = exact.targets.at(id);
        const auto& b = lw.targets.at(id);
        CHECK(std::fabs(a.mean - b.mean) < 3.0 * b.monte_carlo_se + 1e-9);
        CHECK(b.sd == doctest::Approx(a.sd).epsilon(0.05));
    }
    CHECK(exact.targets.at("n3").monte_carlo_se == 0.0);
    CHECK(lw.effective_sample_size > 0.0);
    CHECK(lw.effective_sample_size <= 1000000.0);
}

TEST_CASE("query: interval spanning everything equals the marginal") {
    Rng rng(205);
    const auto bn = random_bn(rng, 4, 0.5);
    const auto joint = to_joint(bn);
    Evidence e;
    e["n1"] = EvidenceValue::interval(-1e9, 1e9);
    const auto res = query(bn, {"n3"}, e, QueryEngine::LogicSampling, 400000, 17);
    const auto i3 = joint.index_of("n3");
    const auto& t = res.targets.at("n3");
    CHECK(std::fabs(t.mean - joint.mean(i3)) < 4.0 * t.monte_carlo_se + 1e-9);
    CHECK(t.sd == doctest::Approx(std::sqrt(joint.covariance(i3, i3))).epsilon(0.02));
}

TEST_CASE("query: top-quartile interval matches the truncated-normal oracle") {
    // standard bivariate pair, rho = 0.8; evidence X in its top quartile.
    // E[Y | X > q75] = rho * phi(q75)/(1 - Phi(q75)) = 1.01688503...
    const double rho = 0.8;
    const auto bn = make_bn({{"x", NodeKind::Trait, 0}, {"y", NodeKind::Trait, 1}},
                            {{"x", "y", rho}}, {{"x", {0, 1}}, {"y", {0, 1 - rho * rho}}});
    const double q75 = 0.67448975019608174;
    Evidence e;
    e["x"] = EvidenceValue::interval(q75, 1e9);
    for (const auto engine : {QueryEngine::LogicSampling, QueryEngine::LikelihoodWeighting}) {
        const auto res = query(bn, {"y"}, e, engine, 1000000, 23);
        CHECK(res.targets.at("y").mean == doctest::Approx(1.0168850325891422).epsilon(0.01));
    }
}

TEST_CASE("engine-specific errors") {
    Rng rng(206);
    const auto bn = random_bn(rng, 3, 0.5);
    Evidence point;
    point["n0"] = EvidenceValue::point(0.0);
    CHECK_THROWS_AS(query(bn, {"n2"}, point, QueryEngine::LogicSampling, 1000, 1), UsageError);
    Evidence impossible;
    impossible["n0"] = EvidenceValue::interval(1e8, 1e8 + 1);
    CHECK_THROWS_AS(query(bn, {"n2"}, impossible, QueryEngine::LogicSampling, 1000, 1),
                    NumericalError);
    CHECK_THROWS_AS(EvidenceValue::interval(2.0, 1.0), UsageError);
}

TEST_CASE("predict: parentless traits and d-separated snps give marginal means") {
    GenotypeMatrix g;
    g.snp_ids = {"s1"};
    g.individual_ids = {"a", "b"};
    g.counts.resize(2, 1);
    g.counts << 0, 2;

    const auto bn = make_bn({{"s1", NodeKind::Snp, -1}, {"t1", NodeKind::Trait, 0}}, {},
                            {{"s1", {1.0, 0.5}}, {"t1", {7.0, 1.0}}});
    for (const auto mode : {PredictionMode::Genetic, PredictionMode::Causal}) {
        TraitMatrix empty_traits;
        empty_traits.individual_ids = {"a", "b"};
        const auto p = predict(bn, g, mode, &empty_traits);
        CHECK(p.trait_ids == std::vector<std::string>{"t1"});
        CHECK(p.values(0, 0) == doctest::Approx(7.0));
        CHECK(p.values(1, 0) == doctest::Approx(7.0));
    }
}

TEST_CASE("causal prediction error variance approximates the residual variance") {
    Rng rng(207);
    const Eigen::Index n = 10000;
    SimSpec spec;
    spec.n = n;
    spec.s = 4;
    spec.seed = 31;
    spec.traits.push_back({"t1", 0, {{"snp1", 1.0}}, 0.8, 0.0});
    spec.traits.push_back({"t2", 1, {{"t1", 0.9}, {"snp3", -0.7}}, 0.6, 1.0});
    const auto sim = simulate(spec);
    const auto p = predict(sim.truth, sim.data.genotypes, PredictionMode::Causal,
                           &sim.data.traits);
    for (std::size_t k = 0; k < p.trait_ids.size(); ++k) {
        const Eigen::VectorXd err =
            p.values.col(static_cast<Eigen::Index>(k)) - sim.data.column(p.trait_ids[k]);
        const double v = err.squaredNorm() / static_cast<double>(n - 1);
        const double truth = sim.truth.local(p.trait_ids[k]).residual_variance;
        CHECK(v == doctest::Approx(truth).epsilon(0.10));
    }
}

TEST_CASE("causal mode requires observed parent traits") {
    const auto bn = make_bn({{"t1", NodeKind::Trait, 0}, {"t2", NodeKind::Trait, 1}},
                            {{"t1", "t2", 1.0}}, {{"t1", {0, 1}}, {"t2", {0, 1}}});
    GenotypeMatrix g;
    g.individual_ids = {"a"};
    g.counts.resize(1, 0);
    TraitMatrix t;
    t.individual_ids = {"a"};
    t.trait_ids = {};
    t.values.resize(1, 0);
    CHECK_THROWS_AS(predict(bn, g, PredictionMode::Causal, &t), DataError);
}

TEST_CASE("reconstructed coefficients equal -omega_ij / omega_ii") {
    Rng rng(208);
    for (int rep = 0; rep < 20; ++rep) {
        const auto bn = random_bn(rng, 6, 0.99);  // saturated along the order
        const auto j = to_joint(bn);
        const auto back = bn_from_joint(j, bn.dag.nodes());
        for (const auto& [id, ld] : bn.locals) {
            const auto& rld = back.local(id);
            CHECK(rld.residual_variance == doctest::Approx(ld.residual_variance).epsilon(1e-8));
            for (const auto& [p, beta] : ld.coefficients) {
                CHECK(rld.coefficients.at(p) == doctest::Approx(beta).epsilon(1e-8));
            }
        }
        // round trip through the joint
        const auto j2 = to_joint(back);
        CHECK((j2.covariance - j.covariance).norm() < 1e-6 * j.covariance.norm());
    }
}

TEST_CASE("conditioning on parents reproduces the local distribution") {
    Rng rng(209);
    for (int rep = 0; rep < 10; ++rep) {
        const auto bn = random_bn(rng, 5, 0.5);
        const auto j = to_joint(bn);
        // pick the last node in topological order: all others can be evidence
        const auto order = bn.dag.topological_order();
        const std::string target = order.back();
        Evidence e;
        std::map<std::string, double> parent_values;
        for (const auto& id : order) {
            if (id == target) continue;
            const double v = rng.uniform(-2.0, 2.0);
            e[id] = EvidenceValue::point(v);
            parent_values[id] = v;
        }
        const auto cond = condition_exact(j, e);
        CHECK(cond.mean(0) ==
              doctest::Approx(bn.local_mean(target, parent_values)).epsilon(1e-8));
        CHECK(cond.covariance(0, 0) ==
              doctest::Approx(bn.local(target).residual_variance).epsilon(1e-8));
    }
}
