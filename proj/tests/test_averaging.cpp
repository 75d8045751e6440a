#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gnbn/averaging.hpp"
#include "gnbn/errors.hpp"

using namespace gnbn;

namespace {

Node snp(const std::string& id) { return {id, NodeKind::Snp, -1}; }
Node trait(const std::string& id, int tier) { return {id, NodeKind::Trait, tier}; }

ArcStrengthTable table_from(const std::vector<double>& strengths) {
    ArcStrengthTable t;
    t.network_count = 100;
    int k = 0;
    for (const double s : strengths) t.arcs[{"p" + std::to_string(k++), "c"}] = s;
    return t;
}

// Brute-force threshold search over the same candidate set, written
// independently of the library implementation.
double brute_force_threshold(const std::vector<double>& strengths) {
    std::vector<double> sorted = strengths;
    std::sort(sorted.begin(), sorted.end());
    auto ecdf = [&](double x) {
        return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) -
                                   sorted.begin()) /
               static_cast<double>(sorted.size());
    };
    std::vector<double> cands = sorted;
    cands.insert(cands.begin(), 0.0);
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    std::vector<double> grid = cands;
    grid.push_back(1.0);
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    double best_t = cands.front(), best = 1e300;
    for (const double t : cands) {
        double dist = 0.0;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            dist += (grid[i + 1] - grid[i]) * std::fabs(ecdf(grid[i]) - ecdf(t));
        }
        if (dist < best) {
            best = dist;
            best_t = t;
        }
    }
    return best_t;
}

}  // namespace

TEST_CASE("arc strengths are network frequencies") {
    const std::vector<Node> nodes{snp("s"), trait("a", 0), trait("b", 1)};
    Dag base{nodes};
    std::vector<Dag> nets;
    for (int i = 0; i < 4; ++i) {
        Dag d = base.add_arc("s", "a");  // in all four
        if (i < 2) d = d.add_arc("a", "b");  // in half
        nets.push_back(d);
    }
    const auto t = arc_strengths(nets);
    CHECK(t.network_count == 4);
    CHECK(t.arcs.at({"s", "a"}) == doctest::Approx(1.0));
    CHECK(t.arcs.at({"a", "b"}) == doctest::Approx(0.5));
    CHECK(t.arcs.count({"b", "a"}) == 0);  // absent means zero

    // 49 of 100 networks -> 0.49
    std::vector<Dag> many;
    for (int i = 0; i < 100; ++i) {
        many.push_back(i < 49 ? base.add_arc("s", "a") : base);
    }
    CHECK(arc_strengths(many).arcs.at({"s", "a"}) == doctest::Approx(0.49));

    std::vector<Dag> mismatched{base, Dag{{snp("s")}}};
    CHECK_THROWS_AS(arc_strengths(mismatched), DataError);
}

TEST_CASE("threshold separates two clusters and keeps exactly the high one") {
    std::vector<double> strengths(50, 0.01);
    strengths.insert(strengths.end(), 10, 0.99);
    const auto t = table_from(strengths);
    const double thr = estimate_threshold(t);
    CHECK(thr < 0.99);
    int kept = 0;
    for (const auto& [arc, f] : t.arcs) kept += static_cast<int>(f > thr);
    CHECK(kept == 10);
}

TEST_CASE("degenerate unanimity keeps every arc") {
    const auto t = table_from(std::vector<double>(8, 1.0));
    const double thr = estimate_threshold(t);
    for (const auto& [arc, f] : t.arcs) CHECK(f > thr);
}

TEST_CASE("near-uniform strengths give a threshold within one step of 0.5") {
    std::vector<double> strengths;
    for (int i = 1; i <= 100; ++i) strengths.push_back(i / 100.0);
    const double thr = estimate_threshold(table_from(strengths));
    CHECK(thr >= 0.49);
    CHECK(thr <= 0.51);
}

TEST_CASE("threshold equals an independent brute-force minimizer") {
    const std::vector<std::vector<double>> cases{
        {0.2, 0.2, 0.8, 0.9, 1.0},
        {0.05, 0.1, 0.15, 0.85, 0.9},
        {0.5},
        {0.1, 0.9},
        {0.33, 0.33, 0.34, 0.66, 0.67},
        {1.0, 1.0, 0.01},
    };
    for (const auto& c : cases) {
        CHECK(estimate_threshold(table_from(c)) == doctest::Approx(brute_force_threshold(c)));
    }
    ArcStrengthTable empty;
    CHECK_THROWS_AS(estimate_threshold(empty), UsageError);
}

TEST_CASE("averaged network applies frequency order, cycles, tiers, isolation") {
    const std::vector<Node> nodes{snp("s1"), snp("s2"), trait("a", 0), trait("b", 0)};
    ArcStrengthTable t;
    t.network_count = 100;
    t.arcs[{"a", "b"}] = 0.6;
    t.arcs[{"b", "a"}] = 0.55;  // loses to the opposite direction
    t.arcs[{"s1", "a"}] = 0.9;
    t.arcs[{"s2", "b"}] = 0.3;  // below threshold -> s2 isolated -> dropped

    const auto avg = averaged_network(t, 0.49, nodes);
    CHECK(avg.has_arc("a", "b"));
    CHECK_FALSE(avg.has_arc("b", "a"));
    CHECK(avg.has_arc("s1", "a"));
    CHECK_FALSE(avg.has_node("s2"));
    CHECK(avg.has_node("b"));  // traits always retained

    // single arc above threshold
    ArcStrengthTable one;
    one.network_count = 10;
    one.arcs[{"s1", "a"}] = 0.6;
    const auto single = averaged_network(one, 0.49, nodes);
    CHECK(single.num_arcs() == 1);

    CHECK_THROWS_AS(averaged_network(t, 1.5, nodes), UsageError);
}

TEST_CASE("raising the threshold never adds arcs") {
    const std::vector<Node> nodes{snp("s1"), snp("s2"), trait("a", 0), trait("b", 1)};
    ArcStrengthTable t;
    t.network_count = 100;
    t.arcs[{"s1", "a"}] = 0.8;
    t.arcs[{"s2", "a"}] = 0.5;
    t.arcs[{"a", "b"}] = 0.65;
    t.arcs[{"s1", "b"}] = 0.3;
    std::size_t prev = 100;
    for (double thr = 0.0; thr <= 1.0; thr += 0.05) {
        const auto avg = averaged_network(t, thr, nodes);
        CHECK(avg.num_arcs() <= prev);
        prev = avg.num_arcs();
    }
}
