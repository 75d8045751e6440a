#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "gnbn/dag.hpp"
#include "gnbn/errors.hpp"
#include "gnbn/math.hpp"

using namespace gnbn;

namespace {

Node snp(const std::string& id) { return {id, NodeKind::Snp, -1}; }
Node trait(const std::string& id, int tier) { return {id, NodeKind::Trait, tier}; }

// Brute-force d-separation oracle: enumerate every undirected path and apply
// the collider/chain/fork blocking rules directly.
bool dsep_oracle(const Dag& d, const std::string& x, const std::string& y,
                 const std::set<std::string>& z) {
    std::set<std::string> z_ancestors = z;
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& [p, c] : d.arcs()) {
            if (z_ancestors.count(c) && !z_ancestors.count(p)) {
                z_ancestors.insert(p);
                grew = true;
            }
        }
    }

    std::vector<std::string> path{x};
    std::set<std::string> on_path{x};
    bool connected = false;

    std::function<void()> extend = [&]() {
        if (connected) return;
        // copy: push_back below may reallocate the path vector
        const std::string tail = path.back();
        std::set<std::string> neighbors = d.parents(tail);
        const auto ch = d.children(tail);
        neighbors.insert(ch.begin(), ch.end());
        for (const auto& next : neighbors) {
            if (on_path.count(next)) continue;
            // check blocking at the junction 'tail' (if the path has >= 2 edges)
            if (path.size() >= 2) {
                const std::string prev = path[path.size() - 2];
                const bool into_tail = d.has_arc(prev, tail);
                const bool out_of_tail = d.has_arc(tail, next);
                const bool collider = into_tail && !out_of_tail && d.has_arc(next, tail);
                if (collider) {
                    if (!z_ancestors.count(tail)) continue;  // blocked
                } else {
                    if (z.count(tail)) continue;  // chain or fork blocked by z
                }
            }
            if (next == y) {
                connected = true;
                return;
            }
            path.push_back(next);
            on_path.insert(next);
            extend();
            path.pop_back();
            on_path.erase(next);
        }
    };
    extend();
    return !connected;
}

Dag random_dag(Rng& rng, int n_snps, int n_traits, double arc_prob) {
    std::vector<Node> nodes;
    for (int i = 0; i < n_snps; ++i) nodes.push_back(snp("s" + std::to_string(i)));
    for (int i = 0; i < n_traits; ++i) nodes.push_back(trait("t" + std::to_string(i), i % 2));
    Dag d{nodes};
    for (const auto& a : nodes) {
        for (const auto& b : nodes) {
            if (a.id == b.id || rng.uniform() > arc_prob) continue;
            if (d.can_add_arc(a.id, b.id)) d = d.add_arc(a.id, b.id);
        }
    }
    return d;
}

}  // namespace

TEST_CASE("tier rules") {
    Dag d{{snp("s1"), trait("early", 0), trait("late", 1)}};
    CHECK_NOTHROW(d = d.add_arc("s1", "early"));       // SNP -> trait fine
    CHECK_THROWS_AS(d.add_arc("early", "s1"), DataError);  // trait -> SNP forbidden
    CHECK_THROWS_AS(d.add_arc("late", "early"), DataError);  // later tier -> earlier
    CHECK_NOTHROW(d.add_arc("early", "late"));

    Dag same{{trait("a", 0), trait("b", 0)}};
    CHECK(same.tier_allows("a", "b"));
    CHECK(same.tier_allows("b", "a"));  // within-tier orientable either way
}

TEST_CASE("cycle detection reports the path") {
    Dag d{{snp("a"), snp("b"), snp("c")}};
    d = d.add_arc("a", "b").add_arc("b", "c");
    CHECK_THROWS_WITH_AS(d.add_arc("c", "a"), doctest::Contains("a"), DataError);
    CHECK_FALSE(d.can_add_arc("c", "a"));
    CHECK(d.can_add_arc("a", "c"));
}

TEST_CASE("remove and reverse arcs") {
    Dag d{{snp("a"), snp("b")}};
    d = d.add_arc("a", "b");
    CHECK(d.reverse_arc("a", "b").has_arc("b", "a"));
    CHECK(d.remove_arc("a", "b").num_arcs() == 0);
}

TEST_CASE("markov blanket definition") {
    // S1 -> T1 <- T2 and S2 -> T2
    Dag d{{snp("S1"), snp("S2"), trait("T1", 0), trait("T2", 0)}};
    d = d.add_arc("S1", "T1").add_arc("T2", "T1").add_arc("S2", "T2");
    CHECK(d.markov_blanket("T1") == std::set<std::string>{"S1", "T2"});
    CHECK(d.markov_blanket("T2") == std::set<std::string>{"S2", "T1", "S1"});
    Dag iso{{snp("x")}};
    CHECK(iso.markov_blanket("x").empty());
}

TEST_CASE("markov blanket symmetry on random graphs") {
    Rng rng(77);
    for (int rep = 0; rep < 30; ++rep) {
        const Dag d = random_dag(rng, 4, 3, 0.3);
        for (const auto& a : d.nodes()) {
            for (const auto& b : d.nodes()) {
                if (a.id == b.id) continue;
                CHECK(d.markov_blanket(a.id).count(b.id) ==
                      d.markov_blanket(b.id).count(a.id));
            }
        }
    }
}

TEST_CASE("d-separation textbook cases") {
    Dag chain{{snp("x"), snp("m"), snp("y")}};
    chain = chain.add_arc("x", "m").add_arc("m", "y");
    CHECK(chain.d_separated("x", "y", {"m"}));
    CHECK_FALSE(chain.d_separated("x", "y", {}));

    Dag collider{{snp("x"), snp("c"), snp("y")}};
    collider = collider.add_arc("x", "c").add_arc("y", "c");
    CHECK(collider.d_separated("x", "y", {}));
    CHECK_FALSE(collider.d_separated("x", "y", {"c"}));

    Dag fork{{snp("x"), snp("f"), snp("y")}};
    fork = fork.add_arc("f", "x").add_arc("f", "y");
    CHECK_FALSE(fork.d_separated("x", "y", {}));
    CHECK(fork.d_separated("x", "y", {"f"}));

    // collider opened by a descendant of the collision node
    Dag desc{{snp("x"), snp("c"), snp("y"), snp("d")}};
    desc = desc.add_arc("x", "c").add_arc("y", "c").add_arc("c", "d");
    CHECK_FALSE(desc.d_separated("x", "y", {"d"}));
}

TEST_CASE("d-separation agrees with the exhaustive path oracle") {
    Rng rng(99);
    for (int rep = 0; rep < 40; ++rep) {
        const Dag d = random_dag(rng, 4, 2, 0.35);
        const auto& nodes = d.nodes();
        const int n = static_cast<int>(nodes.size());
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                for (unsigned mask = 0; mask < (1u << n); ++mask) {
                    if (mask & ((1u << i) | (1u << j))) continue;
                    std::set<std::string> z;
                    for (int k = 0; k < n; ++k) {
                        if (mask & (1u << k)) z.insert(nodes[static_cast<std::size_t>(k)].id);
                    }
                    const auto& x = nodes[static_cast<std::size_t>(i)].id;
                    const auto& y = nodes[static_cast<std::size_t>(j)].id;
                    REQUIRE(d.d_separated(x, y, z) == dsep_oracle(d, x, y, z));
                }
            }
        }
    }
}

TEST_CASE("everything outside the markov blanket is d-separated given it") {
    Rng rng(55);
    for (int rep = 0; rep < 20; ++rep) {
        const Dag d = random_dag(rng, 4, 3, 0.3);
        for (const auto& a : d.nodes()) {
            const auto mb = d.markov_blanket(a.id);
            for (const auto& b : d.nodes()) {
                if (b.id == a.id || mb.count(b.id)) continue;
                CHECK(d.d_separated(a.id, b.id, mb));
            }
        }
    }
}

TEST_CASE("topological order with id tie-breaks") {
    Dag empty{{snp("b"), snp("a")}};
    CHECK(empty.topological_order() == std::vector<std::string>{"a", "b"});

    Dag chain{{snp("a"), snp("b"), snp("c")}};
    chain = chain.add_arc("a", "b").add_arc("b", "c");
    CHECK(chain.topological_order() == std::vector<std::string>{"a", "b", "c"});

    Dag diamond{{snp("a"), snp("b"), snp("c"), snp("d")}};
    diamond = diamond.add_arc("a", "b").add_arc("a", "c").add_arc("b", "d").add_arc("c", "d");
    CHECK(diamond.topological_order() == std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("isolated nodes") {
    Dag d{{snp("a"), snp("b"), snp("c")}};
    d = d.add_arc("a", "b");
    CHECK(d.isolated_nodes() == std::set<std::string>{"c"});
}
