#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gnbn {

enum class NodeKind { Snp, Trait };

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Snp;
    int tier = -1;  // traits only; SNPs implicitly -1
};

using Arc = std::pair<std::string, std::string>;  // parent -> child

// Directed acyclic graph over typed nodes. Arcs obey the tier rules:
// never Trait -> SNP, never higher-tier trait -> lower-tier trait.
// Mutating operations return a new value.
class Dag {
public:
    Dag() = default;
    explicit Dag(std::vector<Node> nodes);

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(const std::string& id) const;
    bool has_node(const std::string& id) const;
    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_arcs() const { return arcs_.size(); }

    const std::set<Arc>& arcs() const { return arcs_; }
    bool has_arc(const std::string& parent, const std::string& child) const;

    // Throws DataError on an unknown node, a tier violation, or a cycle.
    Dag add_arc(const std::string& parent, const std::string& child) const;
    Dag remove_arc(const std::string& parent, const std::string& child) const;
    Dag reverse_arc(const std::string& parent, const std::string& child) const;

    // True iff parent -> child would respect the tier rules (ignoring cycles).
    bool tier_allows(const std::string& parent, const std::string& child) const;
    // True iff adding parent -> child keeps the graph acyclic and tier-valid.
    bool can_add_arc(const std::string& parent, const std::string& child) const;

    std::set<std::string> parents(const std::string& id) const;
    std::set<std::string> children(const std::string& id) const;
    std::set<std::string> markov_blanket(const std::string& id) const;

    // Standard path-blocking semantics (collider / chain / fork).
    bool d_separated(const std::string& x, const std::string& y,
                     const std::set<std::string>& z) const;

    // Parents before children; ties broken by node id.
    std::vector<std::string> topological_order() const;

    // Nodes with no incident arcs.
    std::set<std::string> isolated_nodes() const;

private:
    bool path_exists(const std::string& from, const std::string& to) const;
    std::vector<std::string> find_path(const std::string& from, const std::string& to) const;

    std::vector<Node> nodes_;
    std::map<std::string, std::size_t> index_;
    std::set<Arc> arcs_;
    std::map<std::string, std::set<std::string>> parents_;
    std::map<std::string, std::set<std::string>> children_;
};

}  // namespace gnbn
