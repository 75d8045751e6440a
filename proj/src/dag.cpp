#include "gnbn/dag.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "gnbn/errors.hpp"

namespace gnbn {

Dag::Dag(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!index_.emplace(nodes_[i].id, i).second) {
            throw DataError("duplicate node id: " + nodes_[i].id);
        }
        parents_[nodes_[i].id];
        children_[nodes_[i].id];
    }
}

const Node& Dag::node(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DataError("unknown node: " + id);
    return nodes_[it->second];
}

bool Dag::has_node(const std::string& id) const { return index_.count(id) > 0; }

bool Dag::has_arc(const std::string& parent, const std::string& child) const {
    return arcs_.count({parent, child}) > 0;
}

bool Dag::tier_allows(const std::string& parent, const std::string& child) const {
    const Node& p = node(parent);
    const Node& c = node(child);
    if (p.kind == NodeKind::Trait && c.kind == NodeKind::Snp) return false;
    if (p.kind == NodeKind::Trait && c.kind == NodeKind::Trait && p.tier > c.tier) return false;
    return true;
}

std::vector<std::string> Dag::find_path(const std::string& from, const std::string& to) const {
    std::map<std::string, std::string> pred;
    std::deque<std::string> queue = {from};
    pred[from] = from;
    while (!queue.empty()) {
        const std::string cur = queue.front();
        queue.pop_front();
        if (cur == to) {
            std::vector<std::string> path = {to};
            std::string v = to;
            while (v != from) {
                v = pred[v];
                path.push_back(v);
            }
            std::reverse(path.begin(), path.end());
            return path;
        }
        for (const auto& ch : children_.at(cur)) {
            if (pred.emplace(ch, cur).second) queue.push_back(ch);
        }
    }
    return {};
}

bool Dag::path_exists(const std::string& from, const std::string& to) const {
    return !find_path(from, to).empty();
}

bool Dag::can_add_arc(const std::string& parent, const std::string& child) const {
    if (!has_node(parent) || !has_node(child)) return false;
    if (parent == child || has_arc(parent, child)) return false;
    if (!tier_allows(parent, child)) return false;
    return !path_exists(child, parent);
}

Dag Dag::add_arc(const std::string& parent, const std::string& child) const {
    node(parent);
    node(child);
    if (parent == child) throw DataError("self-loop on node " + parent);
    if (has_arc(parent, child)) throw DataError("arc already present: " + parent + " -> " + child);
    if (!tier_allows(parent, child)) {
        throw DataError("tier violation: arc " + parent + " -> " + child + " not allowed");
    }
    const auto path = find_path(child, parent);
    if (!path.empty()) {
        std::ostringstream oss;
        oss << "arc " << parent << " -> " << child << " would create a cycle through ";
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (i > 0) oss << " -> ";
            oss << path[i];
        }
        throw DataError(oss.str());
    }
    Dag out = *this;
    out.arcs_.insert({parent, child});
    out.parents_[child].insert(parent);
    out.children_[parent].insert(child);
    return out;
}

Dag Dag::remove_arc(const std::string& parent, const std::string& child) const {
    if (!has_arc(parent, child)) throw DataError("arc absent: " + parent + " -> " + child);
    Dag out = *this;
    out.arcs_.erase({parent, child});
    out.parents_[child].erase(parent);
    out.children_[parent].erase(child);
    return out;
}

Dag Dag::reverse_arc(const std::string& parent, const std::string& child) const {
    return remove_arc(parent, child).add_arc(child, parent);
}

std::set<std::string> Dag::parents(const std::string& id) const {
    node(id);
    return parents_.at(id);
}

std::set<std::string> Dag::children(const std::string& id) const {
    node(id);
    return children_.at(id);
}

std::set<std::string> Dag::markov_blanket(const std::string& id) const {
    node(id);
    std::set<std::string> mb = parents_.at(id);
    for (const auto& child : children_.at(id)) {
        mb.insert(child);
        for (const auto& coparent : parents_.at(child)) mb.insert(coparent);
    }
    mb.erase(id);
    return mb;
}

bool Dag::d_separated(const std::string& x, const std::string& y,
                      const std::set<std::string>& z) const {
    node(x);
    node(y);
    if (x == y) throw UsageError("d_separated: x and y must differ");
    if (z.count(x) || z.count(y)) throw UsageError("d_separated: x, y must not be in z");

    // ancestors of z (inclusive), for collider activation
    std::set<std::string> anc_z;
    std::deque<std::string> queue(z.begin(), z.end());
    while (!queue.empty()) {
        const std::string cur = queue.front();
        queue.pop_front();
        if (!anc_z.insert(cur).second) continue;
        for (const auto& p : parents_.at(cur)) queue.push_back(p);
    }

    // Reachability over (node, arrived-via-child-edge?) states.
    // true = entered through an arc pointing at the node.
    std::set<std::pair<std::string, bool>> visited;
    std::deque<std::pair<std::string, bool>> frontier = {{x, false}};
    while (!frontier.empty()) {
        auto [cur, into] = frontier.front();
        frontier.pop_front();
        if (!visited.insert({cur, into}).second) continue;
        if (cur == y && cur != x) return false;

        const bool observed = z.count(cur) > 0;
        if (!into) {
            // arrived from a child (or start): pass through unless observed
            if (!observed) {
                for (const auto& p : parents_.at(cur)) frontier.push_back({p, false});
                for (const auto& c : children_.at(cur)) frontier.push_back({c, true});
            }
        } else {
            // arrived from a parent
            if (!observed) {
                for (const auto& c : children_.at(cur)) frontier.push_back({c, true});
            }
            if (anc_z.count(cur)) {
                // collider with observed descendant: path may continue upward
                for (const auto& p : parents_.at(cur)) frontier.push_back({p, false});
            }
        }
    }
    return true;
}

std::vector<std::string> Dag::topological_order() const {
    std::map<std::string, std::size_t> indegree;
    for (const auto& n : nodes_) indegree[n.id] = parents_.at(n.id).size();

    std::set<std::string> ready;
    for (const auto& [id, deg] : indegree) {
        if (deg == 0) ready.insert(id);
    }

    std::vector<std::string> order;
    while (!ready.empty()) {
        const std::string cur = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(cur);
        for (const auto& c : children_.at(cur)) {
            if (--indegree[c] == 0) ready.insert(c);
        }
    }
    if (order.size() != nodes_.size()) throw DataError("graph contains a cycle");
    return order;
}

std::set<std::string> Dag::isolated_nodes() const {
    std::set<std::string> out;
    for (const auto& n : nodes_) {
        if (parents_.at(n.id).empty() && children_.at(n.id).empty()) out.insert(n.id);
    }
    return out;
}

}  // namespace gnbn
