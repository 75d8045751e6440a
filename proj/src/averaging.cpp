#include "gnbn/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gnbn/errors.hpp"

namespace gnbn {

ArcStrengthTable arc_strengths(const std::vector<Dag>& networks) {
    if (networks.empty()) throw UsageError("arc_strengths: need at least one network");

    std::set<std::string> universe;
    for (const auto& n : networks.front().nodes()) universe.insert(n.id);
    for (const auto& net : networks) {
        std::set<std::string> ids;
        for (const auto& n : net.nodes()) ids.insert(n.id);
        if (ids != universe) {
            throw DataError("arc_strengths: networks have mismatched node sets");
        }
    }

    ArcStrengthTable table;
    table.network_count = static_cast<int>(networks.size());
    std::map<Arc, int> counts;
    for (const auto& net : networks) {
        for (const auto& arc : net.arcs()) ++counts[arc];
    }
    for (const auto& [arc, c] : counts) {
        table.arcs[arc] = static_cast<double>(c) / static_cast<double>(table.network_count);
    }
    return table;
}

double estimate_threshold(const ArcStrengthTable& t) {
    if (t.arcs.empty()) throw UsageError("estimate_threshold: empty strength table");

    std::vector<double> strengths;
    for (const auto& [arc, f] : t.arcs) strengths.push_back(f);
    std::sort(strengths.begin(), strengths.end());
    const auto m = static_cast<double>(strengths.size());

    // breakpoints of both step functions
    std::vector<double> grid = strengths;
    grid.push_back(0.0);
    grid.push_back(1.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    auto ecdf = [&](double x) {
        const auto it = std::upper_bound(strengths.begin(), strengths.end(), x);
        return static_cast<double>(it - strengths.begin()) / m;
    };

    // Candidate thresholds are the observed strengths plus 0 (keep everything);
    // a candidate t treats strengths <= t as noise and the rest as significant,
    // so the ideal CDF is flat at the noise fraction until it jumps at 1.
    std::vector<double> candidates = strengths;
    candidates.insert(candidates.begin(), 0.0);
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double best_t = candidates.front();
    double best_dist = std::numeric_limits<double>::infinity();
    for (const double cand : candidates) {
        const double level = ecdf(cand);  // fraction of strengths <= cand
        double dist = 0.0;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double width = grid[i + 1] - grid[i];
            dist += width * std::fabs(ecdf(grid[i]) - level);
        }
        if (dist < best_dist) {
            best_dist = dist;
            best_t = cand;
        }
    }
    return best_t;
}

Dag averaged_network(const ArcStrengthTable& t, double threshold,
                     const std::vector<Node>& nodes) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw UsageError("averaged_network: threshold must be in [0, 1]");
    }

    std::vector<std::pair<Arc, double>> ordered(t.arcs.begin(), t.arcs.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Dag dag{nodes};
    for (const auto& [arc, freq] : ordered) {
        if (freq <= threshold) break;
        if (dag.can_add_arc(arc.first, arc.second)) dag = dag.add_arc(arc.first, arc.second);
    }

    // drop SNPs left without any connection
    const auto isolated = dag.isolated_nodes();
    std::vector<Node> retained;
    for (const auto& n : nodes) {
        if (n.kind == NodeKind::Trait || isolated.count(n.id) == 0) retained.push_back(n);
    }
    if (retained.size() == nodes.size()) return dag;

    Dag pruned{retained};
    for (const auto& arc : dag.arcs()) pruned = pruned.add_arc(arc.first, arc.second);
    return pruned;
}

}  // namespace gnbn
