#include "gnbn/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <map>

#include "gnbn/errors.hpp"
#include "gnbn/math.hpp"
#include "gnbn/stats.hpp"

namespace gnbn {

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kImprovementTol = 1e-10;

// Visits subsets of pool by increasing size (then lexicographic position),
// stopping early when visit returns true.
bool for_each_subset(const std::vector<Eigen::Index>& pool, int max_size,
                     const std::function<bool(const std::vector<Eigen::Index>&)>& visit) {
    const int limit = std::min<int>(max_size, static_cast<int>(pool.size()));
    std::vector<Eigen::Index> subset;
    for (int size = 0; size <= limit; ++size) {
        std::vector<int> comb(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) comb[static_cast<std::size_t>(i)] = i;
        while (true) {
            subset.clear();
            for (int i : comb) subset.push_back(pool[static_cast<std::size_t>(i)]);
            if (visit(subset)) return true;
            // next combination
            int i = size - 1;
            while (i >= 0 &&
                   comb[static_cast<std::size_t>(i)] == static_cast<int>(pool.size()) - size + i) {
                --i;
            }
            if (i < 0) break;
            ++comb[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < size; ++j) {
                comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
            }
        }
    }
    return false;
}

}  // namespace

std::vector<Node> make_nodes(const Dataset& data, const std::set<std::string>& ids) {
    std::vector<Node> nodes;
    for (const auto& id : ids) {
        Node n;
        n.id = id;
        if (data.is_trait(id)) {
            n.kind = NodeKind::Trait;
            n.tier = data.trait_tier(id);
        } else {
            n.kind = NodeKind::Snp;
        }
        nodes.push_back(n);
    }
    return nodes;
}

HitonResult hiton_pc(const std::string& target, const std::set<std::string>& candidates,
                     const Dataset& data, const SearchConfig& cfg) {
    if (candidates.empty()) throw UsageError("hiton_pc: empty candidate set");
    if (!data.is_trait(target)) throw UsageError("hiton_pc: target must be a trait");

    HitonResult result;
    result.target = target;

    // column 0 = target, then candidates in sorted-id order
    std::vector<std::string> cand_ids(candidates.begin(), candidates.end());
    Eigen::MatrixXd m(data.n(), static_cast<Eigen::Index>(cand_ids.size()) + 1);
    m.col(0) = data.column(target);
    for (std::size_t j = 0; j < cand_ids.size(); ++j) {
        m.col(static_cast<Eigen::Index>(j) + 1) = data.column(cand_ids[j]);
    }
    const Eigen::MatrixXd corr = correlation_matrix(m);
    const auto n = data.n();

    // rank candidates by marginal association, ties by id (already sorted)
    struct Ranked {
        double p;
        Eigen::Index col;
    };
    std::vector<Ranked> open;
    for (std::size_t j = 0; j < cand_ids.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j) + 1;
        const auto t = ci_test_from_corr(corr, n, 0, col, {}, cfg.alpha);
        ++result.test_count;
        if (t.dependent) open.push_back({t.p_value, col});
    }
    std::stable_sort(open.begin(), open.end(),
                     [](const Ranked& a, const Ranked& b) { return a.p < b.p; });

    std::vector<Eigen::Index> pc;
    auto independent_given_some_subset = [&](Eigen::Index cand,
                                             const std::vector<Eigen::Index>& pool) {
        return for_each_subset(pool, cfg.max_cond_size, [&](const std::vector<Eigen::Index>& z) {
            const auto t = ci_test_from_corr(corr, n, 0, cand, z, cfg.alpha);
            ++result.test_count;
            return !t.dependent;
        });
    };

    // forward phase
    for (const auto& cand : open) {
        if (!independent_given_some_subset(cand.col, pc)) pc.push_back(cand.col);
    }

    // backward correction
    for (std::size_t i = 0; i < pc.size();) {
        std::vector<Eigen::Index> rest;
        for (std::size_t j = 0; j < pc.size(); ++j) {
            if (j != i) rest.push_back(pc[j]);
        }
        if (independent_given_some_subset(pc[i], rest)) {
            pc.erase(pc.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }

    for (Eigen::Index col : pc) result.pc_set.insert(cand_ids[static_cast<std::size_t>(col - 1)]);
    return result;
}

std::set<std::string> mb_filter(const Dataset& data, const SearchConfig& cfg, long* test_count) {
    if (data.traits.num_traits() == 0) throw UsageError("mb_filter: dataset has no traits");

    const auto all_ids = data.column_ids();
    std::set<std::string> retained(data.traits.trait_ids.begin(), data.traits.trait_ids.end());
    long tests = 0;
    for (const auto& trait : data.traits.trait_ids) {
        std::set<std::string> candidates(all_ids.begin(), all_ids.end());
        candidates.erase(trait);
        const auto res = hiton_pc(trait, candidates, data, cfg);
        tests += res.test_count;
        retained.insert(res.pc_set.begin(), res.pc_set.end());
    }
    if (test_count) *test_count = tests;
    return retained;
}

double bic_local(const std::string& node, const std::set<std::string>& parents,
                 const Dataset& data) {
    const Eigen::VectorXd y = data.column(node);
    const auto n = y.size();
    const auto p = static_cast<Eigen::Index>(parents.size());
    if (n <= p + 1) return -std::numeric_limits<double>::infinity();

    double rss;
    if (p == 0) {
        rss = (y.array() - y.mean()).square().sum();
    } else {
        Eigen::MatrixXd X(n, p + 1);
        X.col(0).setOnes();
        Eigen::Index j = 1;
        for (const auto& parent : parents) X.col(j++) = data.column(parent);
        const Eigen::MatrixXd xtx = X.transpose() * X;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
        if (lu.rank() < p + 1) return -std::numeric_limits<double>::infinity();
        const Eigen::VectorXd beta = lu.solve(X.transpose() * y);
        rss = (y - X * beta).squaredNorm();
    }

    const double sigma2 = std::max(rss / static_cast<double>(n), kVarianceFloor);
    const double loglik =
        -0.5 * static_cast<double>(n) * (std::log(2.0 * M_PI * sigma2) + 1.0);
    const double k = static_cast<double>(p) + 2.0;  // coefficients + intercept + variance
    return loglik - 0.5 * k * std::log(static_cast<double>(n));
}

double bic_score(const Dag& d, const Dataset& data) {
    double total = 0.0;
    for (const auto& node : d.nodes()) total += bic_local(node.id, d.parents(node.id), data);
    return total;
}

namespace {

struct ScoreCache {
    const Dataset& data;
    std::map<std::pair<std::string, std::set<std::string>>, double> cache;

    double get(const std::string& node, const std::set<std::string>& parents) {
        const auto key = std::make_pair(node, parents);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const double v = bic_local(node, parents, data);
        cache.emplace(key, v);
        return v;
    }
};

Dag greedy_climb(Dag dag, ScoreCache& scores) {
    std::vector<std::string> ids;
    for (const auto& n : dag.nodes()) ids.push_back(n.id);
    std::sort(ids.begin(), ids.end());

    while (true) {
        double best_delta = kImprovementTol;
        int best_kind = -1;  // 0 add, 1 delete, 2 reverse
        std::string best_p, best_c;

        auto consider = [&](int kind, const std::string& p, const std::string& c, double delta) {
            if (delta > best_delta) {
                best_delta = delta;
                best_kind = kind;
                best_p = p;
                best_c = c;
            }
        };

        for (const auto& p : ids) {
            for (const auto& c : ids) {
                if (p == c) continue;
                if (dag.has_arc(p, c)) {
                    const auto cur_parents = dag.parents(c);
                    const double cur = scores.get(c, cur_parents);
                    auto minus = cur_parents;
                    minus.erase(p);
                    consider(1, p, c, scores.get(c, minus) - cur);

                    // reverse p->c to c->p
                    if (dag.tier_allows(c, p)) {
                        const Dag removed = dag.remove_arc(p, c);
                        if (removed.can_add_arc(c, p)) {
                            auto p_parents = dag.parents(p);
                            const double cur_p = scores.get(p, p_parents);
                            p_parents.insert(c);
                            const double delta = (scores.get(c, minus) - cur) +
                                                 (scores.get(p, p_parents) - cur_p);
                            consider(2, p, c, delta);
                        }
                    }
                } else if (dag.can_add_arc(p, c)) {
                    auto plus = dag.parents(c);
                    const double cur = scores.get(c, plus);
                    plus.insert(p);
                    consider(0, p, c, scores.get(c, plus) - cur);
                }
            }
        }

        if (best_kind < 0) return dag;
        if (best_kind == 0) {
            dag = dag.add_arc(best_p, best_c);
        } else if (best_kind == 1) {
            dag = dag.remove_arc(best_p, best_c);
        } else {
            dag = dag.reverse_arc(best_p, best_c);
        }
    }
}

double total_score(const Dag& dag, ScoreCache& scores) {
    double total = 0.0;
    for (const auto& n : dag.nodes()) total += scores.get(n.id, dag.parents(n.id));
    return total;
}

Dag perturb(const Dag& start, Rng& rng) {
    std::vector<std::string> ids;
    for (const auto& n : start.nodes()) ids.push_back(n.id);
    std::sort(ids.begin(), ids.end());

    Dag dag = start;
    const std::size_t attempts = 2 * ids.size();
    for (std::size_t k = 0; k < attempts; ++k) {
        const auto& p = ids[rng.below(ids.size())];
        const auto& c = ids[rng.below(ids.size())];
        if (p == c) continue;
        if (dag.has_arc(p, c)) {
            dag = dag.remove_arc(p, c);
        } else if (dag.can_add_arc(p, c)) {
            dag = dag.add_arc(p, c);
        }
    }
    return dag;
}

}  // namespace

Dag hill_climb(const Dataset& data, const std::set<std::string>& nodes,
               const SearchConfig& cfg) {
    for (const auto& trait : data.traits.trait_ids) {
        if (nodes.count(trait) == 0) {
            throw UsageError("hill_climb: node set must include trait " + trait);
        }
    }

    ScoreCache scores{data, {}};
    const Dag empty(make_nodes(data, nodes));

    Dag best = greedy_climb(empty, scores);
    double best_score = total_score(best, scores);

    const Rng master(cfg.seed);
    for (int r = 1; r <= cfg.restarts; ++r) {
        Rng rng = master.derive(0x68696c6c, static_cast<std::uint64_t>(r));
        const Dag candidate = greedy_climb(perturb(best, rng), scores);
        const double score = total_score(candidate, scores);
        if (score > best_score + kImprovementTol) {
            best = candidate;
            best_score = score;
        }
    }
    return best;
}

}  // namespace gnbn
