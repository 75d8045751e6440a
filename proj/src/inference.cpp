#include "gnbn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "gnbn/errors.hpp"

namespace gnbn {

namespace {

double normal_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * M_PI * var);
}

struct TopoModel {
    std::vector<std::string> order;
    std::map<std::string, Eigen::Index> index;
    // per node: parent indices into order, coefficients, intercept, residual sd/var
    std::vector<std::vector<Eigen::Index>> parent_idx;
    std::vector<std::vector<double>> parent_beta;
    std::vector<double> intercept;
    std::vector<double> res_var;
};

TopoModel topo_model(const GaussianBn& bn) {
    TopoModel m;
    m.order = bn.dag.topological_order();
    for (std::size_t i = 0; i < m.order.size(); ++i) {
        m.index[m.order[i]] = static_cast<Eigen::Index>(i);
    }
    for (const auto& id : m.order) {
        const LocalDistribution& ld = bn.local(id);
        std::vector<Eigen::Index> pidx;
        std::vector<double> pbeta;
        for (const auto& [parent, beta] : ld.coefficients) {
            pidx.push_back(m.index.at(parent));
            pbeta.push_back(beta);
        }
        m.parent_idx.push_back(std::move(pidx));
        m.parent_beta.push_back(std::move(pbeta));
        m.intercept.push_back(ld.intercept);
        m.res_var.push_back(ld.residual_variance);
    }
    return m;
}

}  // namespace

Eigen::Index JointGaussian::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == id) return static_cast<Eigen::Index>(i);
    }
    throw DataError("node not in joint distribution: " + id);
}

EvidenceValue EvidenceValue::interval(double lo, double hi) {
    if (lo > hi) throw UsageError("evidence interval has lo > hi");
    return {lo, hi};
}

JointGaussian to_joint(const GaussianBn& bn) {
    const TopoModel m = topo_model(bn);
    const auto k = static_cast<Eigen::Index>(m.order.size());

    JointGaussian j;
    j.order = m.order;
    j.mean.resize(k);
    j.covariance.setZero(k, k);

    for (Eigen::Index i = 0; i < k; ++i) {
        const auto& pidx = m.parent_idx[static_cast<std::size_t>(i)];
        const auto& pbeta = m.parent_beta[static_cast<std::size_t>(i)];

        double mu = m.intercept[static_cast<std::size_t>(i)];
        for (std::size_t a = 0; a < pidx.size(); ++a) mu += pbeta[a] * j.mean(pidx[a]);
        j.mean(i) = mu;

        // Cov(X_i, X_j) = sum_p beta_p Cov(X_p, X_j) for all earlier j
        for (Eigen::Index prev = 0; prev < i; ++prev) {
            double cov = 0.0;
            for (std::size_t a = 0; a < pidx.size(); ++a) {
                cov += pbeta[a] * j.covariance(pidx[a], prev);
            }
            j.covariance(i, prev) = cov;
            j.covariance(prev, i) = cov;
        }
        double var = m.res_var[static_cast<std::size_t>(i)];
        for (std::size_t a = 0; a < pidx.size(); ++a) {
            for (std::size_t b = 0; b < pidx.size(); ++b) {
                var += pbeta[a] * pbeta[b] * j.covariance(pidx[a], pidx[b]);
            }
        }
        j.covariance(i, i) = var;
    }
    return j;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> precision_zero_pattern(
    const JointGaussian& j, double tol) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(j.covariance);
    if (!lu.isInvertible()) {
        throw NumericalError(
            "covariance is singular; refit with OLS or add diagonal jitter before "
            "inspecting the precision matrix");
    }
    const Eigen::MatrixXd prec = lu.inverse();
    const auto k = prec.rows();
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> zero(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) zero(a, b) = std::fabs(prec(a, b)) <= tol;
    }
    return zero;
}

JointGaussian condition_exact(const JointGaussian& j, const Evidence& e) {
    if (e.empty()) return j;

    std::vector<Eigen::Index> keep, cond;
    Eigen::VectorXd values(static_cast<Eigen::Index>(e.size()));
    {
        std::set<std::string> evidence_ids;
        for (const auto& [id, v] : e) {
            if (!v.is_point()) {
                throw UsageError("exact conditioning requires point evidence (node " + id + ")");
            }
            evidence_ids.insert(id);
        }
        Eigen::Index c = 0;
        for (std::size_t i = 0; i < j.order.size(); ++i) {
            if (evidence_ids.count(j.order[i])) {
                cond.push_back(static_cast<Eigen::Index>(i));
                values(c++) = e.at(j.order[i]).lo;
            } else {
                keep.push_back(static_cast<Eigen::Index>(i));
            }
        }
        if (cond.size() != e.size()) {
            for (const auto& [id, v] : e) {
                if (std::find(j.order.begin(), j.order.end(), id) == j.order.end()) {
                    throw DataError("evidence node not in model: " + id);
                }
            }
        }
    }

    const auto n1 = static_cast<Eigen::Index>(keep.size());
    const auto n2 = static_cast<Eigen::Index>(cond.size());
    Eigen::MatrixXd s11(n1, n1), s12(n1, n2), s22(n2, n2);
    Eigen::VectorXd mu1(n1), mu2(n2);
    for (Eigen::Index a = 0; a < n1; ++a) {
        mu1(a) = j.mean(keep[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < n1; ++b) {
            s11(a, b) = j.covariance(keep[static_cast<std::size_t>(a)],
                                     keep[static_cast<std::size_t>(b)]);
        }
        for (Eigen::Index b = 0; b < n2; ++b) {
            s12(a, b) = j.covariance(keep[static_cast<std::size_t>(a)],
                                     cond[static_cast<std::size_t>(b)]);
        }
    }
    for (Eigen::Index a = 0; a < n2; ++a) {
        mu2(a) = j.mean(cond[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < n2; ++b) {
            s22(a, b) = j.covariance(cond[static_cast<std::size_t>(a)],
                                     cond[static_cast<std::size_t>(b)]);
        }
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(s22);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(s22);
        if (!lu.isInvertible()) {
            throw NumericalError("conditioning block is singular");
        }
    }
    const Eigen::MatrixXd gain = ldlt.solve(s12.transpose()).transpose();  // s12 * s22^-1

    JointGaussian out;
    for (Eigen::Index a = 0; a < n1; ++a) {
        out.order.push_back(j.order[static_cast<std::size_t>(keep[static_cast<std::size_t>(a)])]);
    }
    out.mean = mu1 + gain * (values - mu2);
    out.covariance = s11 - gain * s12.transpose();
    // symmetrize against roundoff
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

Eigen::MatrixXd logic_sample(const GaussianBn& bn, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw UsageError("logic_sample: need n >= 1");
    const TopoModel m = topo_model(bn);
    const auto k = static_cast<Eigen::Index>(m.order.size());
    std::vector<double> res_sd;
    for (double v : m.res_var) res_sd.push_back(std::sqrt(v));

    Rng rng(seed);
    Eigen::MatrixXd samples(n, k);
    for (Eigen::Index s = 0; s < n; ++s) {
        for (Eigen::Index i = 0; i < k; ++i) {
            double v = m.intercept[static_cast<std::size_t>(i)];
            const auto& pidx = m.parent_idx[static_cast<std::size_t>(i)];
            const auto& pbeta = m.parent_beta[static_cast<std::size_t>(i)];
            for (std::size_t a = 0; a < pidx.size(); ++a) v += pbeta[a] * samples(s, pidx[a]);
            samples(s, i) = v + res_sd[static_cast<std::size_t>(i)] * rng.normal();
        }
    }
    return samples;
}

namespace {

QueryResult query_exact(const GaussianBn& bn, const std::set<std::string>& targets,
                        const Evidence& e) {
    const JointGaussian cond = condition_exact(to_joint(bn), e);
    QueryResult res;
    res.engine = QueryEngine::Exact;
    for (const auto& t : targets) {
        const Eigen::Index i = cond.index_of(t);
        TargetSummary s;
        s.mean = cond.mean(i);
        s.sd = std::sqrt(std::max(cond.covariance(i, i), 0.0));
        res.targets[t] = s;
    }
    return res;
}

QueryResult query_logic(const GaussianBn& bn, const std::set<std::string>& targets,
                        const Evidence& e, Eigen::Index n_samples, std::uint64_t seed) {
    const TopoModel m = topo_model(bn);
    const auto k = static_cast<Eigen::Index>(m.order.size());
    std::vector<double> res_sd;
    for (double v : m.res_var) res_sd.push_back(std::sqrt(v));

    std::vector<std::pair<Eigen::Index, EvidenceValue>> constraints;
    for (const auto& [id, v] : e) {
        if (v.is_point()) {
            throw UsageError("logic sampling cannot condition on point evidence (node " + id +
                             "); use the exact or likelihood-weighting engine");
        }
        constraints.emplace_back(m.index.at(id), v);
    }
    std::vector<Eigen::Index> target_idx;
    for (const auto& t : targets) target_idx.push_back(m.index.at(t));

    Rng rng(seed);
    Eigen::VectorXd row(k);
    std::vector<double> sum(target_idx.size(), 0.0), sumsq(target_idx.size(), 0.0);
    Eigen::Index accepted = 0;
    for (Eigen::Index s = 0; s < n_samples; ++s) {
        bool ok = true;
        for (Eigen::Index i = 0; i < k; ++i) {
            double v = m.intercept[static_cast<std::size_t>(i)];
            const auto& pidx = m.parent_idx[static_cast<std::size_t>(i)];
            const auto& pbeta = m.parent_beta[static_cast<std::size_t>(i)];
            for (std::size_t a = 0; a < pidx.size(); ++a) v += pbeta[a] * row(pidx[a]);
            row(i) = v + res_sd[static_cast<std::size_t>(i)] * rng.normal();
        }
        for (const auto& [idx, iv] : constraints) {
            if (row(idx) < iv.lo || row(idx) > iv.hi) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        ++accepted;
        for (std::size_t a = 0; a < target_idx.size(); ++a) {
            sum[a] += row(target_idx[a]);
            sumsq[a] += row(target_idx[a]) * row(target_idx[a]);
        }
    }
    if (accepted == 0) {
        throw NumericalError("logic sampling: no sample satisfied the evidence");
    }

    QueryResult res;
    res.engine = QueryEngine::LogicSampling;
    res.effective_sample_size = static_cast<double>(accepted);
    std::size_t a = 0;
    for (const auto& t : targets) {
        TargetSummary s;
        const double n = static_cast<double>(accepted);
        s.mean = sum[a] / n;
        s.sd = std::sqrt(std::max(sumsq[a] / n - s.mean * s.mean, 0.0));
        s.monte_carlo_se = s.sd / std::sqrt(n);
        res.targets[t] = s;
        ++a;
    }
    return res;
}

QueryResult query_weighting(const GaussianBn& bn, const std::set<std::string>& targets,
                            const Evidence& e, Eigen::Index n_samples, std::uint64_t seed) {
    const TopoModel m = topo_model(bn);
    const auto k = static_cast<Eigen::Index>(m.order.size());
    std::vector<double> res_sd;
    for (double v : m.res_var) res_sd.push_back(std::sqrt(v));

    // 0 = free, 1 = point evidence, 2 = interval evidence
    std::vector<int> role(static_cast<std::size_t>(k), 0);
    std::vector<EvidenceValue> value(static_cast<std::size_t>(k));
    for (const auto& [id, v] : e) {
        const auto i = static_cast<std::size_t>(m.index.at(id));
        role[i] = v.is_point() ? 1 : 2;
        value[i] = v;
    }

    // Interval truncation keeps weights unbiased only when no other evidence
    // node sits downstream of an interval node; otherwise reject-sample instead.
    for (const auto& [id, v] : e) {
        if (v.is_point()) continue;
        for (const auto& [other_id, other_v] : e) {
            if (other_id == id) continue;
            // descendant check: a directed path id -> other_id
            std::deque<std::string> queue = {id};
            std::set<std::string> seen;
            bool descendant = false;
            while (!queue.empty()) {
                const std::string cur = queue.front();
                queue.pop_front();
                if (!seen.insert(cur).second) continue;
                for (const auto& c : bn.dag.children(cur)) {
                    if (c == other_id) {
                        descendant = true;
                        break;
                    }
                    queue.push_back(c);
                }
                if (descendant) break;
            }
            if (descendant) {
                bool all_interval = true;
                for (const auto& [eid, ev] : e) {
                    if (ev.is_point()) all_interval = false;
                }
                if (!all_interval) {
                    throw UsageError(
                        "likelihood weighting cannot mix point evidence downstream of "
                        "interval evidence; use interval evidence only or the exact engine");
                }
                return query_logic(bn, targets, e, n_samples, seed);
            }
        }
    }

    std::vector<Eigen::Index> target_idx;
    for (const auto& t : targets) target_idx.push_back(m.index.at(t));

    Rng rng(seed);
    Eigen::VectorXd row(k);
    std::vector<double> wsum_x(target_idx.size(), 0.0), wsum_xx(target_idx.size(), 0.0);
    double wsum = 0.0, wsumsq = 0.0;
    for (Eigen::Index s = 0; s < n_samples; ++s) {
        double w = 1.0;
        for (Eigen::Index i = 0; i < k; ++i) {
            double mu = m.intercept[static_cast<std::size_t>(i)];
            const auto& pidx = m.parent_idx[static_cast<std::size_t>(i)];
            const auto& pbeta = m.parent_beta[static_cast<std::size_t>(i)];
            for (std::size_t a = 0; a < pidx.size(); ++a) mu += pbeta[a] * row(pidx[a]);
            const double sd = res_sd[static_cast<std::size_t>(i)];
            const auto ui = static_cast<std::size_t>(i);
            if (role[ui] == 1) {
                row(i) = value[ui].lo;
                w *= normal_pdf(value[ui].lo, mu, m.res_var[ui]);
            } else if (role[ui] == 2) {
                const double zlo = (value[ui].lo - mu) / sd;
                const double zhi = (value[ui].hi - mu) / sd;
                const double mass = normal_cdf(zhi) - normal_cdf(zlo);
                if (mass <= 0.0) {
                    w = 0.0;
                    row(i) = 0.5 * (value[ui].lo + value[ui].hi);
                    rng.uniform();  // keep the stream aligned
                } else {
                    w *= mass;
                    row(i) = mu + sd * rng.truncated_normal(zlo, zhi);
                }
            } else {
                row(i) = mu + sd * rng.normal();
            }
        }
        wsum += w;
        wsumsq += w * w;
        for (std::size_t a = 0; a < target_idx.size(); ++a) {
            wsum_x[a] += w * row(target_idx[a]);
            wsum_xx[a] += w * row(target_idx[a]) * row(target_idx[a]);
        }
    }
    if (wsum <= 0.0) {
        throw NumericalError("likelihood weighting: evidence has zero total weight");
    }

    QueryResult res;
    res.engine = QueryEngine::LikelihoodWeighting;
    res.effective_sample_size = wsum * wsum / wsumsq;
    std::size_t a = 0;
    for (const auto& t : targets) {
        TargetSummary s;
        s.mean = wsum_x[a] / wsum;
        s.sd = std::sqrt(std::max(wsum_xx[a] / wsum - s.mean * s.mean, 0.0));
        s.monte_carlo_se = s.sd / std::sqrt(res.effective_sample_size);
        res.targets[t] = s;
        ++a;
    }
    return res;
}

}  // namespace

QueryResult query(const GaussianBn& bn, const std::set<std::string>& targets,
                  const Evidence& e, QueryEngine engine, Eigen::Index n_samples,
                  std::uint64_t seed) {
    if (targets.empty()) throw UsageError("query: no targets");
    for (const auto& t : targets) {
        if (e.count(t)) throw UsageError("query: target " + t + " is also an evidence node");
        bn.dag.node(t);
    }
    for (const auto& [id, v] : e) bn.dag.node(id);

    switch (engine) {
        case QueryEngine::Exact:
            return query_exact(bn, targets, e);
        case QueryEngine::LogicSampling:
            return query_logic(bn, targets, e, n_samples, seed);
        case QueryEngine::LikelihoodWeighting:
            return query_weighting(bn, targets, e, n_samples, seed);
    }
    throw UsageError("query: unknown engine");
}

TraitPredictions predict(const GaussianBn& bn, const GenotypeMatrix& new_genotypes,
                         PredictionMode mode, const TraitMatrix* observed_traits) {
    std::vector<std::string> snp_nodes, trait_nodes;
    for (const auto& n : bn.dag.nodes()) {
        (n.kind == NodeKind::Snp ? snp_nodes : trait_nodes).push_back(n.id);
    }
    std::sort(snp_nodes.begin(), snp_nodes.end());
    std::sort(trait_nodes.begin(), trait_nodes.end());

    std::map<std::string, Eigen::Index> snp_col;
    for (std::size_t j = 0; j < new_genotypes.snp_ids.size(); ++j) {
        snp_col[new_genotypes.snp_ids[j]] = static_cast<Eigen::Index>(j);
    }
    for (const auto& s : snp_nodes) {
        if (!snp_col.count(s)) throw DataError("genotype input is missing SNP column " + s);
    }

    std::map<std::string, Eigen::Index> trait_col;
    if (observed_traits) {
        for (std::size_t j = 0; j < observed_traits->trait_ids.size(); ++j) {
            trait_col[observed_traits->trait_ids[j]] = static_cast<Eigen::Index>(j);
        }
    }

    TraitPredictions out;
    out.individual_ids = new_genotypes.individual_ids;
    out.trait_ids = trait_nodes;
    const auto n = new_genotypes.n();
    const auto T = static_cast<Eigen::Index>(trait_nodes.size());
    out.values.resize(n, T);

    if (mode == PredictionMode::Genetic) {
        const JointGaussian joint = to_joint(bn);
        const auto S = static_cast<Eigen::Index>(snp_nodes.size());
        std::vector<Eigen::Index> sidx, tidx;
        for (const auto& s : snp_nodes) sidx.push_back(joint.index_of(s));
        for (const auto& t : trait_nodes) tidx.push_back(joint.index_of(t));

        if (S == 0) {
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index t = 0; t < T; ++t) {
                    out.values(i, t) = joint.mean(tidx[static_cast<std::size_t>(t)]);
                }
            }
            return out;
        }

        Eigen::MatrixXd sss(S, S), sts(T, S);
        Eigen::VectorXd mu_s(S), mu_t(T);
        for (Eigen::Index a = 0; a < S; ++a) {
            mu_s(a) = joint.mean(sidx[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < S; ++b) {
                sss(a, b) = joint.covariance(sidx[static_cast<std::size_t>(a)],
                                             sidx[static_cast<std::size_t>(b)]);
            }
        }
        for (Eigen::Index a = 0; a < T; ++a) {
            mu_t(a) = joint.mean(tidx[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < S; ++b) {
                sts(a, b) = joint.covariance(tidx[static_cast<std::size_t>(a)],
                                             sidx[static_cast<std::size_t>(b)]);
            }
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(sss);
        const Eigen::MatrixXd gain = ldlt.solve(sts.transpose()).transpose();

        Eigen::VectorXd x(S);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index a = 0; a < S; ++a) {
                x(a) = new_genotypes.counts(i, snp_col.at(snp_nodes[static_cast<std::size_t>(a)]));
            }
            out.values.row(i) = (mu_t + gain * (x - mu_s)).transpose();
        }
        return out;
    }

    // causal mode: each trait from its local distribution at observed parent values
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto& trait = trait_nodes[static_cast<std::size_t>(t)];
        const LocalDistribution& ld = bn.local(trait);
        for (const auto& [parent, beta] : ld.coefficients) {
            const bool parent_is_trait = bn.dag.node(parent).kind == NodeKind::Trait;
            if (parent_is_trait && !trait_col.count(parent)) {
                throw DataError("causal prediction needs observed values for parent trait " +
                                parent);
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = ld.intercept;
            for (const auto& [parent, beta] : ld.coefficients) {
                if (bn.dag.node(parent).kind == NodeKind::Trait) {
                    v += beta * observed_traits->values(i, trait_col.at(parent));
                } else {
                    v += beta * new_genotypes.counts(i, snp_col.at(parent));
                }
            }
            out.values(i, t) = v;
        }
    }
    return out;
}

GaussianBn bn_from_joint(const JointGaussian& j, const std::vector<Node>& nodes) {
    if (nodes.size() != j.order.size()) throw UsageError("bn_from_joint: size mismatch");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id != j.order[i]) {
            throw UsageError("bn_from_joint: node order must match the joint's order");
        }
    }

    GaussianBn bn;
    bn.dag = Dag(nodes);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i) + 1;
        const Eigen::MatrixXd sub = j.covariance.topLeftCorner(k, k);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        if (!lu.isInvertible()) {
            throw NumericalError("bn_from_joint: leading covariance block is singular at node " +
                                 nodes[i].id);
        }
        const Eigen::MatrixXd prec = lu.inverse();

        LocalDistribution ld;
        ld.node = nodes[i].id;
        const Eigen::Index ii = k - 1;
        ld.residual_variance = 1.0 / prec(ii, ii);
        double intercept = j.mean(ii);
        for (Eigen::Index p = 0; p < ii; ++p) {
            const double beta = -prec(ii, p) / prec(ii, ii);
            ld.coefficients[nodes[static_cast<std::size_t>(p)].id] = beta;
            intercept -= beta * j.mean(p);
            bn.dag = bn.dag.add_arc(nodes[static_cast<std::size_t>(p)].id, nodes[i].id);
        }
        ld.intercept = intercept;
        bn.locals[ld.node] = ld;
    }
    return bn;
}

}  // namespace gnbn
