#include "gnbn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "gnbn/errors.hpp"
#include "gnbn/math.hpp"

namespace gnbn {

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// P(Z1 < a, Z2 < b) for standard bivariate normal with correlation rho,
// by Simpson quadrature over the first margin.
double bivariate_normal_cdf(double a, double b, double rho) {
    if (std::fabs(rho) < 1e-14) return normal_cdf(a) * normal_cdf(b);
    const double lo = -8.0;
    if (a <= lo) return 0.0;
    const int steps = 2000;  // even
    const double h = (a - lo) / steps;
    const double denom = std::sqrt(1.0 - rho * rho);
    auto f = [&](double z) { return normal_pdf(z) * normal_cdf((b - rho * z) / denom); };
    double sum = f(lo) + f(a);
    for (int i = 1; i < steps; ++i) {
        sum += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

}  // namespace

std::string SimSpec::snp_id(Eigen::Index k) const {
    std::string num = std::to_string(k + 1);
    std::string width = std::to_string(s);
    while (num.size() < width.size()) num.insert(num.begin(), '0');
    return "snp" + num;
}

GenotypeMatrix simulate_genotypes(const SimSpec& spec) {
    if (spec.n < 1 || spec.s < 1) throw UsageError("simulate: need n >= 1 and s >= 1");
    if (spec.maf_lo <= 0.0 || spec.maf_hi > 0.5 || spec.maf_lo > spec.maf_hi) {
        throw UsageError("simulate: maf range must satisfy 0 < lo <= hi <= 0.5");
    }
    if (spec.ld_rho < 0.0 || spec.ld_rho >= 1.0) {
        throw UsageError("simulate: ld_rho must be in [0, 1)");
    }

    Rng master(spec.seed);
    Rng freq_rng = master.derive(0x66726571);
    std::vector<double> freq, thresh;
    for (Eigen::Index j = 0; j < spec.s; ++j) {
        const double p = freq_rng.uniform(spec.maf_lo, spec.maf_hi);
        freq.push_back(p);
        thresh.push_back(normal_quantile(p));
    }

    GenotypeMatrix g;
    g.counts.resize(spec.n, spec.s);
    for (Eigen::Index j = 0; j < spec.s; ++j) g.snp_ids.push_back(spec.snp_id(j));
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        g.individual_ids.push_back("ind" + std::to_string(i + 1));
    }

    const double rho = spec.ld_rho;
    const double innov = std::sqrt(1.0 - rho * rho);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        Rng rng = master.derive(0x67656e6f, static_cast<std::uint64_t>(i));
        double z1 = 0.0, z2 = 0.0;
        for (Eigen::Index j = 0; j < spec.s; ++j) {
            z1 = (j == 0) ? rng.normal() : rho * z1 + innov * rng.normal();
            z2 = (j == 0) ? rng.normal() : rho * z2 + innov * rng.normal();
            const double t = thresh[static_cast<std::size_t>(j)];
            g.counts(i, j) = (z1 < t ? 1.0 : 0.0) + (z2 < t ? 1.0 : 0.0);
        }
    }
    return g;
}

Simulation simulate_phenotypes(const GenotypeMatrix& g, const SimSpec& spec) {
    Rng master(spec.seed);

    // allele frequencies are reproduced from the same derived stream used by
    // simulate_genotypes, so the truth model matches the generated panel
    Rng freq_rng = master.derive(0x66726571);
    std::vector<double> freq;
    for (Eigen::Index j = 0; j < spec.s; ++j) {
        freq.push_back(freq_rng.uniform(spec.maf_lo, spec.maf_hi));
    }

    std::vector<TraitSpec> traits = spec.traits;
    std::stable_sort(traits.begin(), traits.end(),
                     [](const TraitSpec& a, const TraitSpec& b) { return a.tier < b.tier; });

    Simulation sim;
    sim.data.genotypes = g;
    sim.data.traits.individual_ids = g.individual_ids;
    sim.data.traits.values.resize(g.n(), static_cast<Eigen::Index>(traits.size()));

    std::map<std::string, Eigen::Index> snp_col;
    for (std::size_t j = 0; j < g.snp_ids.size(); ++j) {
        snp_col[g.snp_ids[j]] = static_cast<Eigen::Index>(j);
    }
    std::map<std::string, Eigen::Index> trait_col;

    Rng noise = master.derive(0x74726169);
    for (std::size_t t = 0; t < traits.size(); ++t) {
        const TraitSpec& ts = traits[t];
        if (ts.residual_variance <= 0.0) {
            throw UsageError("trait " + ts.id + ": residual variance must be positive");
        }
        const double sd = std::sqrt(ts.residual_variance);
        for (Eigen::Index i = 0; i < g.n(); ++i) {
            double v = ts.intercept;
            for (const auto& [parent, beta] : ts.parents) {
                auto sit = snp_col.find(parent);
                if (sit != snp_col.end()) {
                    v += beta * g.counts(i, sit->second);
                } else {
                    auto tit = trait_col.find(parent);
                    if (tit == trait_col.end()) {
                        throw UsageError("trait " + ts.id + ": parent " + parent +
                                         " is neither a SNP nor an earlier trait");
                    }
                    v += beta * sim.data.traits.values(i, tit->second);
                }
            }
            sim.data.traits.values(i, static_cast<Eigen::Index>(t)) = v + sd * noise.normal();
        }
        trait_col[ts.id] = static_cast<Eigen::Index>(t);
        sim.data.traits.trait_ids.push_back(ts.id);
        sim.data.traits.tiers.push_back(ts.tier);
    }

    // ground-truth network
    std::vector<Node> nodes;
    for (Eigen::Index j = 0; j < spec.s; ++j) {
        nodes.push_back({g.snp_ids[static_cast<std::size_t>(j)], NodeKind::Snp, -1});
    }
    for (const auto& ts : traits) nodes.push_back({ts.id, NodeKind::Trait, ts.tier});
    Dag dag(nodes);

    GaussianBn truth;
    // SNP locals: analytic chain moments of the copula construction
    std::vector<double> snp_var;
    for (Eigen::Index j = 0; j < spec.s; ++j) {
        const double p = freq[static_cast<std::size_t>(j)];
        snp_var.push_back(2.0 * p * (1.0 - p));
    }
    for (Eigen::Index j = 0; j < spec.s; ++j) {
        const auto& id = g.snp_ids[static_cast<std::size_t>(j)];
        const double p = freq[static_cast<std::size_t>(j)];
        LocalDistribution ld;
        ld.node = id;
        if (spec.ld_rho == 0.0 || j == 0) {
            ld.intercept = 2.0 * p;
            ld.residual_variance = snp_var[static_cast<std::size_t>(j)];
        } else {
            const auto& prev = g.snp_ids[static_cast<std::size_t>(j - 1)];
            const double pp = freq[static_cast<std::size_t>(j - 1)];
            const double joint = bivariate_normal_cdf(normal_quantile(pp), normal_quantile(p),
                                                      spec.ld_rho);
            const double cov = 2.0 * (joint - pp * p);  // two independent chains
            const double beta = cov / snp_var[static_cast<std::size_t>(j - 1)];
            ld.coefficients[prev] = beta;
            ld.intercept = 2.0 * p - beta * 2.0 * pp;
            ld.residual_variance =
                std::max(snp_var[static_cast<std::size_t>(j)] -
                             beta * beta * snp_var[static_cast<std::size_t>(j - 1)],
                         1e-12);
            dag = dag.add_arc(prev, id);
        }
        truth.locals[id] = ld;
    }
    for (const auto& ts : traits) {
        LocalDistribution ld;
        ld.node = ts.id;
        ld.intercept = ts.intercept;
        ld.residual_variance = ts.residual_variance;
        for (const auto& [parent, beta] : ts.parents) {
            ld.coefficients[parent] = beta;
            dag = dag.add_arc(parent, ts.id);
        }
        truth.locals[ts.id] = ld;
    }
    truth.dag = dag;
    sim.truth = truth;

    for (const auto& ids = sim.data.column_ids(); const auto& id : ids) {
        const Eigen::VectorXd c = sim.data.column(id);
        sim.data.standardization.mean.push_back(c.mean());
        sim.data.standardization.sd.push_back(
            std::sqrt((c.array() - c.mean()).square().sum() /
                      static_cast<double>(c.size() - 1)));
    }
    return sim;
}

Simulation simulate(const SimSpec& spec) {
    return simulate_phenotypes(simulate_genotypes(spec), spec);
}

}  // namespace gnbn
