#include "gnbn/cv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>

#include "gnbn/errors.hpp"
#include "gnbn/inference.hpp"
#include "gnbn/math.hpp"
#include "gnbn/stats.hpp"

namespace gnbn {

double predictive_correlation(const Eigen::VectorXd& predicted,
                              const Eigen::VectorXd& observed) {
    return pearson(predicted, observed);
}

Dataset subset_rows(const Dataset& d, const std::vector<Eigen::Index>& rows) {
    Dataset out;
    out.genotypes.snp_ids = d.genotypes.snp_ids;
    out.traits.trait_ids = d.traits.trait_ids;
    out.traits.tiers = d.traits.tiers;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.genotypes.counts.resize(n, d.genotypes.num_snps());
    out.traits.values.resize(n, d.traits.num_traits());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index r = rows[static_cast<std::size_t>(i)];
        out.genotypes.individual_ids.push_back(d.genotypes.individual_ids[static_cast<std::size_t>(r)]);
        out.traits.individual_ids.push_back(d.traits.individual_ids[static_cast<std::size_t>(r)]);
        out.genotypes.counts.row(i) = d.genotypes.counts.row(r);
        out.traits.values.row(i) = d.traits.values.row(r);
    }
    for (const auto& ids = out.column_ids(); const auto& id : ids) {
        const Eigen::VectorXd c = out.column(id);
        out.standardization.mean.push_back(c.mean());
        out.standardization.sd.push_back(std::sqrt(
            (c.array() - c.mean()).square().sum() / static_cast<double>(c.size() - 1)));
    }
    return out;
}

std::vector<int> fold_assignment(Eigen::Index n, int folds, std::uint64_t seed, int run) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = Rng(seed).derive(0x666f6c64, static_cast<std::uint64_t>(run));
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.below(i)]);
    }
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < perm.size(); ++i) {
        fold[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
    return fold;
}

namespace {

struct FoldOutput {
    GaussianBn bn;
    std::vector<Eigen::Index> test_rows;
    Eigen::MatrixXd pred_g;  // test x traits (bn trait order)
    Eigen::MatrixXd pred_c;
    std::vector<std::string> trait_order;
    bool ok = false;
    std::string warning;
};

FoldOutput run_fold(const Dataset& data, const CvConfig& cfg, int run, int fold,
                    const std::vector<int>& assignment) {
    FoldOutput out;
    std::vector<Eigen::Index> train_rows;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        if (assignment[static_cast<std::size_t>(i)] == fold) {
            out.test_rows.push_back(i);
        } else {
            train_rows.push_back(i);
        }
    }

    try {
        const Dataset train = subset_rows(data, train_rows);
        const Dataset test = subset_rows(data, out.test_rows);

        SearchConfig search;
        search.alpha = cfg.alpha;
        search.max_cond_size = cfg.max_cond_size;
        search.restarts = cfg.restarts;
        search.seed = Rng(cfg.seed)
                          .derive(static_cast<std::uint64_t>(run),
                                  static_cast<std::uint64_t>(fold))
                          .next_u64();

        const auto retained = mb_filter(train, search);
        const Dag dag = hill_climb(train, retained, search);
        out.bn = cfg.fit_method == FitMethod::Ols ? fit_ols(dag, train)
                                                  : fit_ridge(dag, train, cfg.lambda_policy);

        const auto pg = predict(out.bn, test.genotypes, PredictionMode::Genetic);
        const auto pc = predict(out.bn, test.genotypes, PredictionMode::Causal, &test.traits);
        out.pred_g = pg.values;
        out.pred_c = pc.values;
        out.trait_order = pg.trait_ids;
        out.ok = true;
    } catch (const std::exception& e) {
        out.warning = "run " + std::to_string(run + 1) + " fold " + std::to_string(fold + 1) +
                      " skipped: " + e.what();
    }
    return out;
}

}  // namespace

CvReport run_cv(const Dataset& data, const CvConfig& cfg) {
    if (cfg.folds < 2) throw UsageError("cv: need at least 2 folds");
    if (cfg.runs < 1) throw UsageError("cv: need at least 1 run");
    const auto start = std::chrono::steady_clock::now();

    CvReport report;
    std::map<std::string, Eigen::Index> trait_col;
    for (std::size_t j = 0; j < data.traits.trait_ids.size(); ++j) {
        trait_col[data.traits.trait_ids[j]] = static_cast<Eigen::Index>(j);
    }

    for (int run = 0; run < cfg.runs; ++run) {
        const auto assignment = fold_assignment(data.n(), cfg.folds, cfg.seed, run);

        std::vector<FoldOutput> outputs(static_cast<std::size_t>(cfg.folds));
        if (cfg.threads > 1) {
            std::vector<std::future<FoldOutput>> futures;
            for (int f = 0; f < cfg.folds; ++f) {
                futures.push_back(std::async(std::launch::async, run_fold, std::cref(data),
                                             std::cref(cfg), run, f, std::cref(assignment)));
            }
            for (int f = 0; f < cfg.folds; ++f) {
                outputs[static_cast<std::size_t>(f)] = futures[static_cast<std::size_t>(f)].get();
            }
        } else {
            for (int f = 0; f < cfg.folds; ++f) {
                outputs[static_cast<std::size_t>(f)] = run_fold(data, cfg, run, f, assignment);
            }
        }

        // pool held-out predictions across folds
        const auto T = data.traits.num_traits();
        Eigen::MatrixXd pooled_g(data.n(), T), pooled_c(data.n(), T);
        std::vector<bool> covered(static_cast<std::size_t>(data.n()), false);
        for (auto& out : outputs) {
            if (!out.ok) {
                report.warnings.push_back(out.warning);
                continue;
            }
            report.networks.push_back(out.bn);
            for (std::size_t k = 0; k < out.trait_order.size(); ++k) {
                const Eigen::Index col = trait_col.at(out.trait_order[k]);
                for (std::size_t i = 0; i < out.test_rows.size(); ++i) {
                    pooled_g(out.test_rows[i], col) = out.pred_g(static_cast<Eigen::Index>(i),
                                                                 static_cast<Eigen::Index>(k));
                    pooled_c(out.test_rows[i], col) = out.pred_c(static_cast<Eigen::Index>(i),
                                                                 static_cast<Eigen::Index>(k));
                }
            }
            for (Eigen::Index r : out.test_rows) covered[static_cast<std::size_t>(r)] = true;
        }

        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            if (covered[static_cast<std::size_t>(i)]) rows.push_back(i);
        }
        if (rows.empty()) continue;

        for (const auto& trait : data.traits.trait_ids) {
            const Eigen::Index col = trait_col.at(trait);
            Eigen::VectorXd obs(static_cast<Eigen::Index>(rows.size()));
            Eigen::VectorXd pg(obs.size()), pc(obs.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                obs(static_cast<Eigen::Index>(i)) = data.traits.values(rows[i], col);
                pg(static_cast<Eigen::Index>(i)) = pooled_g(rows[i], col);
                pc(static_cast<Eigen::Index>(i)) = pooled_c(rows[i], col);
            }
            try {
                report.rho_g_runs[trait].push_back(predictive_correlation(pg, obs));
            } catch (const NumericalError&) {
                report.rho_g_runs[trait].push_back(0.0);
                report.warnings.push_back("run " + std::to_string(run + 1) + " trait " + trait +
                                          ": genetic predictions constant, rho_G set to 0");
            }
            try {
                report.rho_c_runs[trait].push_back(predictive_correlation(pc, obs));
            } catch (const NumericalError&) {
                report.rho_c_runs[trait].push_back(0.0);
                report.warnings.push_back("run " + std::to_string(run + 1) + " trait " + trait +
                                          ": causal predictions constant, rho_C set to 0");
            }
        }
    }

    auto summarize = [](const std::vector<double>& v, double* mean, double* sd) {
        if (v.empty()) {
            *mean = 0.0;
            *sd = 0.0;
            return;
        }
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        *mean = m;
        *sd = v.size() > 1 ? std::sqrt(s2 / static_cast<double>(v.size() - 1)) : 0.0;
    };
    for (const auto& trait : data.traits.trait_ids) {
        TraitCvSummary s;
        summarize(report.rho_g_runs[trait], &s.rho_g_mean, &s.rho_g_sd);
        summarize(report.rho_c_runs[trait], &s.rho_c_mean, &s.rho_c_sd);
        report.traits[trait] = s;
    }

    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace gnbn
