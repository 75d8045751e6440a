#include "gnbn/gblup.hpp"

#include <cmath>

#include "gnbn/errors.hpp"
#include "gnbn/math.hpp"

namespace gnbn {

namespace {

void check_psd(const Eigen::MatrixXd& m, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double lambda_min = es.eigenvalues().minCoeff();
    if (lambda_min < -1e-8) {
        throw NumericalError(what + " is not positive semidefinite (eigenvalue " +
                             std::to_string(lambda_min) + ")");
    }
}

}  // namespace

Eigen::MatrixXd GblupModel::assembled_g() const {
    const auto T = num_traits();
    const auto S = num_snps();
    Eigen::MatrixXd G(T * S, T * S);
    for (Eigen::Index a = 0; a < T; ++a) {
        for (Eigen::Index b = 0; b < T; ++b) {
            G.block(a * S, b * S, S, S) =
                g_blocks[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
    }
    return G;
}

Eigen::MatrixXd GblupModel::assembled_r() const {
    const auto T = num_traits();
    const auto N = n();
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(T * N, T * N);
    for (Eigen::Index a = 0; a < T; ++a) {
        for (Eigen::Index b = 0; b < T; ++b) {
            R.block(a * N, b * N, N, N) =
                r_blocks(a, b) * Eigen::MatrixXd::Identity(N, N);
        }
    }
    return R;
}

GblupModel build_gblup_custom(const GenotypeMatrix& genotypes,
                              std::vector<std::vector<Eigen::MatrixXd>> g_blocks,
                              const Eigen::MatrixXd& residual_covariance,
                              const Eigen::VectorXd& means,
                              const std::vector<std::string>& trait_ids) {
    const auto T = residual_covariance.rows();
    if (residual_covariance.cols() != T || means.size() != T ||
        static_cast<Eigen::Index>(trait_ids.size()) != T ||
        static_cast<Eigen::Index>(g_blocks.size()) != T) {
        throw UsageError("build_gblup: inconsistent trait dimensions");
    }
    const auto S = genotypes.num_snps();
    for (const auto& row : g_blocks) {
        if (static_cast<Eigen::Index>(row.size()) != T) {
            throw UsageError("build_gblup: g_blocks must be a T x T grid");
        }
        for (const auto& blk : row) {
            if (blk.rows() != S || blk.cols() != S) {
                throw UsageError("build_gblup: each G block must be S x S");
            }
        }
    }

    GblupModel m;
    m.design = genotypes.counts;
    m.g_blocks = std::move(g_blocks);
    m.r_blocks = residual_covariance;
    m.means = means;
    m.trait_ids = trait_ids;

    check_psd(m.assembled_g(), "assembled G");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(residual_covariance);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw NumericalError("residual covariance must be positive definite (eigenvalue " +
                             std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
    return m;
}

GblupModel build_gblup(const GenotypeMatrix& genotypes, GPolicy g_policy,
                       const Eigen::MatrixXd& trait_covariance,
                       const Eigen::MatrixXd& residual_covariance,
                       const Eigen::VectorXd& means,
                       const std::vector<std::string>& trait_ids) {
    const auto T = residual_covariance.rows();
    const auto S = genotypes.num_snps();
    check_psd(trait_covariance, "genetic trait covariance");

    Eigen::MatrixXd base;
    switch (g_policy) {
        case GPolicy::Identity:
            base = Eigen::MatrixXd::Identity(S, S);
            break;
        case GPolicy::CrossProduct: {
            // SNP-space analogue of the X_S X_S^T random-regression form
            Eigen::MatrixXd X = genotypes.counts;
            for (Eigen::Index j = 0; j < S; ++j) X.col(j).array() -= X.col(j).mean();
            base = X.transpose() * X / static_cast<double>(genotypes.n());
            break;
        }
    }

    std::vector<std::vector<Eigen::MatrixXd>> blocks;
    for (Eigen::Index a = 0; a < T; ++a) {
        std::vector<Eigen::MatrixXd> row;
        for (Eigen::Index b = 0; b < T; ++b) row.push_back(trait_covariance(a, b) * base);
        blocks.push_back(std::move(row));
    }
    return build_gblup_custom(genotypes, std::move(blocks), residual_covariance, means,
                              trait_ids);
}

JointGaussian joint_covariance(const GblupModel& m) {
    const auto T = m.num_traits();
    const auto N = m.n();
    const auto S = m.num_snps();

    Eigen::MatrixXd Zb = Eigen::MatrixXd::Zero(T * N, T * S);
    for (Eigen::Index t = 0; t < T; ++t) Zb.block(t * N, t * S, N, S) = m.design;

    const Eigen::MatrixXd G = m.assembled_g();
    const Eigen::MatrixXd R = m.assembled_r();
    const Eigen::MatrixXd ZG = Zb * G;

    JointGaussian j;
    const auto dim = T * N + T * S;
    j.covariance.resize(dim, dim);
    j.covariance.topLeftCorner(T * N, T * N) = Zb * G * Zb.transpose() + R;
    j.covariance.topRightCorner(T * N, T * S) = ZG;
    j.covariance.bottomLeftCorner(T * S, T * N) = ZG.transpose();
    j.covariance.bottomRightCorner(T * S, T * S) = G;

    j.mean.resize(dim);
    for (Eigen::Index t = 0; t < T; ++t) {
        j.mean.segment(t * N, N).setConstant(m.means(t));
        for (Eigen::Index i = 0; i < N; ++i) {
            j.order.push_back(m.trait_ids[static_cast<std::size_t>(t)] + "@" +
                              std::to_string(i + 1));
        }
    }
    j.mean.tail(T * S).setZero();
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index s = 0; s < S; ++s) {
            j.order.push_back("u." + m.trait_ids[static_cast<std::size_t>(t)] + "." +
                              std::to_string(s + 1));
        }
    }
    return j;
}

EquivalenceReport verify_equivalence(const GblupModel& m, double tol,
                                     Eigen::Index n_samples, std::uint64_t seed) {
    const JointGaussian joint = joint_covariance(m);
    const auto d = joint.covariance.rows();

    EquivalenceReport report;
    Eigen::MatrixXd sigma = joint.covariance;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sigma);
    if (!lu.isInvertible()) {
        sigma.diagonal().array() += 1e-8;
        report.jitter_applied = true;
        lu.compute(sigma);
        if (!lu.isInvertible()) {
            throw NumericalError("joint covariance singular even after jitter");
        }
    }
    report.precision = lu.inverse();
    report.zero_pattern.resize(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            report.zero_pattern(a, b) = std::fabs(report.precision(a, b)) <= tol;
        }
    }

    // simulate and accumulate the sample covariance
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    Eigen::MatrixXd chol;
    if (llt.info() == Eigen::Success) {
        chol = llt.matrixL();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
        chol = es.eigenvectors() *
               es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    Rng rng(seed);
    Eigen::VectorXd z(d);
    Eigen::VectorXd mean_acc = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd cross_acc = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index s = 0; s < n_samples; ++s) {
        for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
        const Eigen::VectorXd x = chol * z;  // centered draw
        mean_acc += x;
        cross_acc.noalias() += x * x.transpose();
    }
    const double N = static_cast<double>(n_samples);
    const Eigen::VectorXd xbar = mean_acc / N;
    const Eigen::MatrixXd sample_cov =
        cross_acc / N - xbar * xbar.transpose();

    for (Eigen::Index i = 0; i < d; ++i) {
        // regress variable i on all others using the sample covariance
        std::vector<Eigen::Index> others;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (j != i) others.push_back(j);
        }
        const auto p = static_cast<Eigen::Index>(others.size());
        Eigen::MatrixXd sxx(p, p);
        Eigen::VectorXd sxy(p);
        for (Eigen::Index a = 0; a < p; ++a) {
            sxy(a) = sample_cov(others[static_cast<std::size_t>(a)], i);
            for (Eigen::Index b = 0; b < p; ++b) {
                sxx(a, b) = sample_cov(others[static_cast<std::size_t>(a)],
                                       others[static_cast<std::size_t>(b)]);
            }
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(sxx);
        const Eigen::VectorXd beta = ldlt.solve(sxy);
        const double res_var =
            std::max(sample_cov(i, i) - sxy.dot(beta), 1e-300);
        const Eigen::MatrixXd sxx_inv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));

        for (Eigen::Index a = 0; a < p; ++a) {
            const Eigen::Index jcol = others[static_cast<std::size_t>(a)];
            EquivalenceEntry entry;
            entry.row = joint.order[static_cast<std::size_t>(i)];
            entry.col = joint.order[static_cast<std::size_t>(jcol)];
            entry.omega = report.precision(i, jcol);
            entry.implied_beta = -report.precision(i, jcol) / report.precision(i, i);
            entry.simulated_beta = beta(a);
            entry.standard_error = std::sqrt(res_var * sxx_inv(a, a) / N);
            const double diff = std::fabs(entry.implied_beta - entry.simulated_beta);
            if (diff > 3.0 * entry.standard_error && diff > tol) ++report.mismatches;
            report.entries.push_back(entry);
        }
    }
    return report;
}

}  // namespace gnbn
