#include "gnbn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gnbn/errors.hpp"

namespace gnbn {

namespace {

struct CsvTable {
    std::vector<std::string> header;      // column names, id column stripped
    std::vector<std::string> row_ids;
    std::vector<std::vector<std::string>> cells;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() < 2) {
        throw DataError(path + ": header must have an id column and at least one data column");
    }
    t.header.assign(header.begin() + 1, header.end());

    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError(path + ": row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        t.row_ids.push_back(fields[0]);
        t.cells.emplace_back(fields.begin() + 1, fields.end());
    }
    return t;
}

double parse_number(const std::string& s, const std::string& path, int row, int col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(path + ": row " + std::to_string(row) + " column " +
                        std::to_string(col) + ": cannot parse '" + s + "' as a number");
    }
}

void check_unique(const std::vector<std::string>& ids, const std::string& what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) throw DataError("duplicate " + what + " id: " + id);
    }
}

double column_mean(const Eigen::VectorXd& v) { return v.mean(); }

double column_sd(const Eigen::VectorXd& v) {
    const double m = v.mean();
    const double var = (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
    return std::sqrt(var);
}

}  // namespace

std::vector<std::string> Dataset::column_ids() const {
    std::vector<std::string> ids = genotypes.snp_ids;
    ids.insert(ids.end(), traits.trait_ids.begin(), traits.trait_ids.end());
    return ids;
}

Eigen::VectorXd Dataset::column(const std::string& id) const {
    for (std::size_t j = 0; j < genotypes.snp_ids.size(); ++j) {
        if (genotypes.snp_ids[j] == id) return genotypes.counts.col(static_cast<Eigen::Index>(j));
    }
    for (std::size_t j = 0; j < traits.trait_ids.size(); ++j) {
        if (traits.trait_ids[j] == id) return traits.values.col(static_cast<Eigen::Index>(j));
    }
    throw DataError("unknown column: " + id);
}

bool Dataset::is_trait(const std::string& id) const {
    return std::find(traits.trait_ids.begin(), traits.trait_ids.end(), id) !=
           traits.trait_ids.end();
}

int Dataset::trait_tier(const std::string& id) const {
    for (std::size_t j = 0; j < traits.trait_ids.size(); ++j) {
        if (traits.trait_ids[j] == id) return traits.tiers[j];
    }
    throw DataError("unknown trait: " + id);
}

Eigen::MatrixXd Dataset::joint_matrix() const {
    Eigen::MatrixXd m(n(), genotypes.num_snps() + traits.num_traits());
    m.leftCols(genotypes.num_snps()) = genotypes.counts;
    m.rightCols(traits.num_traits()) = traits.values;
    return m;
}

Dataset load_dataset(const std::string& genotype_path, const std::string& trait_path,
                     const std::map<std::string, int>& tier_spec, bool mean_impute) {
    CsvTable gt = read_csv(genotype_path);
    CsvTable tt = read_csv(trait_path);
    check_unique(gt.header, "SNP");
    check_unique(tt.header, "trait");
    check_unique(gt.row_ids, "individual (genotype file)");
    check_unique(tt.row_ids, "individual (trait file)");

    for (const auto& trait : tt.header) {
        if (tier_spec.find(trait) == tier_spec.end()) {
            throw DataError("no tier specified for trait: " + trait);
        }
    }

    std::unordered_map<std::string, std::size_t> trait_row;
    for (std::size_t i = 0; i < tt.row_ids.size(); ++i) trait_row[tt.row_ids[i]] = i;

    // Join on individual id, keeping genotype-file order.
    std::vector<std::size_t> g_rows, t_rows;
    for (std::size_t i = 0; i < gt.row_ids.size(); ++i) {
        auto it = trait_row.find(gt.row_ids[i]);
        if (it != trait_row.end()) {
            g_rows.push_back(i);
            t_rows.push_back(it->second);
        }
    }
    if (g_rows.empty()) {
        throw DataError("no overlapping individuals between genotype and trait files");
    }
    const int dropped = static_cast<int>(gt.row_ids.size() + tt.row_ids.size() - 2 * g_rows.size());

    const auto n = static_cast<Eigen::Index>(g_rows.size());
    if (n < 3) throw DataError("need at least 3 individuals after joining, got " + std::to_string(n));
    const auto S = static_cast<Eigen::Index>(gt.header.size());
    const auto T = static_cast<Eigen::Index>(tt.header.size());

    Dataset d;
    d.dropped_individuals = dropped;
    d.genotypes.snp_ids = gt.header;
    d.traits.trait_ids = tt.header;
    d.genotypes.counts.resize(n, S);
    d.traits.values.resize(n, T);

    std::vector<std::vector<Eigen::Index>> missing_by_col(static_cast<std::size_t>(S));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& id = gt.row_ids[g_rows[static_cast<std::size_t>(i)]];
        d.genotypes.individual_ids.push_back(id);
        d.traits.individual_ids.push_back(id);
        const auto& grow = gt.cells[g_rows[static_cast<std::size_t>(i)]];
        const int file_row = static_cast<int>(g_rows[static_cast<std::size_t>(i)]) + 2;
        for (Eigen::Index j = 0; j < S; ++j) {
            const std::string& cell = grow[static_cast<std::size_t>(j)];
            if (cell.empty() || cell == "NA") {
                if (!mean_impute) {
                    throw DataError(genotype_path + ": missing genotype at row " +
                                    std::to_string(file_row) + " column " + std::to_string(j + 2) +
                                    " (rerun with --mean-impute to allow)");
                }
                missing_by_col[static_cast<std::size_t>(j)].push_back(i);
                d.genotypes.counts(i, j) = std::nan("");
                continue;
            }
            const double v = parse_number(cell, genotype_path, file_row, static_cast<int>(j) + 2);
            if (v != 0.0 && v != 1.0 && v != 2.0) {
                throw DataError(genotype_path + ": row " + std::to_string(file_row) +
                                " column " + std::to_string(j + 2) + ": allele count " +
                                cell + " is not in {0,1,2}");
            }
            d.genotypes.counts(i, j) = v;
        }
        const auto& trow = tt.cells[t_rows[static_cast<std::size_t>(i)]];
        const int t_file_row = static_cast<int>(t_rows[static_cast<std::size_t>(i)]) + 2;
        for (Eigen::Index j = 0; j < T; ++j) {
            const std::string& cell = trow[static_cast<std::size_t>(j)];
            if (cell.empty() || cell == "NA") {
                throw DataError(trait_path + ": missing phenotype at row " +
                                std::to_string(t_file_row) + " column " + std::to_string(j + 2));
            }
            d.traits.values(i, j) = parse_number(cell, trait_path, t_file_row,
                                                 static_cast<int>(j) + 2);
        }
    }

    if (mean_impute) {
        for (Eigen::Index j = 0; j < S; ++j) {
            const auto& rows = missing_by_col[static_cast<std::size_t>(j)];
            if (rows.empty()) continue;
            double sum = 0.0;
            Eigen::Index cnt = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!std::isnan(d.genotypes.counts(i, j))) {
                    sum += d.genotypes.counts(i, j);
                    ++cnt;
                }
            }
            if (cnt == 0) throw DataError("genotype column " + gt.header[static_cast<std::size_t>(j)] +
                                          " is entirely missing");
            for (Eigen::Index i : rows) d.genotypes.counts(i, j) = sum / static_cast<double>(cnt);
        }
    }

    for (const auto& trait : tt.header) d.traits.tiers.push_back(tier_spec.at(trait));

    for (const auto& ids = d.column_ids(); const auto& id : ids) {
        const Eigen::VectorXd c = d.column(id);
        d.standardization.mean.push_back(column_mean(c));
        d.standardization.sd.push_back(column_sd(c));
    }
    return d;
}

GenotypeMatrix load_genotype_matrix(const std::string& path) {
    CsvTable t = read_csv(path);
    check_unique(t.header, "SNP");
    check_unique(t.row_ids, "individual");
    GenotypeMatrix g;
    g.snp_ids = t.header;
    g.individual_ids = t.row_ids;
    const auto n = static_cast<Eigen::Index>(t.row_ids.size());
    const auto S = static_cast<Eigen::Index>(t.header.size());
    g.counts.resize(n, S);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < S; ++j) {
            const double v = parse_number(t.cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                          path, static_cast<int>(i) + 2, static_cast<int>(j) + 2);
            if (v != 0.0 && v != 1.0 && v != 2.0) {
                throw DataError(path + ": row " + std::to_string(i + 2) + " column " +
                                std::to_string(j + 2) + ": allele count is not in {0,1,2}");
            }
            g.counts(i, j) = v;
        }
    }
    return g;
}

TraitMatrix load_trait_matrix(const std::string& path) {
    CsvTable t = read_csv(path);
    check_unique(t.header, "trait");
    check_unique(t.row_ids, "individual");
    TraitMatrix m;
    m.trait_ids = t.header;
    m.individual_ids = t.row_ids;
    m.tiers.assign(t.header.size(), 0);
    const auto n = static_cast<Eigen::Index>(t.row_ids.size());
    const auto T = static_cast<Eigen::Index>(t.header.size());
    m.values.resize(n, T);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < T; ++j) {
            m.values(i, j) = parse_number(t.cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                          path, static_cast<int>(i) + 2, static_cast<int>(j) + 2);
        }
    }
    return m;
}

double minor_allele_frequency(const Eigen::VectorXd& counts) {
    const double p = counts.sum() / (2.0 * static_cast<double>(counts.size()));
    return std::min(p, 1.0 - p);
}

GenotypeMatrix filter_maf(const GenotypeMatrix& g, double min_maf) {
    if (min_maf < 0.0 || min_maf >= 0.5) {
        throw UsageError("min_maf must be in [0, 0.5)");
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < g.num_snps(); ++j) {
        if (minor_allele_frequency(g.counts.col(j)) >= min_maf) keep.push_back(j);
    }
    if (keep.empty()) throw DataError("MAF filter removed every SNP");
    GenotypeMatrix out;
    out.individual_ids = g.individual_ids;
    out.counts.resize(g.n(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.snp_ids.push_back(g.snp_ids[static_cast<std::size_t>(keep[k])]);
        out.counts.col(static_cast<Eigen::Index>(k)) = g.counts.col(keep[k]);
    }
    return out;
}

GenotypeMatrix prune_correlated(const GenotypeMatrix& g, double r_max) {
    if (r_max <= 0.0 || r_max > 1.0) throw UsageError("r_max must be in (0, 1]");
    const Eigen::Index n = g.n();
    std::vector<Eigen::Index> keep;
    std::vector<Eigen::VectorXd> centered;  // centered, unit-norm retained columns
    for (Eigen::Index j = 0; j < g.num_snps(); ++j) {
        Eigen::VectorXd c = g.counts.col(j);
        c.array() -= c.mean();
        const double norm = c.norm();
        if (norm > 0.0) c /= norm;
        bool drop = false;
        if (norm > 0.0) {
            for (const auto& prev : centered) {
                if (std::fabs(prev.dot(c)) > r_max) {
                    drop = true;
                    break;
                }
            }
        }
        if (!drop) {
            keep.push_back(j);
            centered.push_back(std::move(c));
        }
    }
    if (keep.empty()) throw DataError("correlation pruning removed every SNP");
    GenotypeMatrix out;
    out.individual_ids = g.individual_ids;
    out.counts.resize(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.snp_ids.push_back(g.snp_ids[static_cast<std::size_t>(keep[k])]);
        out.counts.col(static_cast<Eigen::Index>(k)) = g.counts.col(keep[k]);
    }
    return out;
}

Dataset standardize(const Dataset& d) {
    Dataset out = d;
    out.standardization.mean.clear();
    out.standardization.sd.clear();
    auto scale_col = [&](Eigen::Ref<Eigen::VectorXd> col, const std::string& id) {
        const double m = column_mean(col);
        const double s = column_sd(col);
        if (!(s > 0.0)) throw DataError("column " + id + " has zero variance");
        col = (col.array() - m) / s;
        out.standardization.mean.push_back(m);
        out.standardization.sd.push_back(s);
    };
    for (Eigen::Index j = 0; j < out.genotypes.num_snps(); ++j) {
        scale_col(out.genotypes.counts.col(j), out.genotypes.snp_ids[static_cast<std::size_t>(j)]);
    }
    for (Eigen::Index j = 0; j < out.traits.num_traits(); ++j) {
        scale_col(out.traits.values.col(j), out.traits.trait_ids[static_cast<std::size_t>(j)]);
    }
    return out;
}

}  // namespace gnbn
