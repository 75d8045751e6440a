#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "gnbn/averaging.hpp"
#include "gnbn/model.hpp"

namespace gnbn {

// Everything persisted alongside a fitted model.
struct ModelMetadata {
    std::string fit_method = "ols";
    double alpha = 0.0;
    std::string lambda_policy = "none";
    std::uint64_t seed = 0;
    std::string data_fingerprint;
};

struct ModelFile {
    int schema_version = 1;
    GaussianBn bn;
    ModelMetadata metadata;
    std::map<Arc, double> arc_strengths;  // present only for averaged models
};

std::string serialize_model(const ModelFile& m);
ModelFile parse_model(const std::string& text);

void write_model(const ModelFile& m, const std::string& path);
ModelFile read_model(const std::string& path);

// Graphviz rendering; trait and SNP nodes are colored distinctly, and arc
// strengths (when present) set pen width and labels.
std::string to_dot(const ModelFile& m);

// FNV-1a fingerprint of a dataset's numeric contents.
std::string fingerprint_bytes(const void* data, std::size_t size);

}  // namespace gnbn
