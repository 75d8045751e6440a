#include "gnbn/model_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "gnbn/errors.hpp"

namespace gnbn {

using nlohmann::json;

std::string serialize_model(const ModelFile& m) {
    json root;
    root["schema_version"] = m.schema_version;

    json nodes = json::array();
    for (const auto& n : m.bn.dag.nodes()) {
        json jn;
        jn["id"] = n.id;
        jn["kind"] = n.kind == NodeKind::Trait ? "trait" : "snp";
        jn["tier"] = n.tier;
        nodes.push_back(jn);
    }
    root["nodes"] = nodes;

    json arcs = json::array();
    for (const auto& [p, c] : m.bn.dag.arcs()) arcs.push_back(json::array({p, c}));
    root["arcs"] = arcs;

    json locals;
    for (const auto& [id, ld] : m.bn.locals) {
        json jl;
        jl["intercept"] = ld.intercept;
        jl["residual_variance"] = ld.residual_variance;
        json coef;
        for (const auto& [parent, beta] : ld.coefficients) coef[parent] = beta;
        jl["coefficients"] = coef.is_null() ? json::object() : coef;
        locals[id] = jl;
    }
    root["locals"] = locals.is_null() ? json::object() : locals;

    json meta;
    meta["fit_method"] = m.metadata.fit_method;
    meta["alpha"] = m.metadata.alpha;
    meta["lambda_policy"] = m.metadata.lambda_policy;
    meta["seed"] = m.metadata.seed;
    meta["data_fingerprint"] = m.metadata.data_fingerprint;
    root["metadata"] = meta;

    if (!m.arc_strengths.empty()) {
        json strengths = json::array();
        for (const auto& [arc, f] : m.arc_strengths) {
            strengths.push_back(json::array({arc.first, arc.second, f}));
        }
        root["arc_strengths"] = strengths;
    }
    return root.dump(2) + "\n";
}

ModelFile parse_model(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }

    try {
        ModelFile m;
        m.schema_version = root.at("schema_version").get<int>();
        if (m.schema_version != 1) {
            throw DataError("unsupported model schema version " +
                            std::to_string(m.schema_version));
        }

        std::vector<Node> nodes;
        for (const auto& jn : root.at("nodes")) {
            Node n;
            n.id = jn.at("id").get<std::string>();
            n.kind = jn.at("kind").get<std::string>() == "trait" ? NodeKind::Trait
                                                                 : NodeKind::Snp;
            n.tier = jn.at("tier").get<int>();
            nodes.push_back(n);
        }
        m.bn.dag = Dag(nodes);
        for (const auto& ja : root.at("arcs")) {
            m.bn.dag = m.bn.dag.add_arc(ja.at(0).get<std::string>(),
                                        ja.at(1).get<std::string>());
        }

        for (const auto& [id, jl] : root.at("locals").items()) {
            LocalDistribution ld;
            ld.node = id;
            ld.intercept = jl.at("intercept").get<double>();
            ld.residual_variance = jl.at("residual_variance").get<double>();
            for (const auto& [parent, beta] : jl.at("coefficients").items()) {
                ld.coefficients[parent] = beta.get<double>();
            }
            m.bn.locals[id] = ld;
        }

        const auto& meta = root.at("metadata");
        m.metadata.fit_method = meta.at("fit_method").get<std::string>();
        m.metadata.alpha = meta.at("alpha").get<double>();
        m.metadata.lambda_policy = meta.at("lambda_policy").get<std::string>();
        m.metadata.seed = meta.at("seed").get<std::uint64_t>();
        m.metadata.data_fingerprint = meta.at("data_fingerprint").get<std::string>();
        m.bn.fit_method = m.metadata.fit_method == "ridge" ? FitMethod::Ridge : FitMethod::Ols;

        if (root.contains("arc_strengths")) {
            for (const auto& js : root.at("arc_strengths")) {
                m.arc_strengths[{js.at(0).get<std::string>(), js.at(1).get<std::string>()}] =
                    js.at(2).get<double>();
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void write_model(const ModelFile& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path);
    out << serialize_model(m);
}

ModelFile read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string to_dot(const ModelFile& m) {
    std::ostringstream out;
    out << "digraph bn {\n";
    out << "  node [style=filled];\n";
    for (const auto& n : m.bn.dag.nodes()) {
        out << "  \"" << n.id << "\" [fillcolor=\""
            << (n.kind == NodeKind::Trait ? "palegreen" : "lightblue") << "\"];\n";
    }
    for (const auto& [p, c] : m.bn.dag.arcs()) {
        out << "  \"" << p << "\" -> \"" << c << "\"";
        auto it = m.arc_strengths.find({p, c});
        if (it != m.arc_strengths.end()) {
            out << " [penwidth=" << std::max(0.5, 4.0 * it->second) << ", label=\""
                << std::setprecision(2) << it->second << "\"]";
        }
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

std::string fingerprint_bytes(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

}  // namespace gnbn
