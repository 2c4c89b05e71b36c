#include "recalleval/report_json.hpp"

#include <cstdio>
#include <sstream>

namespace recalleval {

namespace {

void escape_string(std::ostream& out, const std::string& s) {
    out << '"';
    for (unsigned char c : s) {
        switch (c) {
            case '"': out << "\\\""; break;
            case '\\': out << "\\\\"; break;
            case '\b': out << "\\b"; break;
            case '\f': out << "\\f"; break;
            case '\n': out << "\\n"; break;
            case '\r': out << "\\r"; break;
            case '\t': out << "\\t"; break;
            default:
                if (c < 0x20) {
                    char buffer[8];
                    std::snprintf(buffer, sizeof(buffer), "\\u%04x", c);
                    out << buffer;
                } else {
                    out << static_cast<char>(c);
                }
        }
    }
    out << '"';
}

void dump_value(std::ostream& out, const nlohmann::json& value, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (value.type()) {
        case nlohmann::json::value_t::object: {
            if (value.empty()) { out << "{}"; return; }
            out << "{\n";
            // nlohmann objects iterate in key order already (std::map).
            bool first = true;
            for (const auto& [key, child] : value.items()) {
                if (!first) out << ",\n";
                first = false;
                out << pad_in;
                escape_string(out, key);
                out << ": ";
                dump_value(out, child, depth + 1);
            }
            out << "\n" << pad << "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (value.empty()) { out << "[]"; return; }
            out << "[\n";
            bool first = true;
            for (const auto& child : value) {
                if (!first) out << ",\n";
                first = false;
                out << pad_in;
                dump_value(out, child, depth + 1);
            }
            out << "\n" << pad << "]";
            return;
        }
        case nlohmann::json::value_t::string:
            escape_string(out, value.get_ref<const std::string&>());
            return;
        case nlohmann::json::value_t::boolean:
            out << (value.get<bool>() ? "true" : "false");
            return;
        case nlohmann::json::value_t::number_integer:
            out << value.get<std::int64_t>();
            return;
        case nlohmann::json::value_t::number_unsigned:
            out << value.get<std::uint64_t>();
            return;
        case nlohmann::json::value_t::number_float: {
            // Fixed six decimals: shortest-round-trip formatting varies in
            // the last digits across libraries, fixed formatting does not.
            char buffer[64];
            std::snprintf(buffer, sizeof(buffer), "%.6f", value.get<double>());
            out << buffer;
            return;
        }
        case nlohmann::json::value_t::null:
        default:
            out << "null";
            return;
    }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& value) {
    std::ostringstream out;
    dump_value(out, value, 0);
    out << "\n";
    return out.str();
}

nlohmann::json instance_report_json(const InstanceReport& report) {
    nlohmann::json obj;
    obj["instance_id"] = report.instance_id;
    obj["reference_count"] = report.decisions.size();
    obj["covered_count"] = report.covered_count;
    obj["recall"] = report.recall;
    obj["warnings"] = report.warnings;
    auto decisions = nlohmann::json::array();
    for (const auto& decision : report.decisions) {
        nlohmann::json d;
        d["reference_id"] = decision.reference_id;
        d["covered"] = decision.covered;
        d["stage"] = to_string(decision.stage);
        if (decision.support)
            d["support"] = decision.support->ids();
        else
            d["support"] = nullptr;
        auto trail = nlohmann::json::array();
        for (const auto& entry : decision.trail) {
            nlohmann::json t;
            t["generated_ids"] = entry.generated_ids;
            t["protocol"] = to_string(entry.protocol);
            t["verdict"] = to_string(entry.verdict);
            trail.push_back(std::move(t));
        }
        d["trail"] = std::move(trail);
        d["warnings"] = decision.warnings;
        decisions.push_back(std::move(d));
    }
    obj["decisions"] = std::move(decisions);
    return obj;
}

nlohmann::json corpus_report_json(const CorpusReport& corpus) {
    nlohmann::json obj;
    obj["instance_count"] = corpus.instances.size();
    obj["mean_recall"] = corpus.mean_recall;
    obj["joint_rejections"] = corpus.joint_rejections;
    obj["usage"] = {{"chat_calls", corpus.usage.chat_calls},
                    {"chat_cache_hits", corpus.usage.chat_cache_hits},
                    {"embed_calls", corpus.usage.embed_calls},
                    {"embed_cache_hits", corpus.usage.embed_cache_hits}};
    obj["warnings"] = corpus.warnings;
    auto instances = nlohmann::json::array();
    for (const auto& report : corpus.instances)
        instances.push_back(instance_report_json(report));
    obj["instances"] = std::move(instances);
    return obj;
}

nlohmann::json holistic_mapping_json(const HolisticMapping& mapping) {
    nlohmann::json obj;
    obj["mapping"] = mapping.mapping;
    obj["raw_response"] = mapping.raw_response;
    obj["invalid_id_count"] = mapping.invalid_id_count;
    obj["self_map_count"] = mapping.self_map_count;
    return obj;
}

nlohmann::json config_echo_json(const RunConfig& cfg) {
    nlohmann::json obj;
    obj["dataset_path"] = cfg.dataset_path;
    obj["method"] = cfg.method;
    obj["fuzzy_jaccard_threshold"] = cfg.pipeline.fuzzy_jaccard_threshold;
    obj["lcs_threshold"] = cfg.pipeline.lcs_threshold;
    obj["cosine_threshold"] = cfg.pipeline.cosine_threshold;
    obj["top_k"] = cfg.pipeline.top_k;
    obj["fuzzy_token_similarity"] = cfg.pipeline.fuzzy_token_similarity;
    obj["erecall_threshold"] = cfg.pipeline.erecall_threshold;
    obj["extraction_mode"] = cfg.extraction_mode;
    obj["coref"] = cfg.coref;
    obj["chat_kind"] = cfg.chat_kind;
    obj["chat_endpoint"] = cfg.chat_endpoint;
    obj["chat_model"] = cfg.chat_model;
    obj["chat_script_path"] = cfg.chat_script_path;
    obj["embedding_kind"] = cfg.embedding_kind;
    obj["embedding_endpoint"] = cfg.embedding_endpoint;
    obj["embedding_model"] = cfg.embedding_model;
    obj["embedding_dim"] = cfg.embedding_dim;
    obj["max_output_tokens"] = cfg.max_output_tokens;
    obj["template_dir"] = cfg.template_dir;
    obj["cache_dir"] = cfg.cache_dir;
    obj["cache_mode"] = cfg.cache_mode;
    obj["seed"] = cfg.seed;
    obj["arecall_word_boundary"] = cfg.arecall_word_boundary;
    return obj;
}

nlohmann::json report_document(const RunConfig& cfg, const CorpusReport& corpus,
                               const std::map<std::string, std::string>& template_digests,
                               const std::vector<std::string>& cache_digests,
                               const std::map<std::string, HolisticMapping>& holistic) {
    nlohmann::json doc;
    doc["method"] = cfg.method;
    doc["config"] = config_echo_json(cfg);
    doc["templates"] = template_digests;
    doc["cache_digests_used"] = cache_digests;
    doc["corpus"] = corpus_report_json(corpus);
    if (!holistic.empty()) {
        nlohmann::json mappings;
        for (const auto& [instance_id, mapping] : holistic)
            mappings[instance_id] = holistic_mapping_json(mapping);
        doc["holistic"] = std::move(mappings);
    }
    return doc;
}

}  // namespace recalleval
