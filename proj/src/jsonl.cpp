#include "recalleval/jsonl.hpp"

#include <fstream>
#include <set>

#include "json.hpp"
#include "recalleval/errors.hpp"
#include "recalleval/preprocess.hpp"

namespace recalleval {

namespace {

std::string require_string(const nlohmann::json& obj, const char* field, std::size_t line,
                           const std::string& prefix = "") {
    std::string path = prefix.empty() ? field : prefix + "." + field;
    if (!obj.contains(field)) throw SchemaError("missing required field", line, path);
    if (!obj[field].is_string()) throw SchemaError("field must be a string", line, path);
    return obj[field].get<std::string>();
}

FactSet parse_fact_list(const nlohmann::json& arr, FactOrigin origin, std::size_t line,
                        const std::string& field) {
    if (!arr.is_array()) throw SchemaError("field must be an array", line, field);
    std::vector<Fact> facts;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& entry = arr[i];
        std::string path = field + "[" + std::to_string(i) + "]";
        if (!entry.is_object()) throw SchemaError("entry must be an object", line, path);
        std::optional<std::string> anchor;
        if (entry.contains("anchor")) {
            if (!entry["anchor"].is_string())
                throw SchemaError("field must be a string", line, path + ".anchor");
            anchor = entry["anchor"].get<std::string>();
        }
        std::string text = require_string(entry, "text", line, path);
        try {
            facts.push_back(
                Fact::make(make_fact_id(origin, i + 1), std::move(anchor), text, origin));
        } catch (const std::invalid_argument& e) {
            throw SchemaError(e.what(), line, path);
        }
    }
    return FactSet::make(std::move(facts), origin);
}

}  // namespace

std::vector<EvalInstance> load_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open instances file: " + path);

    std::vector<EvalInstance> instances;
    std::set<std::string> seen_ids;
    std::string raw_line;
    std::size_t line = 0;
    while (std::getline(in, raw_line)) {
        ++line;
        if (raw_line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(raw_line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(std::string("invalid JSON: ") + e.what(), line, "");
        }
        if (!obj.is_object()) throw SchemaError("line must hold a JSON object", line, "");

        EvalInstance instance;
        instance.instance_id = require_string(obj, "instance_id", line);
        if (instance.instance_id.empty())
            throw SchemaError("instance_id must be non-empty", line, "instance_id");
        if (!seen_ids.insert(instance.instance_id).second)
            throw SchemaError("duplicate instance_id " + instance.instance_id, line,
                              "instance_id");
        instance.question = require_string(obj, "question", line);

        if (!obj.contains("reference"))
            throw SchemaError("missing required field", line, "reference");
        instance.reference =
            dedupe_facts(parse_fact_list(obj["reference"], FactOrigin::reference, line,
                                         "reference"));
        if (instance.reference.empty())
            throw SchemaError("reference must contain at least one fact", line, "reference");

        const bool has_answer = obj.contains("generated_answer");
        const bool has_facts = obj.contains("generated");
        if (has_answer == has_facts)
            throw SchemaError("exactly one of generated_answer / generated is required", line,
                              has_answer ? "generated_answer" : "generated");
        if (has_answer) {
            if (!obj["generated_answer"].is_string())
                throw SchemaError("field must be a string", line, "generated_answer");
            instance.generated_raw = obj["generated_answer"].get<std::string>();
        } else {
            instance.generated = dedupe_facts(
                parse_fact_list(obj["generated"], FactOrigin::generated, line, "generated"));
        }
        instances.push_back(std::move(instance));
    }
    return instances;
}

namespace {

nlohmann::json fact_list_json(const FactSet& set) {
    auto arr = nlohmann::json::array();
    for (const auto& fact : set.facts()) {
        nlohmann::json entry;
        if (fact.anchor()) entry["anchor"] = *fact.anchor();
        entry["text"] = fact.text();
        arr.push_back(std::move(entry));
    }
    return arr;
}

}  // namespace

void write_instances(const std::string& path, const std::vector<EvalInstance>& instances) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RecallError("cannot write instances file: " + path);
    for (const auto& instance : instances) {
        nlohmann::json obj;
        obj["instance_id"] = instance.instance_id;
        obj["question"] = instance.question;
        obj["reference"] = fact_list_json(instance.reference);
        if (instance.generated)
            obj["generated"] = fact_list_json(*instance.generated);
        else if (instance.generated_raw)
            obj["generated_answer"] = *instance.generated_raw;
        out << obj.dump() << "\n";
    }
}

std::vector<PairLabel> load_pair_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open pair-label file: " + path);

    std::vector<PairLabel> labels;
    std::string raw_line;
    std::size_t line = 0;
    while (std::getline(in, raw_line)) {
        ++line;
        if (raw_line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(raw_line);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(std::string("invalid JSON: ") + e.what(), line, "");
        }
        if (!obj.is_object()) throw SchemaError("line must hold a JSON object", line, "");
        PairLabel label;
        label.instance_id = require_string(obj, "instance_id", line);
        label.reference_id = require_string(obj, "reference_id", line);
        label.source_id = require_string(obj, "source_id", line);
        try {
            label.label = parse_pair_label(require_string(obj, "label", line));
        } catch (const SchemaError& e) {
            throw SchemaError(e.what(), line, "label");
        }
        labels.push_back(std::move(label));
    }
    return labels;
}

}  // namespace recalleval
