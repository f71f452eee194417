#include <wikisem/formats.hpp>

#include <map>
#include <set>

namespace wikisem {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<std::string> check_record(const DatasetRecord& r, const RecordLimits& limits) {
    if (r.class_id.empty()) {
        return "class_id is empty";
    }
    if (r.cluster.size() < limits.min_cluster || r.cluster.size() > limits.max_cluster) {
        return "cluster has " + std::to_string(r.cluster.size()) + " items, expected " +
               std::to_string(limits.min_cluster) + "-" + std::to_string(limits.max_cluster);
    }
    if (r.outliers.empty() || r.outliers.size() > limits.max_outliers) {
        return "record has " + std::to_string(r.outliers.size()) + " outliers, expected 1-" +
               std::to_string(limits.max_outliers);
    }
    std::map<OutlierTier, std::size_t> per_tier;
    for (const auto& o : r.outliers) {
        if (++per_tier[o.tier] > limits.max_per_tier) {
            return "more than " + std::to_string(limits.max_per_tier) + " outliers in tier " +
                   std::string(to_string(o.tier));
        }
    }
    std::set<std::string_view> seen;
    auto admit = [&](const std::string& s) -> std::optional<std::string> {
        if (s.empty()) {
            return "empty surface";
        }
        if (!seen.insert(s).second) {
            return "surface '" + s + "' appears twice";
        }
        return std::nullopt;
    };
    for (const auto& s : r.cluster) {
        if (auto e = admit(s)) {
            return e;
        }
    }
    for (const auto& o : r.outliers) {
        if (auto e = admit(o.surface)) {
            return e;
        }
    }
    return std::nullopt;
}

ordered_json to_json(const DatasetRecord& r) {
    ordered_json j;
    j["class_id"] = r.class_id.str();
    j["class_label"] = r.class_label;
    j["language"] = r.language;
    j["cluster"] = r.cluster;
    auto outliers = ordered_json::array();
    for (const auto& o : r.outliers) {
        ordered_json e;
        e["tier"] = std::string(to_string(o.tier));
        e["surface"] = o.surface;
        outliers.push_back(std::move(e));
    }
    j["outliers"] = std::move(outliers);
    return j;
}

DatasetRecord dataset_record_from_json(const json& j) {
    if (!j.is_object()) {
        throw FormatError("record is not an object");
    }
    auto string_field = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            throw FormatError(std::string("missing string field '") + key + "'");
        }
        return it->get<std::string>();
    };
    DatasetRecord r;
    r.class_id = EntityId(string_field("class_id"));
    r.class_label = string_field("class_label");
    r.language = string_field("language");

    auto cluster = j.find("cluster");
    if (cluster == j.end() || !cluster->is_array()) {
        throw FormatError("missing array field 'cluster'");
    }
    for (const auto& s : *cluster) {
        if (!s.is_string()) {
            throw FormatError("cluster items must be strings");
        }
        r.cluster.push_back(s.get<std::string>());
    }

    auto outliers = j.find("outliers");
    if (outliers == j.end() || !outliers->is_array()) {
        throw FormatError("missing array field 'outliers'");
    }
    for (const auto& o : *outliers) {
        if (!o.is_object()) {
            throw FormatError("outliers must be objects");
        }
        auto tier = o.find("tier");
        auto surface = o.find("surface");
        if (tier == o.end() || !tier->is_string() || surface == o.end() || !surface->is_string()) {
            throw FormatError("outlier needs string fields 'tier' and 'surface'");
        }
        auto parsed = parse_tier(tier->get_ref<const std::string&>());
        if (!parsed) {
            throw FormatError("unknown outlier tier '" + tier->get<std::string>() + "'");
        }
        r.outliers.push_back({*parsed, surface->get<std::string>()});
    }
    return r;
}

void write_dataset(std::span<const DatasetRecord> records, std::ostream& out,
                   const RecordLimits& limits, const std::optional<ordered_json>& meta) {
    if (meta) {
        ordered_json header;
        header["meta"] = *meta;
        out << header.dump(-1, ' ', false, json::error_handler_t::strict) << '\n';
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (auto e = check_record(records[i], limits)) {
            throw FormatError("record " + std::to_string(i + 1) + ": " + *e);
        }
        try {
            out << to_json(records[i]).dump(-1, ' ', false, json::error_handler_t::strict)
                << '\n';
        } catch (const json::exception& e) {
            throw FormatError("record " + std::to_string(i + 1) + ": " + e.what());
        }
    }
}

DatasetFile read_dataset_file(std::istream& in, const RecordLimits& limits) {
    DatasetFile file;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError("record " + std::to_string(file.records.size() + 1) +
                                  ": malformed JSON",
                              line_number, e.byte);
        }
        if (file.records.empty() && !file.meta && j.is_object() && j.size() == 1 &&
            j.contains("meta")) {
            file.meta = j["meta"];
            continue;
        }
        const auto index = file.records.size() + 1;
        DatasetRecord r;
        try {
            r = dataset_record_from_json(j);
        } catch (const FormatError& e) {
            throw FormatError("record " + std::to_string(index) + ": " + e.detail(),
                              line_number);
        }
        if (auto e = check_record(r, limits)) {
            throw FormatError("record " + std::to_string(index) + ": " + *e, line_number);
        }
        file.records.push_back(std::move(r));
    }
    return file;
}

std::vector<DatasetRecord> read_dataset(std::istream& in, const RecordLimits& limits) {
    return read_dataset_file(in, limits).records;
}

} // namespace wikisem
