#include <wikisem/formats.hpp>

#include <algorithm>
#include <charconv>

namespace wikisem {

using nlohmann::json;

FormatError::FormatError(const std::string& message, std::size_t line,
                         std::optional<std::size_t> offset)
    : std::runtime_error([&] {
          std::string m = message;
          if (line > 0) {
              m = "line " + std::to_string(line) + ": " + m;
          }
          if (offset) {
              m += " (byte " + std::to_string(*offset) + ")";
          }
          return m;
      }()),
      detail_(message), line_(line), offset_(offset) {}

std::string_view to_string(OutlierTier tier) noexcept {
    switch (tier) {
    case OutlierTier::O1:
        return "O1";
    case OutlierTier::O2:
        return "O2";
    case OutlierTier::O3:
        return "O3";
    }
    return "?";
}

std::optional<OutlierTier> parse_tier(std::string_view text) noexcept {
    if (text == "O1") {
        return OutlierTier::O1;
    }
    if (text == "O2") {
        return OutlierTier::O2;
    }
    if (text == "O3") {
        return OutlierTier::O3;
    }
    return std::nullopt;
}

namespace {

json parse_object(std::string_view text) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what(), 0, e.byte);
    }
    if (!j.is_object()) {
        throw FormatError("expected a JSON object");
    }
    return j;
}

std::vector<EntityId> id_list(const json& j, const char* key) {
    std::vector<EntityId> out;
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return out;
    }
    if (!it->is_array()) {
        throw FormatError(std::string("'") + key + "' must be an array");
    }
    for (const auto& v : *it) {
        if (!v.is_string() || v.get_ref<const std::string&>().empty()) {
            throw FormatError(std::string("'") + key + "' must hold non-empty strings");
        }
        out.emplace_back(v.get<std::string>());
    }
    return out;
}

std::map<std::string, std::string> string_map(const json& j, const char* key) {
    std::map<std::string, std::string> out;
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return out;
    }
    if (!it->is_object()) {
        throw FormatError(std::string("'") + key + "' must be an object");
    }
    for (const auto& [k, v] : it->items()) {
        if (!v.is_string()) {
            throw FormatError(std::string("'") + key + "." + k + "' must be a string");
        }
        out.emplace(k, v.get<std::string>());
    }
    return out;
}

bool keep_language(const WikidataOptions& options, const std::string& lang) {
    return options.languages.empty() ||
           std::find(options.languages.begin(), options.languages.end(), lang) !=
               options.languages.end();
}

// Sitelink keys of language editions look like "enwiki" or "zh_yuewiki".
std::optional<std::string> wiki_language(std::string_view site) {
    static constexpr std::string_view kSuffix = "wiki";
    static constexpr std::string_view kProjects[] = {
        "commons", "species", "meta", "mediawiki", "wikidata", "sources",
        "incubator", "outreach", "wikimania", "wikifunctions", "test", "test2"};
    if (site.size() <= kSuffix.size() || !site.ends_with(kSuffix)) {
        return std::nullopt;
    }
    auto lang = site.substr(0, site.size() - kSuffix.size());
    if (std::find(std::begin(kProjects), std::end(kProjects), lang) != std::end(kProjects)) {
        return std::nullopt;
    }
    std::string out(lang);
    std::replace(out.begin(), out.end(), '_', '-');
    return out;
}

std::vector<EntityId> claim_targets(const json& claims, const char* property) {
    std::vector<EntityId> out;
    auto it = claims.find(property);
    if (it == claims.end()) {
        return out;
    }
    if (!it->is_array()) {
        throw FormatError(std::string("claims.") + property + " must be an array");
    }
    for (const auto& statement : *it) {
        if (!statement.is_object()) {
            throw FormatError(std::string("claims.") + property + " holds a non-object");
        }
        if (statement.value("rank", "normal") == "deprecated") {
            continue;
        }
        auto snak = statement.find("mainsnak");
        if (snak == statement.end() || !snak->is_object() ||
            snak->value("snaktype", "value") != "value") {
            continue;
        }
        auto dv = snak->find("datavalue");
        if (dv == snak->end() || !dv->is_object()) {
            continue;
        }
        auto value = dv->find("value");
        if (value == dv->end() || !value->is_object()) {
            continue;
        }
        if (auto id = value->find("id"); id != value->end() && id->is_string()) {
            out.emplace_back(id->get<std::string>());
        } else if (auto num = value->find("numeric-id");
                   num != value->end() && num->is_number_integer()) {
            out.emplace_back("Q" + std::to_string(num->get<std::int64_t>()));
        }
    }
    return out;
}

} // namespace

namespace {

template <typename F>
auto translate_json_errors(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("unexpected JSON structure: ") + e.what());
    }
}

EntityRecord entity_record_from_line(std::string_view line) {
    const auto j = parse_object(line);
    EntityRecord r;
    auto id = j.find("id");
    if (id == j.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
        throw FormatError("missing or empty 'id'");
    }
    r.id = EntityId(id->get<std::string>());
    r.labels = string_map(j, "labels");
    r.wiki_titles = string_map(j, "wiki_titles");
    if (auto s = j.find("sitelinks"); s != j.end() && !s->is_null()) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0)) {
            throw FormatError("'sitelinks' must be a non-negative integer");
        }
        r.sitelinks = s->get<std::uint64_t>();
    }
    r.instance_of = id_list(j, "instance_of");
    r.subclass_of = id_list(j, "subclass_of");
    if (auto d = j.find("is_disambiguation"); d != j.end() && !d->is_null()) {
        if (!d->is_boolean()) {
            throw FormatError("'is_disambiguation' must be a boolean");
        }
        r.is_disambiguation = d->get<bool>();
    }
    return r;
}

} // namespace

EntityRecord parse_entity_record(std::string_view line) {
    return translate_json_errors([&] { return entity_record_from_line(line); });
}

std::string format_entity_record(const EntityRecord& r) {
    nlohmann::ordered_json j;
    j["id"] = r.id.str();
    j["labels"] = r.labels;
    j["sitelinks"] = r.sitelinks;
    auto ids = [](const std::vector<EntityId>& v) {
        auto a = nlohmann::ordered_json::array();
        for (const auto& id : v) {
            a.push_back(id.str());
        }
        return a;
    };
    j["instance_of"] = ids(r.instance_of);
    j["subclass_of"] = ids(r.subclass_of);
    j["is_disambiguation"] = r.is_disambiguation;
    j["wiki_titles"] = r.wiki_titles;
    return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

namespace {

std::optional<EntityRecord> wikidata_entity(std::string_view raw,
                                            const WikidataOptions& options) {
    const auto j = parse_object(raw);
    auto id = j.find("id");
    if (id == j.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
        throw FormatError("entity without 'id'");
    }
    const auto& id_text = id->get_ref<const std::string&>();
    if (auto type = j.find("type"); type != j.end()) {
        if (!type->is_string()) {
            throw FormatError("'type' must be a string");
        }
        if (type->get_ref<const std::string&>() != "item") {
            return std::nullopt;
        }
    } else if (id_text.front() != 'Q') {
        return std::nullopt;
    }

    EntityRecord r;
    r.id = EntityId(id_text);

    if (auto labels = j.find("labels"); labels != j.end() && !labels->is_null()) {
        if (!labels->is_object()) {
            throw FormatError("'labels' must be an object");
        }
        for (const auto& [lang, label] : labels->items()) {
            if (!keep_language(options, lang)) {
                continue;
            }
            if (label.is_object()) {
                if (auto v = label.find("value"); v != label.end() && v->is_string()) {
                    r.labels.emplace(lang, v->get<std::string>());
                }
            } else if (label.is_string()) {
                r.labels.emplace(lang, label.get<std::string>());
            } else {
                throw FormatError("label for '" + lang + "' is neither object nor string");
            }
        }
    }

    if (auto claims = j.find("claims"); claims != j.end() && !claims->is_null()) {
        if (!claims->is_object()) {
            // Empty entities serialize claims as [] in real dumps.
            if (!(claims->is_array() && claims->empty())) {
                throw FormatError("'claims' must be an object");
            }
        } else {
            r.instance_of = claim_targets(*claims, "P31");
            r.subclass_of = claim_targets(*claims, "P279");
        }
    }
    r.is_disambiguation =
        std::any_of(r.instance_of.begin(), r.instance_of.end(),
                    [&](const EntityId& c) { return c.str() == options.disambiguation_class; });

    if (auto sitelinks = j.find("sitelinks"); sitelinks != j.end() && !sitelinks->is_null()) {
        if (sitelinks->is_object()) {
            r.sitelinks = sitelinks->size();
            for (const auto& [site, link] : sitelinks->items()) {
                auto lang = wiki_language(site);
                if (!lang || !keep_language(options, *lang) || !link.is_object()) {
                    continue;
                }
                if (auto t = link.find("title"); t != link.end() && t->is_string()) {
                    r.wiki_titles.emplace(*lang, t->get<std::string>());
                }
            }
        } else if (!(sitelinks->is_array() && sitelinks->empty())) {
            throw FormatError("'sitelinks' must be an object");
        }
    }
    return r;
}

} // namespace

std::optional<EntityRecord> parse_wikidata_entity(std::string_view raw,
                                                  const WikidataOptions& options) {
    return translate_json_errors([&] { return wikidata_entity(raw, options); });
}

EntityRecordReader::EntityRecordReader(std::istream& in, DumpFormat format,
                                       WikidataOptions options)
    : in_(&in), format_(format), options_(std::move(options)) {}

bool EntityRecordReader::next(EntityRecord& out) {
    while (std::getline(*in_, buffer_)) {
        ++line_;
        std::string_view line = buffer_;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.remove_suffix(1);
        }
        if (format_ == DumpFormat::Wikidata) {
            if (!line.empty() && line.back() == ',') {
                line.remove_suffix(1);
            }
            if (line == "[" || line == "]") {
                continue;
            }
        }
        if (line.empty()) {
            continue;
        }
        try {
            if (format_ == DumpFormat::Simplified) {
                out = parse_entity_record(line);
                return true;
            }
            if (auto r = parse_wikidata_entity(line, options_)) {
                out = std::move(*r);
                return true;
            }
            ++skipped_;
        } catch (const FormatError& e) {
            throw FormatError(e.detail(), line_, e.offset());
        }
    }
    return false;
}

AnchorEntry parse_anchor_record(std::string_view line, std::size_t line_number) {
    std::string_view fields[3];
    std::size_t n = 0;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        if (n == 3) {
            throw FormatError("expected 3 tab-separated fields, found more", line_number);
        }
        fields[n++] = line.substr(start, tab == std::string_view::npos ? tab : tab - start);
        if (tab == std::string_view::npos) {
            break;
        }
        start = tab + 1;
    }
    if (n != 3) {
        throw FormatError("expected 3 tab-separated fields, found " + std::to_string(n),
                          line_number);
    }
    if (fields[0].empty()) {
        throw FormatError("empty anchor", line_number);
    }
    std::uint64_t count = 0;
    auto count_text = fields[2];
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size()) {
        throw FormatError("count is not a decimal integer: '" + std::string(count_text) + "'",
                          line_number);
    }
    if (count < 1) {
        throw FormatError("count must be at least 1", line_number);
    }
    return AnchorEntry{std::string(fields[0]), std::string(fields[1]), count};
}

} // namespace wikisem
