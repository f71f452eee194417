#pragma once

#include <wikisem/types.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wikisem {

/// Malformed input. `line` is 1-based and 0 when not applicable; `offset`
/// is the byte offset within the line when the parser reports one.
class FormatError : public std::runtime_error {
  public:
    FormatError(const std::string& message, std::size_t line = 0,
                std::optional<std::size_t> offset = std::nullopt);

    std::size_t line() const noexcept { return line_; }
    std::optional<std::size_t> offset() const noexcept { return offset_; }
    /// Message without the location prefix.
    const std::string& detail() const noexcept { return detail_; }

  private:
    std::string detail_;
    std::size_t line_;
    std::optional<std::size_t> offset_;
};

// ---------------------------------------------------------------------------
// Entity dumps

/// Decodes one line of the simplified `.kg.jsonl` dump. Unknown keys are
/// ignored and `sitelinks` defaults to 0.
EntityRecord parse_entity_record(std::string_view line);

/// Inverse of parse_entity_record; one line without the trailing newline.
std::string format_entity_record(const EntityRecord& record);

struct WikidataOptions {
    std::string disambiguation_class = "Q4167410";
    /// Keep labels and titles only for these languages; empty keeps all.
    std::vector<std::string> languages;
};

/// Adapter for one entity object of a real Wikidata JSON dump. Returns
/// std::nullopt for anything that is not an item (properties, lexemes).
std::optional<EntityRecord> parse_wikidata_entity(std::string_view raw,
                                                  const WikidataOptions& options = {});

enum class DumpFormat : std::uint8_t { Simplified, Wikidata };

/// Streams records out of a dump one line at a time. The Wikidata format
/// tolerates the enclosing "[" / "]" lines and trailing commas of the
/// official array dumps.
class EntityRecordReader {
  public:
    EntityRecordReader(std::istream& in, DumpFormat format, WikidataOptions options = {});

    /// Returns false at end of input. Throws FormatError with the line number.
    bool next(EntityRecord& out);

    std::size_t line() const noexcept { return line_; }
    std::size_t skipped() const noexcept { return skipped_; }

  private:
    std::istream* in_;
    DumpFormat format_;
    WikidataOptions options_;
    std::string buffer_;
    std::size_t line_ = 0;
    std::size_t skipped_ = 0;
};

// ---------------------------------------------------------------------------
// Anchor dictionaries

struct AnchorEntry {
    std::string anchor;
    std::string target_title;
    std::uint64_t count = 0;

    friend bool operator==(const AnchorEntry&, const AnchorEntry&) = default;
};

/// `anchor<TAB>target_title<TAB>count`; errors carry `line_number`.
AnchorEntry parse_anchor_record(std::string_view line, std::size_t line_number = 0);

/// Reads a whole `.anchors.tsv` stream, calling `sink` per entry. Blank
/// lines are skipped.
template <typename Sink>
std::size_t read_anchor_records(std::istream& in, Sink&& sink);

// ---------------------------------------------------------------------------
// Datasets

struct DatasetOutlier {
    OutlierTier tier;
    std::string surface;

    friend bool operator==(const DatasetOutlier&, const DatasetOutlier&) = default;
};

struct DatasetRecord {
    EntityId class_id;
    std::string class_label;
    std::string language;
    std::vector<std::string> cluster;
    std::vector<DatasetOutlier> outliers;

    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// Shape limits a serialized record must respect.
struct RecordLimits {
    std::size_t min_cluster = 7;
    std::size_t max_cluster = 8;
    std::size_t max_outliers = 6;
    std::size_t max_per_tier = 2;
};

/// Empty when the record is valid, otherwise the violated rule.
std::optional<std::string> check_record(const DatasetRecord& record,
                                        const RecordLimits& limits = {});

nlohmann::ordered_json to_json(const DatasetRecord& record);
DatasetRecord dataset_record_from_json(const nlohmann::json& j);

/// Writes one canonical line per record. When `meta` is given it becomes a
/// leading `{"meta": ...}` line. Throws FormatError on an invalid record.
void write_dataset(std::span<const DatasetRecord> records, std::ostream& out,
                   const RecordLimits& limits = {},
                   const std::optional<nlohmann::ordered_json>& meta = std::nullopt);

struct DatasetFile {
    std::optional<nlohmann::json> meta;
    std::vector<DatasetRecord> records;
};

/// Throws FormatError naming the record index and violated rule.
DatasetFile read_dataset_file(std::istream& in, const RecordLimits& limits = {});
std::vector<DatasetRecord> read_dataset(std::istream& in, const RecordLimits& limits = {});

// ---------------------------------------------------------------------------
// Embeddings

enum class HeaderMode : std::uint8_t { Auto, Present, Absent };

/// Token -> dense vector table. Tokens are case sensitive and unique;
/// later duplicates are dropped and counted.
template <typename Scalar>
class BasicEmbedding {
  public:
    using Vector = std::span<const Scalar>;

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    bool supports_phrases() const noexcept { return supports_phrases_; }
    std::size_t duplicates() const noexcept { return duplicates_; }

    std::optional<Vector> find(const std::string& token) const {
        auto it = index_.find(token);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return row(it->second);
    }
    bool contains(const std::string& token) const { return index_.contains(token); }

    const std::string& token(std::size_t i) const { return tokens_[i]; }
    Vector row(std::size_t i) const {
        return Vector(data_.data() + i * dimension_, dimension_);
    }

    /// Appends a token; returns false (and counts a duplicate) when present.
    bool add(std::string token, std::span<const Scalar> values);

    void set_dimension(std::size_t d) { dimension_ = d; }
    void set_supports_phrases(bool v) noexcept { supports_phrases_ = v; }

  private:
    std::size_t dimension_ = 0;
    bool supports_phrases_ = false;
    std::size_t duplicates_ = 0;
    std::vector<std::string> tokens_;
    std::vector<Scalar> data_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

using Embedding = BasicEmbedding<float>;

/// Parses whitespace-separated text vectors (word2vec text / GloVe). In
/// Auto mode a first line of exactly two integers is a header. Throws
/// FormatError with the line number on a component-count mismatch or when
/// the input holds no vectors.
template <typename Scalar>
BasicEmbedding<Scalar> load_embedding(std::istream& in, HeaderMode mode = HeaderMode::Auto);

Embedding load_embedding_file(const std::filesystem::path& path,
                              HeaderMode mode = HeaderMode::Auto);

// ---------------------------------------------------------------------------

template <typename Sink>
std::size_t read_anchor_records(std::istream& in, Sink&& sink) {
    std::string line;
    std::size_t line_number = 0;
    std::size_t count = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        sink(parse_anchor_record(line, line_number));
        ++count;
    }
    return count;
}

} // namespace wikisem
