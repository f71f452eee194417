#pragma once

#include <wikisem/formats.hpp>
#include <wikisem/generator.hpp>
#include <wikisem/graph.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace wikisem {

struct AnchorWinner {
    std::string anchor;
    double probability = 0.0;
};

/// Per-language page title -> most probable inlink anchor.
class AnchorIndex {
  public:
    AnchorIndex() = default;
    explicit AnchorIndex(std::string language) : language_(std::move(language)) {}

    const std::string& language() const noexcept { return language_; }
    std::size_t size() const noexcept { return winners_.size(); }

    /// Titles compare with underscores read as spaces.
    const AnchorWinner* find(std::string_view title) const;

  private:
    friend class AnchorIndexBuilder;
    std::string language_;
    std::unordered_map<std::string, AnchorWinner> winners_;
};

/// Accumulates (anchor, title) counts; repeated pairs add up.
class AnchorIndexBuilder {
  public:
    explicit AnchorIndexBuilder(std::string language) : language_(std::move(language)) {}

    void add(const AnchorEntry& entry);
    /// Winner is argmax count / total per title; ties go to the
    /// lexicographically smallest anchor.
    AnchorIndex finish() &&;

  private:
    std::string language_;
    std::unordered_map<std::string, std::unordered_map<std::string, std::uint64_t>> counts_;
};

AnchorIndex build_anchor_index(std::span<const AnchorEntry> entries, std::string language);

struct LanguageProfile {
    std::string language;
    bool cjk_mode = false;
    std::vector<std::string> stop_prefixes;
    std::vector<std::string> stop_suffixes;
    bool single_char_filter_enabled = true;
    /// English-style extra check on first/last whitespace-delimited words.
    bool word_affix_check = false;
    std::size_t affix_window = 6;
    std::size_t digit_dup_threshold = 2;
    std::size_t affix_dup_threshold = 3;
    // CJK variant: >= cjk_char_min share a first/last non-kana character, or
    // > affix_dup_threshold share the first/last two characters.
    std::size_t cjk_char_min = 6;
    std::size_t cjk_pair_window = 2;

    /// Throws std::invalid_argument when a threshold or window is zero.
    void validate() const;
};

/// Built-in profile for a language code; unknown codes get the generic
/// non-CJK profile.
LanguageProfile default_profile(std::string_view language);

enum class ViolationCode : std::uint8_t {
    DigitDuplicates,
    AffixOverlap,
    StopAffix,
    SingleChar,
    TooFewAfterDedup,
};

std::string_view to_string(ViolationCode code) noexcept;

struct Violation {
    ViolationCode code;
    std::vector<std::string> detail;
};

class UnresolvableEntityError : public std::runtime_error {
  public:
    explicit UnresolvableEntityError(const EntityId& id)
        : std::runtime_error("entity " + id.str() + " has neither anchor nor label") {}
};

/// Winning anchor for the entity's page title, falling back to the label
/// in the index language. Throws UnresolvableEntityError when neither exists.
std::string resolve_surface(const AnchorIndex& index, const KnowledgeGraph& g, const EntityId& id);

/// Cluster filters evaluated in a fixed order; the checks see the
/// deduplicated surfaces, so the result does not depend on list order.
std::vector<Violation> reject_reasons(std::span<const std::string> cluster,
                                      const LanguageProfile& profile, std::size_t min_size);

/// True when the surface starts with a stop prefix or ends with a stop suffix.
bool has_stop_affix(std::string_view surface, const LanguageProfile& profile);

struct RefineReject {
    std::vector<Violation> violations;
    /// Every outlier was unresolvable, filtered, or a duplicate.
    bool no_outliers = false;
};

using RefineOutcome = std::variant<DatasetRecord, RefineReject>;

RefineOutcome refine_group(const RawGroup& raw, const AnchorIndex& index, const KnowledgeGraph& g,
                           const LanguageProfile& profile, const RecordLimits& limits);

} // namespace wikisem
