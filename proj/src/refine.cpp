#include <wikisem/refine.hpp>
#include <wikisem/text.hpp>

#include <algorithm>
#include <map>
#include <unordered_set>

namespace wikisem {

const AnchorWinner* AnchorIndex::find(std::string_view title) const {
    auto it = winners_.find(text::normalize_title(title));
    return it == winners_.end() ? nullptr : &it->second;
}

void AnchorIndexBuilder::add(const AnchorEntry& entry) {
    counts_[text::normalize_title(entry.target_title)][entry.anchor] += entry.count;
}

AnchorIndex AnchorIndexBuilder::finish() && {
    AnchorIndex index(std::move(language_));
    index.winners_.reserve(counts_.size());
    for (auto& [title, anchors] : counts_) {
        std::uint64_t total = 0;
        const std::string* best = nullptr;
        std::uint64_t best_count = 0;
        for (const auto& [anchor, count] : anchors) {
            total += count;
            if (best == nullptr || count > best_count || (count == best_count && anchor < *best)) {
                best = &anchor;
                best_count = count;
            }
        }
        index.winners_.emplace(title, AnchorWinner{*best, static_cast<double>(best_count) /
                                                              static_cast<double>(total)});
    }
    counts_.clear();
    return index;
}

AnchorIndex build_anchor_index(std::span<const AnchorEntry> entries, std::string language) {
    AnchorIndexBuilder builder(std::move(language));
    for (const auto& e : entries) {
        builder.add(e);
    }
    return std::move(builder).finish();
}

void LanguageProfile::validate() const {
    if (affix_window == 0 || digit_dup_threshold == 0 || affix_dup_threshold == 0 ||
        cjk_char_min == 0 || cjk_pair_window == 0) {
        throw std::invalid_argument("language profile thresholds and windows must be >= 1");
    }
}

LanguageProfile default_profile(std::string_view language) {
    LanguageProfile p;
    p.language = std::string(language);
    p.stop_prefixes = {"Category:", "Template:", "Wikipedia:", "Portal:", "Help:", "File:"};
    if (language == "en") {
        p.word_affix_check = true;
        p.stop_prefixes.push_back("List of ");
    } else if (language == "de") {
        p.stop_prefixes.insert(p.stop_prefixes.end(), {"Kategorie:", "Vorlage:", "Liste "});
    } else if (language == "es") {
        p.stop_prefixes.insert(p.stop_prefixes.end(), {"Categoría:", "Plantilla:", "Anexo:"});
    } else if (language == "ja") {
        p.cjk_mode = true;
        p.single_char_filter_enabled = false;
        p.stop_prefixes.insert(p.stop_prefixes.end(), {"カテゴリ:", "Category:"});
        p.stop_suffixes = {"一覧"};
    } else if (language == "zh") {
        p.cjk_mode = true;
        p.single_char_filter_enabled = false;
        p.stop_prefixes.insert(p.stop_prefixes.end(), {"分类:", "Category:"});
        p.stop_suffixes = {"列表"};
    }
    return p;
}

std::string_view to_string(ViolationCode code) noexcept {
    switch (code) {
    case ViolationCode::DigitDuplicates:
        return "DigitDuplicates";
    case ViolationCode::AffixOverlap:
        return "AffixOverlap";
    case ViolationCode::StopAffix:
        return "StopAffix";
    case ViolationCode::SingleChar:
        return "SingleChar";
    case ViolationCode::TooFewAfterDedup:
        return "TooFewAfterDedup";
    }
    return "?";
}

std::string resolve_surface(const AnchorIndex& index, const KnowledgeGraph& g, const EntityId& id) {
    const auto& e = g.entity(g.index_of(id));
    if (const auto* title = e.wiki_title(index.language())) {
        if (const auto* winner = index.find(*title)) {
            return winner->anchor;
        }
    }
    if (const auto* label = e.label(index.language()); label && !label->empty()) {
        return *label;
    }
    throw UnresolvableEntityError(id);
}

bool has_stop_affix(std::string_view surface, const LanguageProfile& profile) {
    return std::any_of(profile.stop_prefixes.begin(), profile.stop_prefixes.end(),
                       [&](const std::string& p) { return surface.starts_with(p); }) ||
           std::any_of(profile.stop_suffixes.begin(), profile.stop_suffixes.end(),
                       [&](const std::string& s) { return surface.ends_with(s); });
}

namespace {

std::vector<std::string> dedup_keep_first(std::span<const std::string> items) {
    std::vector<std::string> out;
    std::unordered_set<std::string_view> seen;
    for (const auto& s : items) {
        if (seen.insert(s).second) {
            out.push_back(s);
        }
    }
    return out;
}

// Groups surfaces by key (skipping std::nullopt keys) and returns the members
// of the largest group whose size satisfies `too_many`, or nothing.
template <typename Key, typename TooMany>
std::vector<std::string> crowded_group(const std::vector<std::string>& surfaces, Key&& key,
                                       TooMany&& too_many) {
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& s : surfaces) {
        if (auto k = key(s)) {
            groups[*k].push_back(s);
        }
    }
    const std::vector<std::string>* worst = nullptr;
    for (const auto& [k, members] : groups) {
        if (too_many(members.size()) && (!worst || members.size() > worst->size())) {
            worst = &members;
        }
    }
    return worst ? *worst : std::vector<std::string>{};
}

std::optional<std::string> head(const std::u32string& cps, std::size_t n) {
    return text::encode(std::u32string_view(cps).substr(0, std::min(n, cps.size())));
}

std::optional<std::string> tail(const std::u32string& cps, std::size_t n) {
    const auto k = std::min(n, cps.size());
    return text::encode(std::u32string_view(cps).substr(cps.size() - k));
}

std::vector<std::string> affix_overlap(const std::vector<std::string>& surfaces,
                                       const LanguageProfile& p) {
    std::map<std::string, std::u32string> cps;
    for (const auto& s : surfaces) {
        cps.emplace(s, text::decode(s));
    }
    auto more_than = [](std::size_t t) { return [t](std::size_t n) { return n > t; }; };
    std::vector<std::string> hit;
    auto check = [&](auto&& key, auto&& too_many) {
        if (hit.empty()) {
            hit = crowded_group(surfaces, key, too_many);
        }
    };

    if (p.cjk_mode) {
        auto at_least = [](std::size_t t) { return [t](std::size_t n) { return n >= t; }; };
        check(
            [&](const std::string& s) -> std::optional<std::string> {
                const auto& c = cps.at(s);
                if (c.empty() || text::is_kana(c.front())) {
                    return std::nullopt;
                }
                return head(c, 1);
            },
            at_least(p.cjk_char_min));
        check(
            [&](const std::string& s) -> std::optional<std::string> {
                const auto& c = cps.at(s);
                if (c.empty() || text::is_kana(c.back())) {
                    return std::nullopt;
                }
                return tail(c, 1);
            },
            at_least(p.cjk_char_min));
        check(
            [&](const std::string& s) -> std::optional<std::string> {
                const auto& c = cps.at(s);
                if (c.size() < p.cjk_pair_window) {
                    return std::nullopt;
                }
                return head(c, p.cjk_pair_window);
            },
            more_than(p.affix_dup_threshold));
        check(
            [&](const std::string& s) -> std::optional<std::string> {
                const auto& c = cps.at(s);
                if (c.size() < p.cjk_pair_window) {
                    return std::nullopt;
                }
                return tail(c, p.cjk_pair_window);
            },
            more_than(p.affix_dup_threshold));
        return hit;
    }

    check([&](const std::string& s) { return head(cps.at(s), p.affix_window); },
          more_than(p.affix_dup_threshold));
    check([&](const std::string& s) { return tail(cps.at(s), p.affix_window); },
          more_than(p.affix_dup_threshold));
    if (p.word_affix_check) {
        check(
            [](const std::string& s) -> std::optional<std::string> {
                auto words = text::split_whitespace(s);
                if (words.empty()) {
                    return std::nullopt;
                }
                return std::string(words.front());
            },
            more_than(p.affix_dup_threshold));
        check(
            [](const std::string& s) -> std::optional<std::string> {
                auto words = text::split_whitespace(s);
                if (words.empty()) {
                    return std::nullopt;
                }
                return std::string(words.back());
            },
            more_than(p.affix_dup_threshold));
    }
    return hit;
}

} // namespace

std::vector<Violation> reject_reasons(std::span<const std::string> cluster,
                                      const LanguageProfile& profile, std::size_t min_size) {
    const auto surfaces = dedup_keep_first(cluster);
    std::vector<Violation> out;

    auto digits = crowded_group(
        surfaces, [](const std::string& s) { return std::optional(text::strip_digits(s)); },
        [&](std::size_t n) { return n > profile.digit_dup_threshold; });
    if (!digits.empty()) {
        out.push_back({ViolationCode::DigitDuplicates, std::move(digits)});
    }

    if (auto affix = affix_overlap(surfaces, profile); !affix.empty()) {
        out.push_back({ViolationCode::AffixOverlap, std::move(affix)});
    }

    std::vector<std::string> stopped;
    std::copy_if(surfaces.begin(), surfaces.end(), std::back_inserter(stopped),
                 [&](const std::string& s) { return has_stop_affix(s, profile); });
    if (!stopped.empty()) {
        out.push_back({ViolationCode::StopAffix, std::move(stopped)});
    }

    if (profile.single_char_filter_enabled) {
        std::vector<std::string> single;
        std::copy_if(surfaces.begin(), surfaces.end(), std::back_inserter(single),
                     [](const std::string& s) { return text::decode(s).size() == 1; });
        if (single.size() > 1) {
            out.push_back({ViolationCode::SingleChar, std::move(single)});
        }
    }

    if (surfaces.size() < min_size) {
        std::vector<std::string> remaining = surfaces;
        if (remaining.empty()) {
            remaining.push_back("<empty cluster>");
        }
        out.push_back({ViolationCode::TooFewAfterDedup, std::move(remaining)});
    }
    return out;
}

RefineOutcome refine_group(const RawGroup& raw, const AnchorIndex& index, const KnowledgeGraph& g,
                           const LanguageProfile& profile, const RecordLimits& limits) {
    auto try_resolve = [&](const EntityId& id) -> std::optional<std::string> {
        try {
            return resolve_surface(index, g, id);
        } catch (const UnresolvableEntityError&) {
            return std::nullopt;
        }
    };

    std::vector<std::string> resolved;
    for (const auto& id : raw.cluster_ids) {
        if (auto s = try_resolve(id)) {
            resolved.push_back(std::move(*s));
        }
    }
    auto violations = reject_reasons(resolved, profile, limits.min_cluster);
    if (!violations.empty()) {
        return RefineReject{std::move(violations), false};
    }

    DatasetRecord record;
    record.class_id = raw.class_id;
    const auto& cls = g.entity(g.index_of(raw.class_id));
    const auto* class_label = cls.label(index.language());
    record.class_label = class_label && !class_label->empty() ? *class_label : raw.class_id.str();
    record.language = index.language();
    record.cluster = dedup_keep_first(resolved);
    if (record.cluster.size() > limits.max_cluster) {
        record.cluster.resize(limits.max_cluster);
    }

    std::unordered_set<std::string> taken(record.cluster.begin(), record.cluster.end());
    std::map<OutlierTier, std::size_t> per_tier;
    for (const auto& [tier, id] : raw.outlier_ids) {
        if (record.outliers.size() >= limits.max_outliers ||
            per_tier[tier] >= limits.max_per_tier) {
            continue;
        }
        auto s = try_resolve(id);
        if (!s || has_stop_affix(*s, profile) || !taken.insert(*s).second) {
            continue;
        }
        ++per_tier[tier];
        record.outliers.push_back({tier, std::move(*s)});
    }
    if (record.outliers.empty()) {
        return RefineReject{{}, true};
    }
    return record;
}

} // namespace wikisem
