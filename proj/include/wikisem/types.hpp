#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wikisem {

/// Opaque knowledge-base identifier such as "Q128109". Ordering is plain
/// byte-wise string ordering; every deterministic tie-break in the toolkit
/// relies on it.
class EntityId {
  public:
    EntityId() = default;
    explicit EntityId(std::string value) : value_(std::move(value)) {}

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const EntityId&, const EntityId&) = default;
    friend bool operator==(const EntityId&, const EntityId&) = default;

  private:
    std::string value_;
};

inline std::ostream& operator<<(std::ostream& os, const EntityId& id) {
    return os << id.str();
}

/// Outlier dissimilarity grade: sibling class, cousin class, far class.
enum class OutlierTier : std::uint8_t { O1 = 1, O2 = 2, O3 = 3 };

std::string_view to_string(OutlierTier tier) noexcept;
std::optional<OutlierTier> parse_tier(std::string_view text) noexcept;

/// One entity as it comes out of a dump, before graph construction.
struct EntityRecord {
    EntityId id;
    std::map<std::string, std::string> labels;      // language -> surface
    std::uint64_t sitelinks = 0;
    std::vector<EntityId> instance_of;
    std::vector<EntityId> subclass_of;
    bool is_disambiguation = false;
    std::map<std::string, std::string> wiki_titles; // language -> page title

    friend bool operator==(const EntityRecord&, const EntityRecord&) = default;
};

class UnknownEntityError : public std::out_of_range {
  public:
    explicit UnknownEntityError(const EntityId& id)
        : std::out_of_range("unknown entity id: " + id.str()), id_(id) {}
    const EntityId& id() const noexcept { return id_; }

  private:
    EntityId id_;
};

} // namespace wikisem

template <>
struct std::hash<wikisem::EntityId> {
    std::size_t operator()(const wikisem::EntityId& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
