#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "capwire/errors.hpp"

namespace capwire {

// Calendar date (proleptic Gregorian).
struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31

    bool valid() const;
    std::string iso() const;  // "YYYY-MM-DD"
    static std::optional<Date> from_iso(std::string_view text);

    auto operator<=>(const Date&) const = default;
};

// Wire-service date segment, e.g. "Feb 9, 2025". No zero-padded day.
std::string format_date(const Date& d);

// Inverse of format_date. Strict: rejects zero-padded days and unknown month
// abbreviations. Returns nullopt on any mismatch.
std::optional<Date> parse_formatted_date(std::string_view text);

// Trims and collapses internal whitespace runs to a single space.
std::string collapse_whitespace(std::string_view s);

// collapse_whitespace + ASCII lowercase. The normal form used for team and
// player lookups.
std::string fold(std::string_view s);

enum class Confidence { LOW = 0, HIGH = 1 };

std::string to_string(Confidence c);
std::optional<Confidence> confidence_from_string(std::string_view s);  // case-insensitive

enum class Level { LEVEL1 = 1, LEVEL2 = 2 };

std::string to_string(Level level);
std::optional<Level> level_from_string(std::string_view s);

// One Level-1 output item: team text as emitted by the model, jersey number,
// and the annotator-style confidence.
struct EntityDetection {
    std::string team_ref;
    int jersey_number = 0;  // 0..99
    Confidence confidence = Confidence::LOW;

    bool operator==(const EntityDetection&) const = default;
};

enum class ResolveStatus { RESOLVED, UNKNOWN_TEAM, UNKNOWN_JERSEY };

std::string to_string(ResolveStatus s);

// A detection mapped through the roster. player_name/position are set exactly
// when status == RESOLVED; team_name is canonical whenever the team was known.
struct ResolvedEntity {
    EntityDetection detection;
    std::string player_name;
    std::string position;
    std::string team_name;
    ResolveStatus status = ResolveStatus::UNKNOWN_TEAM;

    bool operator==(const ResolvedEntity&) const = default;
};

// Photographer-supplied wire metadata attached to each image.
struct ImageMetadata {
    Date event_date;
    std::string location;     // free text: city, region, country
    std::string venue;        // optional
    std::string event_title;
    std::string credit;       // photographer + agency
    std::string source_id;    // unique within a batch

    // Names of invalid fields with a short reason, e.g. "credit (empty)".
    // Empty when the record is well formed.
    std::vector<std::string> invalid_fields() const;
};

// An image payload plus its identity. The bytes are never decoded in-tree;
// they travel to backends and annotators as-is.
struct ImageAsset {
    std::string source_id;
    std::string bytes;
};

struct RosterEntry {
    std::optional<int> jersey_number;  // absent only for non-player roles
    std::string player_name;
    std::string position;

    bool operator==(const RosterEntry&) const = default;
};

struct Roster {
    std::string team_name;
    std::vector<std::string> aliases;
    Date effective_date;
    std::vector<RosterEntry> entries;

    bool operator==(const Roster&) const = default;
};

// Football position vocabulary checks. Non-player roles (coaches, owner)
// carry no jersey number.
bool is_known_position(std::string_view position);
bool is_player_position(std::string_view position);

// Immutable, validated snapshot of every loaded team roster. Safe to share
// across threads; updates replace the whole snapshot.
class RosterSet {
public:
    RosterSet() = default;

    // Enforces all roster invariants; throws InputError naming the offending
    // team/jersey/alias on violation.
    static RosterSet build(std::vector<Roster> rosters);

    // Case-insensitive, whitespace-collapsed exact match against team names
    // and aliases. nullopt is the UNKNOWN_TEAM marker; no fuzzy matching.
    std::optional<std::string> normalize_team_name(std::string_view raw) const;

    const Roster* find_team(std::string_view canonical_name) const;
    const RosterEntry* find_entry(std::string_view canonical_name, int jersey) const;

    struct PlayerRef {
        std::string team_name;
        const RosterEntry* entry = nullptr;
    };
    // Exact full-name lookup across all teams (whitespace/case normalized).
    // nullopt when absent; throws InputError when two entries share the name.
    std::optional<PlayerRef> find_player(std::string_view player_name) const;

    // Canonical team names in alphabetical order.
    std::vector<std::string> team_names() const;

    const std::vector<Roster>& rosters() const { return rosters_; }
    bool empty() const { return rosters_.empty(); }
    std::size_t size() const { return rosters_.size(); }

private:
    std::vector<Roster> rosters_;
    std::unordered_map<std::string, std::size_t> by_folded_;  // folded name/alias -> index
};

inline std::optional<std::string> normalize_team_name(std::string_view raw,
                                                      const RosterSet& rosters) {
    return rosters.normalize_team_name(raw);
}

}  // namespace capwire
