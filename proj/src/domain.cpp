#include "capwire/domain.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace capwire {

namespace {

constexpr std::array<std::string_view, 12> kMonthAbbrev = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun",
    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> days = {31, 28, 31, 30, 31, 30,
                                                 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return days[m - 1];
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

// Player-carrying positions.
const std::set<std::string>& player_positions() {
    static const std::set<std::string> kPositions = {
        "quarterback",   "running back",     "fullback",
        "wide receiver", "tight end",        "offensive tackle",
        "offensive guard", "center",         "defensive end",
        "defensive tackle", "nose tackle",   "linebacker",
        "cornerback",    "safety",           "kicker",
        "punter",        "long snapper",     "kick returner",
        "punt returner"};
    return kPositions;
}

// Roles without a jersey number.
const std::set<std::string>& staff_positions() {
    static const std::set<std::string> kPositions = {
        "head coach",
        "offensive coordinator",
        "defensive coordinator",
        "special teams coordinator",
        "assistant coach",
        "owner"};
    return kPositions;
}

std::size_t count_name_tokens(std::string_view name) {
    std::istringstream in{fold(name)};
    std::string tok;
    std::size_t n = 0;
    while (in >> tok) ++n;
    return n;
}

}  // namespace

bool Date::valid() const {
    if (month < 1 || month > 12) return false;
    if (year < 1 || year > 9999) return false;
    return day >= 1 && day <= days_in_month(year, month);
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::optional<Date> Date::from_iso(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    Date d;
    if (!parse_int(text.substr(0, 4), d.year) ||
        !parse_int(text.substr(5, 2), d.month) ||
        !parse_int(text.substr(8, 2), d.day)) {
        return std::nullopt;
    }
    if (!d.valid()) return std::nullopt;
    return d;
}

std::string format_date(const Date& d) {
    std::string out{kMonthAbbrev[static_cast<std::size_t>(d.month - 1)]};
    out += ' ';
    out += std::to_string(d.day);
    out += ", ";
    out += std::to_string(d.year);
    return out;
}

std::optional<Date> parse_formatted_date(std::string_view text) {
    // "<Mon> <D>, <YYYY>"
    if (text.size() < 9) return std::nullopt;
    const std::string_view mon = text.substr(0, 3);
    int month = 0;
    for (std::size_t i = 0; i < kMonthAbbrev.size(); ++i) {
        if (kMonthAbbrev[i] == mon) {
            month = static_cast<int>(i) + 1;
            break;
        }
    }
    if (month == 0 || text[3] != ' ') return std::nullopt;
    std::string_view rest = text.substr(4);
    const auto comma = rest.find(", ");
    if (comma == std::string_view::npos) return std::nullopt;
    const std::string_view day_text = rest.substr(0, comma);
    const std::string_view year_text = rest.substr(comma + 2);
    if (day_text.empty() || day_text.size() > 2 || day_text[0] == '0') return std::nullopt;
    if (year_text.size() != 4) return std::nullopt;
    Date d;
    d.month = month;
    if (!parse_int(day_text, d.day) || !parse_int(year_text, d.year)) return std::nullopt;
    if (!d.valid()) return std::nullopt;
    return d;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += c;
    }
    return out;
}

std::string fold(std::string_view s) {
    std::string out = collapse_whitespace(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string to_string(Confidence c) {
    return c == Confidence::HIGH ? "HIGH" : "LOW";
}

std::optional<Confidence> confidence_from_string(std::string_view s) {
    const std::string f = fold(s);
    if (f == "high") return Confidence::HIGH;
    if (f == "low") return Confidence::LOW;
    return std::nullopt;
}

std::string to_string(Level level) {
    return level == Level::LEVEL1 ? "LEVEL1" : "LEVEL2";
}

std::optional<Level> level_from_string(std::string_view s) {
    if (s == "LEVEL1") return Level::LEVEL1;
    if (s == "LEVEL2") return Level::LEVEL2;
    return std::nullopt;
}

std::string to_string(ResolveStatus s) {
    switch (s) {
        case ResolveStatus::RESOLVED: return "RESOLVED";
        case ResolveStatus::UNKNOWN_TEAM: return "UNKNOWN_TEAM";
        case ResolveStatus::UNKNOWN_JERSEY: return "UNKNOWN_JERSEY";
    }
    return "UNKNOWN_TEAM";
}

std::vector<std::string> ImageMetadata::invalid_fields() const {
    std::vector<std::string> bad;
    if (!event_date.valid()) bad.push_back("event_date (not a valid calendar date)");
    if (credit.empty()) bad.push_back("credit (empty)");
    if (source_id.empty()) bad.push_back("source_id (empty)");
    if (location.find("; ") != std::string::npos) bad.push_back("location (contains segment separator)");
    if (credit.find("; ") != std::string::npos) bad.push_back("credit (contains segment separator)");
    return bad;
}

bool is_known_position(std::string_view position) {
    const std::string f = fold(position);
    return player_positions().count(f) > 0 || staff_positions().count(f) > 0;
}

bool is_player_position(std::string_view position) {
    return player_positions().count(fold(position)) > 0;
}

RosterSet RosterSet::build(std::vector<Roster> rosters) {
    RosterSet set;
    set.rosters_ = std::move(rosters);

    for (std::size_t i = 0; i < set.rosters_.size(); ++i) {
        const Roster& roster = set.rosters_[i];
        if (roster.team_name.empty()) {
            throw InputError("roster has an empty team_name");
        }
        if (!roster.effective_date.valid()) {
            throw InputError("roster '" + roster.team_name + "' has an invalid effective_date");
        }

        std::set<int> seen_jerseys;
        for (const RosterEntry& entry : roster.entries) {
            if (count_name_tokens(entry.player_name) < 2) {
                throw InputError("roster '" + roster.team_name + "': player name '" +
                                 entry.player_name + "' needs at least two name tokens");
            }
            if (!is_known_position(entry.position)) {
                throw InputError("roster '" + roster.team_name + "': unknown position '" +
                                 entry.position + "'");
            }
            if (entry.jersey_number) {
                const int jersey = *entry.jersey_number;
                if (jersey < 0 || jersey > 99) {
                    throw InputError("roster '" + roster.team_name + "': jersey " +
                                     std::to_string(jersey) + " out of range [0, 99]");
                }
                if (!seen_jerseys.insert(jersey).second) {
                    throw InputError("roster '" + roster.team_name + "': duplicate jersey " +
                                     std::to_string(jersey));
                }
            } else if (is_player_position(entry.position)) {
                throw InputError("roster '" + roster.team_name + "': player '" +
                                 entry.player_name + "' (" + entry.position +
                                 ") is missing a jersey number");
            }
        }

        // Names and aliases share one lookup table, so a collision in either
        // direction is caught here.
        auto add_key = [&](const std::string& text, const char* what) {
            const std::string key = fold(text);
            if (key.empty()) {
                throw InputError("roster '" + roster.team_name + "': empty " + std::string(what));
            }
            auto [it, inserted] = set.by_folded_.emplace(key, i);
            if (!inserted && it->second != i) {
                throw InputError("roster " + std::string(what) + " '" + text +
                                 "' collides between '" + set.rosters_[it->second].team_name +
                                 "' and '" + roster.team_name + "'");
            }
        };
        add_key(roster.team_name, "team name");
        for (const std::string& alias : roster.aliases) add_key(alias, "alias");
    }

    std::sort(set.rosters_.begin(), set.rosters_.end(),
              [](const Roster& a, const Roster& b) { return a.team_name < b.team_name; });
    // Rebuild indices after sorting.
    set.by_folded_.clear();
    for (std::size_t i = 0; i < set.rosters_.size(); ++i) {
        set.by_folded_[fold(set.rosters_[i].team_name)] = i;
        for (const std::string& alias : set.rosters_[i].aliases) {
            set.by_folded_[fold(alias)] = i;
        }
    }
    return set;
}

std::optional<std::string> RosterSet::normalize_team_name(std::string_view raw) const {
    const auto it = by_folded_.find(fold(raw));
    if (it == by_folded_.end()) return std::nullopt;
    return rosters_[it->second].team_name;
}

const Roster* RosterSet::find_team(std::string_view canonical_name) const {
    const auto it = by_folded_.find(fold(canonical_name));
    if (it == by_folded_.end()) return nullptr;
    return &rosters_[it->second];
}

const RosterEntry* RosterSet::find_entry(std::string_view canonical_name, int jersey) const {
    const Roster* team = find_team(canonical_name);
    if (team == nullptr) return nullptr;
    for (const RosterEntry& entry : team->entries) {
        if (entry.jersey_number && *entry.jersey_number == jersey) return &entry;
    }
    return nullptr;
}

std::optional<RosterSet::PlayerRef> RosterSet::find_player(std::string_view player_name) const {
    const std::string key = fold(player_name);
    std::optional<PlayerRef> found;
    for (const Roster& roster : rosters_) {
        for (const RosterEntry& entry : roster.entries) {
            if (fold(entry.player_name) != key) continue;
            if (found) {
                throw InputError("player name '" + std::string(player_name) +
                                 "' is ambiguous across the roster set");
            }
            found = PlayerRef{roster.team_name, &entry};
        }
    }
    return found;
}

std::vector<std::string> RosterSet::team_names() const {
    std::vector<std::string> names;
    names.reserve(rosters_.size());
    for (const Roster& roster : rosters_) names.push_back(roster.team_name);
    return names;  // rosters_ is kept sorted by team_name
}

}  // namespace capwire
