#include "capwire/roster.hpp"

#include <algorithm>
#include <fstream>

#include "capwire/serde.hpp"

namespace capwire::roster {

Roster load_roster_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open roster file: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("roster file " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        return serde::roster_from_json(doc);
    } catch (const InputError& e) {
        throw InputError("roster file " + path.string() + ": " + e.what());
    }
}

RosterSet load_rosters(const std::vector<std::filesystem::path>& paths) {
    std::vector<Roster> rosters;
    rosters.reserve(paths.size());
    for (const auto& path : paths) {
        rosters.push_back(load_roster_file(path));
    }
    return RosterSet::build(std::move(rosters));
}

std::string roster_to_string(const Roster& roster) {
    return serde::roster_to_json(roster).dump(2) + "\n";
}

void save_roster_file(const Roster& roster, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write roster file: " + path.string());
    }
    out << roster_to_string(roster);
}

ResolvedEntity resolve(const EntityDetection& detection, const RosterSet& rosters) {
    ResolvedEntity entity;
    entity.detection = detection;

    const auto canonical = rosters.normalize_team_name(detection.team_ref);
    if (!canonical) {
        entity.status = ResolveStatus::UNKNOWN_TEAM;
        return entity;
    }
    entity.team_name = *canonical;

    const RosterEntry* entry = rosters.find_entry(*canonical, detection.jersey_number);
    if (entry == nullptr) {
        entity.status = ResolveStatus::UNKNOWN_JERSEY;
        return entity;
    }
    entity.player_name = entry->player_name;
    entity.position = entry->position;
    entity.status = ResolveStatus::RESOLVED;
    return entity;
}

std::vector<EntityDetection> filter_high(const std::vector<EntityDetection>& detections) {
    std::vector<EntityDetection> high;
    std::copy_if(detections.begin(), detections.end(), std::back_inserter(high),
                 [](const EntityDetection& d) { return d.confidence == Confidence::HIGH; });
    return high;
}

std::string entity_phrase(const ResolvedEntity& entity) {
    if (entity.status != ResolveStatus::RESOLVED) {
        throw InputError("entity_phrase requires a RESOLVED entity, got " +
                         to_string(entity.status));
    }
    return entity.team_name + " " + entity.position + " " + entity.player_name + " (" +
           std::to_string(entity.detection.jersey_number) + ")";
}

}  // namespace capwire::roster
