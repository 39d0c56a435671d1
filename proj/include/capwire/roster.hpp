#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "capwire/domain.hpp"

namespace capwire::roster {

// Loads one roster document (JSON, one team per file). Throws IoError when
// the file is unreadable and InputError when it fails to parse.
Roster load_roster_file(const std::filesystem::path& path);

// Loads and validates a whole roster set. All Roster invariants are enforced
// here: duplicate jerseys and alias collisions are load errors. An empty path
// list yields an empty (valid) set.
RosterSet load_rosters(const std::vector<std::filesystem::path>& paths);

// Canonical serialization; save followed by load round-trips losslessly.
std::string roster_to_string(const Roster& roster);
void save_roster_file(const Roster& roster, const std::filesystem::path& path);

// Deterministic mapping from a Level-1 detection to a named player. Never
// fails: unknown teams and jerseys come back as statuses.
ResolvedEntity resolve(const EntityDetection& detection, const RosterSet& rosters);

// Order-preserving subsequence of the HIGH-confidence detections.
std::vector<EntityDetection> filter_high(const std::vector<EntityDetection>& detections);

// `<team> <position> <name> (<jersey>)`, the entity phrase used in caption
// bodies. Requires status == RESOLVED; throws InputError otherwise.
std::string entity_phrase(const ResolvedEntity& entity);

}  // namespace capwire::roster
