#include "capwire/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "capwire/caption.hpp"
#include "capwire/roster.hpp"
#include "capwire/serde.hpp"

namespace capwire::dataset {

namespace {

std::string detection_line(const std::string& canonical_team, int jersey, Confidence confidence) {
    return canonical_team + " (" + std::to_string(jersey) + ") [" + to_string(confidence) + "]";
}

// Deduplicates on (canonical team, jersey) keeping the higher confidence and
// returns entries sorted by team then jersey.
std::vector<std::tuple<std::string, int, Confidence>> canonical_detections(
    const AnnotatedImage& image, const RosterSet& rosters) {
    std::map<std::pair<std::string, int>, Confidence> dedup;
    for (const EntityDetection& detection : image.gt_detections) {
        const auto canonical = rosters.normalize_team_name(detection.team_ref);
        if (!canonical) {
            throw InputError("annotation for " + image.source_id + " references team '" +
                             detection.team_ref + "' absent from the rosters");
        }
        auto key = std::make_pair(*canonical, detection.jersey_number);
        auto [it, inserted] = dedup.emplace(key, detection.confidence);
        if (!inserted) {
            it->second = std::max(it->second, detection.confidence);
        }
    }
    std::vector<std::tuple<std::string, int, Confidence>> out;
    out.reserve(dedup.size());
    for (const auto& [key, confidence] : dedup) {
        out.emplace_back(key.first, key.second, confidence);
    }
    return out;  // std::map iteration is already (team, jersey) ordered
}

// HIGH-confidence detections resolved against the roster; entities that do
// not resolve contribute nothing.
std::vector<ResolvedEntity> high_resolved(const AnnotatedImage& image, const RosterSet& rosters) {
    std::vector<ResolvedEntity> entities;
    for (const EntityDetection& detection : roster::filter_high(image.gt_detections)) {
        ResolvedEntity entity = roster::resolve(detection, rosters);
        if (entity.status == ResolveStatus::RESOLVED) {
            entities.push_back(std::move(entity));
        }
    }
    return entities;
}

struct MentionCheck {
    bool qualifies = false;
    std::string reason;
    std::string team_name;  // set when the player was found in a roster
    std::string position;
};

MentionCheck check_mention(const caption::EntityMention& mention, const AnnotatedImage& image,
                           const RosterSet& rosters) {
    MentionCheck check;
    const auto player = rosters.find_player(mention.player_name);  // throws when ambiguous
    if (!player) {
        check.reason = mention.player_name + " is not in any roster";
        return check;
    }
    check.team_name = player->team_name;
    check.position = player->entry->position;
    if (!player->entry->jersey_number || *player->entry->jersey_number != mention.jersey_number) {
        check.reason = mention.player_name + " does not wear jersey " +
                       std::to_string(mention.jersey_number);
        return check;
    }
    for (const EntityDetection& detection : image.gt_detections) {
        const auto canonical = rosters.normalize_team_name(detection.team_ref);
        if (canonical && *canonical == player->team_name &&
            detection.jersey_number == mention.jersey_number &&
            detection.confidence == Confidence::HIGH) {
            check.qualifies = true;
            return check;
        }
    }
    check.reason = mention.player_name + " (" + std::to_string(mention.jersey_number) +
                   ") is not a HIGH-confidence detection";
    return check;
}

void erase_all(std::string& text, const std::string& needle) {
    if (needle.empty()) return;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.erase(pos, needle.size());
    }
}

void replace_all(std::string& text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
}

// Deletes the offending mention's full entity phrase (longest literal form
// present) and re-punctuates.
std::string scrub_body(std::string body, const caption::EntityMention& mention,
                       const MentionCheck& check) {
    const std::string core =
        mention.player_name + " (" + std::to_string(mention.jersey_number) + ")";
    std::vector<std::string> candidates;
    if (!check.team_name.empty() && !check.position.empty()) {
        candidates.push_back(check.team_name + " " + check.position + " " + core);
        candidates.push_back(check.position + " " + core);
    }
    candidates.push_back(core);
    for (const std::string& candidate : candidates) {
        if (body.find(candidate) != std::string::npos) {
            erase_all(body, candidate);
            break;
        }
    }

    // Re-punctuate: collapse doubled spaces and dangling connectives.
    std::string cleaned;
    cleaned.reserve(body.size());
    for (char c : body) {
        if (c == ' ' && !cleaned.empty() && cleaned.back() == ' ') continue;
        cleaned += c;
    }
    replace_all(cleaned, " .", ".");
    replace_all(cleaned, " ,", ",");
    replace_all(cleaned, ",.", ".");
    replace_all(cleaned, " and.", ".");
    while (!cleaned.empty() && cleaned.front() == ' ') cleaned.erase(cleaned.begin());
    while (!cleaned.empty() && cleaned.back() == ' ') cleaned.pop_back();
    return cleaned;
}

}  // namespace

std::string to_string(Level2Policy policy) {
    return policy == Level2Policy::STRICT ? "STRICT" : "SCRUB";
}

std::optional<Level2Policy> policy_from_string(std::string_view s) {
    const std::string f = fold(s);
    if (f == "strict") return Level2Policy::STRICT;
    if (f == "scrub") return Level2Policy::SCRUB;
    return std::nullopt;
}

SftRecord build_level1_record(const AnnotatedImage& image, const RosterSet& rosters,
                              const pipeline::PromptConfig& cfg) {
    const backend::InferenceRequest prompt =
        pipeline::build_level1_prompt(image.metadata, rosters, cfg);

    std::string target;
    for (const auto& [team, jersey, confidence] : canonical_detections(image, rosters)) {
        if (!target.empty()) target += '\n';
        target += detection_line(team, jersey, confidence);
    }
    if (target.empty()) target = "NONE";

    SftRecord record;
    record.level = Level::LEVEL1;
    record.system_text = prompt.system_text;
    record.user_text = prompt.user_text;
    record.image_ref = prompt.image_ref;
    record.target = std::move(target);
    record.source_id = image.source_id;
    record.builder_version = std::string(kBuilderVersion);
    return record;
}

Level2Outcome build_level2_record(const AnnotatedImage& image, const RosterSet& rosters,
                                  Level2Policy policy, const pipeline::PromptConfig& cfg) {
    caption::CaptionParts parts;
    try {
        parts = caption::parse(image.gt_caption, cfg.credit_prefix);
    } catch (const caption::CaptionError& e) {
        throw InputError("ground-truth caption for " + image.source_id +
                         " does not parse: " + e.what());
    }

    struct Offender {
        caption::EntityMention mention;
        MentionCheck check;
    };
    std::vector<Offender> offenders;
    for (const caption::EntityMention& mention : parts.entity_mentions) {
        MentionCheck check = check_mention(mention, image, rosters);
        if (!check.qualifies) {
            offenders.push_back({mention, std::move(check)});
        }
    }

    std::string target = image.gt_caption;
    if (!offenders.empty()) {
        if (policy == Level2Policy::STRICT) {
            std::string reason;
            for (const Offender& offender : offenders) {
                if (!reason.empty()) reason += "; ";
                reason += offender.check.reason;
            }
            return Level2Outcome{std::nullopt, reason};
        }

        // SCRUB: delete each offending phrase and keep the record only when
        // the remainder is still a grammatical caption body.
        std::string body = parts.body;
        for (const Offender& offender : offenders) {
            body = scrub_body(std::move(body), offender.mention, offender.check);
        }
        caption::CaptionParts scrubbed;
        try {
            scrubbed = caption::make_parts(parts.date_text, parts.location_text, body,
                                           parts.credit_text);
        } catch (const caption::CaptionError& e) {
            return Level2Outcome{std::nullopt,
                                 std::string("scrub left no grammatical body: ") + e.what()};
        }
        for (const caption::EntityMention& mention : scrubbed.entity_mentions) {
            if (!check_mention(mention, image, rosters).qualifies) {
                return Level2Outcome{std::nullopt, "scrub could not remove mention " +
                                                       mention.player_name + " (" +
                                                       std::to_string(mention.jersey_number) + ")"};
            }
        }
        target = caption::compose(scrubbed);
    }

    const backend::InferenceRequest prompt = pipeline::build_level2_prompt(
        image.metadata, rosters, high_resolved(image, rosters), /*aux_block=*/"", cfg);

    SftRecord record;
    record.level = Level::LEVEL2;
    record.system_text = prompt.system_text;
    record.user_text = prompt.user_text;
    record.image_ref = prompt.image_ref;
    record.target = std::move(target);
    record.source_id = image.source_id;
    record.builder_version = std::string(kBuilderVersion);
    return Level2Outcome{std::move(record), ""};
}

std::string export_dataset_string(const std::vector<SftRecord>& records) {
    std::string out;
    for (const SftRecord& record : records) {
        out += serde::sft_record_to_json(record).dump();
        out += '\n';
    }
    return out;
}

void export_dataset(const std::vector<SftRecord>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write dataset file: " + path.string());
    }
    out << export_dataset_string(records);
    if (!out) {
        throw IoError("failed while writing dataset file: " + path.string());
    }
}

std::vector<SftRecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open dataset file: " + path.string());
    }
    std::vector<SftRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        try {
            records.push_back(serde::sft_record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw InputError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

DatasetReport validate_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open dataset file: " + path.string());
    }

    DatasetReport report;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto violation = [&](const std::string& message) {
            report.violations.push_back({line_no, message});
        };

        SftRecord record;
        try {
            record = serde::sft_record_from_json(nlohmann::json::parse(line));
        } catch (const std::exception& e) {
            violation(std::string("unreadable record: ") + e.what());
            continue;
        }

        if (record.target.empty()) {
            violation("target is empty");
            continue;
        }
        if (record.system_text.empty() || record.user_text.empty()) {
            violation("prompt text is empty");
            continue;
        }

        if (record.level == Level::LEVEL1) {
            ++report.level1_count;
            if (record.target != "NONE") {
                try {
                    for (const EntityDetection& detection :
                         pipeline::parse_level1_response(record.target)) {
                        if (detection.confidence == Confidence::HIGH) {
                            ++report.high_detections;
                        } else {
                            ++report.low_detections;
                        }
                    }
                } catch (const pipeline::ResponseParseError& e) {
                    violation(std::string("LEVEL1 target does not conform to the line grammar: ") +
                              e.what());
                }
            }
        } else {
            ++report.level2_count;
            try {
                caption::parse(record.target);
            } catch (const caption::CaptionError& e) {
                violation(std::string("LEVEL2 target does not parse as a caption: ") + e.what());
            }
        }
    }
    return report;
}

std::string render_report(const DatasetReport& report) {
    std::ostringstream out;
    out << "records: LEVEL1=" << report.level1_count << " LEVEL2=" << report.level2_count << "\n";
    out << "level1 confidence distribution: HIGH=" << report.high_detections
        << " LOW=" << report.low_detections << "\n";
    out << "violations: " << report.violations.size() << "\n";
    for (const auto& violation : report.violations) {
        out << "  line " << violation.line << ": " << violation.message << "\n";
    }
    return out.str();
}

}  // namespace capwire::dataset
