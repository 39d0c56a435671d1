#include "capwire/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <condition_variable>
#include <mutex>
#include <sstream>
#include <thread>

namespace capwire::pipeline {

namespace {

constexpr std::string_view kLevel1System =
    "You identify professional football players in photographs. You answer only with team "
    "and jersey labels in the requested line format.";

constexpr std::string_view kLevel2System =
    "You are a sports wire-service caption writer. You answer with exactly one caption in "
    "the four-segment house style and nothing else.";

constexpr std::string_view kNoPlayersMarker = "No identified players.";

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

void append_roster_block(std::string& out, const RosterSet& rosters, bool strict) {
    out += "Rosters:\n";
    if (rosters.empty()) {
        if (strict) {
            throw ConfigError("prompt construction requires a non-empty roster set in strict mode");
        }
        out += "(roster unavailable)\n";
        return;
    }
    for (const std::string& team : rosters.team_names()) {
        const Roster* roster = rosters.find_team(team);
        out += "Team: " + team + "\n";

        std::vector<const RosterEntry*> players;
        std::vector<const RosterEntry*> staff;
        for (const RosterEntry& entry : roster->entries) {
            (entry.jersey_number ? players : staff).push_back(&entry);
        }
        std::sort(players.begin(), players.end(), [](const RosterEntry* a, const RosterEntry* b) {
            return *a->jersey_number < *b->jersey_number;
        });
        std::sort(staff.begin(), staff.end(), [](const RosterEntry* a, const RosterEntry* b) {
            return a->player_name < b->player_name;
        });
        for (const RosterEntry* entry : players) {
            out += "  " + std::to_string(*entry->jersey_number) + " " + entry->player_name +
                   " (" + entry->position + ")\n";
        }
        for (const RosterEntry* entry : staff) {
            out += "  -- " + entry->player_name + " (" + entry->position + ")\n";
        }
    }
}

void append_metadata_block(std::string& out, const ImageMetadata& meta) {
    out += "Metadata:\n";
    out += "Date: " + format_date(meta.event_date) + "\n";
    out += "Location: " + meta.location + "\n";
    if (!meta.venue.empty()) {
        out += "Venue: " + meta.venue + "\n";
    }
    out += "Event: " + meta.event_title + "\n";
    out += "Credit: " + meta.credit + "\n";
    out += "Source: " + meta.source_id + "\n";
}

// Stage stopwatch in fractional milliseconds.
class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// Shared state for annotators running alongside Level-1 inference. Threads
// are detached; the state outlives them via shared_ptr, so a late annotator
// past the deadline writes into a slot nobody reads and gets dropped.
struct AnnotatorRun {
    struct Slot {
        std::string name;
        std::vector<annotate::AuxAnnotation> annotations;
        std::string error;
        bool done = false;
    };
    std::mutex mu;
    std::condition_variable cv;
    std::vector<Slot> slots;
    std::size_t completed = 0;
};

std::shared_ptr<AnnotatorRun> start_annotators(const std::vector<annotate::Annotator*>& annotators,
                                               const ImageAsset& image) {
    auto run = std::make_shared<AnnotatorRun>();
    run->slots.resize(annotators.size());
    for (std::size_t i = 0; i < annotators.size(); ++i) {
        run->slots[i].name = annotators[i]->name();
        annotate::Annotator* annotator = annotators[i];
        std::thread([run, annotator, image, i]() {
            std::vector<annotate::AuxAnnotation> annotations;
            std::string error;
            try {
                annotations = annotator->annotate(image);
            } catch (const std::exception& e) {
                error = e.what();
            }
            std::lock_guard lock(run->mu);
            run->slots[i].annotations = std::move(annotations);
            run->slots[i].error = std::move(error);
            run->slots[i].done = true;
            ++run->completed;
            run->cv.notify_all();
        }).detach();
    }
    return run;
}

struct AnnotatorOutcome {
    std::vector<std::vector<annotate::AuxAnnotation>> lists;
    std::vector<std::string> notes;
};

AnnotatorOutcome join_annotators(const std::shared_ptr<AnnotatorRun>& run,
                                 std::chrono::milliseconds timeout) {
    AnnotatorOutcome outcome;
    std::unique_lock lock(run->mu);
    run->cv.wait_for(lock, timeout, [&] { return run->completed == run->slots.size(); });
    for (const AnnotatorRun::Slot& slot : run->slots) {
        if (!slot.done) {
            outcome.notes.push_back("annotator " + slot.name + " timed out");
            continue;
        }
        if (!slot.error.empty()) {
            outcome.notes.push_back("annotator " + slot.name + " failed: " + slot.error);
            continue;
        }
        outcome.lists.push_back(slot.annotations);
    }
    return outcome;
}

}  // namespace

backend::InferenceRequest build_level1_prompt(const ImageMetadata& meta, const RosterSet& rosters,
                                              const PromptConfig& cfg) {
    backend::InferenceRequest req;
    req.system_text = std::string(kLevel1System);
    req.image_ref = meta.source_id;
    req.max_tokens = cfg.level1_max_tokens;
    req.temperature = cfg.temperature;

    std::string& user = req.user_text;
    user += "Identify every player visible in the image.\n";
    user += "Output one line per visible player, formatted exactly as: Team Name (jersey) [HIGH|LOW]\n";
    user += "Mark in-focus players [HIGH] and out-of-focus players [LOW].\n";
    user += "If no player is visible, output exactly: NONE\n";
    user += "\n";
    append_roster_block(user, rosters, cfg.strict_roster);
    user += "\n";
    append_metadata_block(user, meta);
    return req;
}

std::vector<EntityDetection> parse_level1_response(std::string_view text) {
    if (trim(text) == "NONE") {
        return {};
    }

    std::vector<EntityDetection> detections;
    std::vector<std::string> keys;  // folded "(team)\x1f(jersey)" in first-seen order

    std::size_t line_index = 0;
    std::size_t parsed_lines = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        const std::string line = trim(text.substr(pos, eol - pos));
        const std::size_t this_index = line_index++;
        pos = eol + 1;
        if (line.empty()) continue;

        auto fail = [&](const std::string& why) {
            throw ResponseParseError("line " + std::to_string(this_index + 1) +
                                         " does not conform to 'Team (N) [HIGH|LOW]': " + why,
                                     line, this_index);
        };

        // Confidence tail: line ends with "[...]".
        if (line.back() != ']') fail("missing confidence suffix");
        const auto bracket = line.rfind('[');
        if (bracket == std::string::npos) fail("missing confidence suffix");
        const auto confidence =
            confidence_from_string(line.substr(bracket + 1, line.size() - bracket - 2));
        if (!confidence) fail("confidence must be HIGH or LOW");

        // Jersey: "...(N)" directly before the confidence.
        std::string head = line.substr(0, bracket);
        while (!head.empty() && std::isspace(static_cast<unsigned char>(head.back()))) {
            head.pop_back();
        }
        if (head.empty() || head.back() != ')') fail("missing jersey number");
        const auto paren = head.rfind('(');
        if (paren == std::string::npos) fail("missing jersey number");
        const std::string digits = head.substr(paren + 1, head.size() - paren - 2);
        if (digits.empty() || digits.size() > 2 ||
            !std::all_of(digits.begin(), digits.end(),
                         [](unsigned char c) { return std::isdigit(c); })) {
            fail("jersey must be a 1-2 digit number");
        }
        const int jersey = std::stoi(digits);

        // Team text: everything before the jersey, separated by whitespace.
        if (paren == 0 || !std::isspace(static_cast<unsigned char>(head[paren - 1]))) {
            fail("missing team name before the jersey");
        }
        const std::string team = collapse_whitespace(head.substr(0, paren));
        if (team.empty()) fail("missing team name before the jersey");

        ++parsed_lines;
        const std::string key = fold(team) + "\x1f" + std::to_string(jersey);
        const auto existing = std::find(keys.begin(), keys.end(), key);
        if (existing != keys.end()) {
            EntityDetection& kept = detections[static_cast<std::size_t>(existing - keys.begin())];
            kept.confidence = std::max(kept.confidence, *confidence);
            continue;
        }
        keys.push_back(key);
        detections.push_back(EntityDetection{team, jersey, *confidence});
    }

    if (parsed_lines == 0) {
        throw ResponseParseError("response is empty; expected detections or the literal NONE",
                                 "", 0);
    }
    return detections;
}

backend::InferenceRequest build_level2_prompt(const ImageMetadata& meta, const RosterSet& rosters,
                                              const std::vector<ResolvedEntity>& entities,
                                              std::string_view aux_block,
                                              const PromptConfig& cfg) {
    backend::InferenceRequest req;
    req.system_text = std::string(kLevel2System);
    req.image_ref = meta.source_id;
    req.max_tokens = cfg.level2_max_tokens;
    req.temperature = cfg.temperature;

    std::string& user = req.user_text;
    user += "Write one stylized caption for the image using exactly this format:\n";
    user += "<Date>; <Location>; <Body ending with a period> <Credit>\n";
    user += "Echo these metadata strings exactly:\n";
    user += "Date: " + format_date(meta.event_date) + "\n";
    user += "Location: " + meta.location + "\n";
    user += "Credit: " + meta.credit + "\n";
    user += "\n";
    user += "Identified players:\n";
    if (entities.empty()) {
        user += std::string(kNoPlayersMarker) + "\n";
    } else {
        for (const ResolvedEntity& entity : entities) {
            user += roster::entity_phrase(entity) + "\n";
        }
    }
    user += "\n";
    user += "Vision annotations:\n";
    if (aux_block.empty()) {
        user += "(none)\n";
    } else {
        user += std::string(aux_block) + "\n";
    }
    user += "\n";
    append_roster_block(user, rosters, cfg.strict_roster);
    user += "\n";
    append_metadata_block(user, meta);
    return req;
}

Level2Parse parse_level2_response(std::string_view text, const ImageMetadata& meta,
                                  std::string_view credit_prefix) {
    const std::string trimmed = trim(text);

    std::string strict_failure;
    try {
        Level2Parse out;
        out.parts = caption::parse(trimmed, credit_prefix);
        out.text = trimmed;
        out.repaired = false;
        return out;
    } catch (const caption::CaptionError& e) {
        if (e.code != caption::ViolationCode::MALFORMED_SEGMENTS) {
            throw Error("unparseable caption (" + std::string(e.what()) + "): " + trimmed);
        }
        strict_failure = e.what();
    }

    // Single repair: treat the whole text as a bare body and re-wrap it with
    // the metadata segments.
    std::string body = trimmed;
    if (body.empty()) {
        throw Error("unparseable caption (empty response)");
    }
    if (body.back() != '.') body += '.';
    const std::string wrapped = format_date(meta.event_date) + "; " + meta.location + "; " +
                                body + " " + meta.credit;
    try {
        Level2Parse out;
        out.parts = caption::parse(wrapped, credit_prefix);
        out.text = wrapped;
        out.repaired = true;
        return out;
    } catch (const caption::CaptionError& e) {
        throw Error("unparseable caption (strict: " + strict_failure +
                    "; repair: " + std::string(e.what()) + "): " + trimmed);
    }
}

PipelineResult run_pipeline(const ImageAsset& image, const ImageMetadata& meta,
                            const RosterSet& rosters, Backends backends,
                            const std::vector<annotate::Annotator*>& annotators,
                            const PipelineConfig& cfg) {
    PipelineResult result;
    result.source_id = meta.source_id;
    const Stopwatch total;

    auto record = [&result](const std::string& stage, const Stopwatch& sw) {
        result.timings_ms.emplace_back(stage, sw.elapsed_ms());
    };
    const int attempts_per_level = 1 + std::max(0, cfg.retries);

    // Annotators overlap with Level-1 inference.
    auto annotator_run = start_annotators(annotators, image);

    // Level 1: generate + parse with bounded re-asks.
    bool level1_ok = false;
    {
        const Stopwatch sw;
        std::string failure;
        try {
            const backend::InferenceRequest request =
                build_level1_prompt(meta, rosters, cfg.prompts);
            for (int attempt = 0; attempt < attempts_per_level && !level1_ok; ++attempt) {
                try {
                    result.level1_raw = backends.level1->generate(request);
                    result.detections = parse_level1_response(result.level1_raw);
                    level1_ok = true;
                } catch (const BackendError& e) {
                    failure = e.what();
                    if (!e.retriable) break;
                } catch (const ResponseParseError& e) {
                    failure = e.what();
                }
            }
        } catch (const std::exception& e) {
            failure = e.what();
        }
        record("level1", sw);
        if (!level1_ok) {
            result.stage_errors.push_back({"level1", failure});
        }
    }

    if (!level1_ok) {
        const Stopwatch sw;
        auto outcome = join_annotators(annotator_run, cfg.annotator_timeout);
        result.annotator_notes = std::move(outcome.notes);
        result.aux_block = annotate::merge_annotations(outcome.lists);
        record("annotators", sw);
        record("total", total);
        return result;
    }

    // Resolve + default filtering policy: only HIGH-confidence, RESOLVED
    // entities reach the Level-2 prompt.
    {
        const Stopwatch sw;
        for (const EntityDetection& detection : result.detections) {
            result.resolved.push_back(roster::resolve(detection, rosters));
        }
        for (const ResolvedEntity& entity : result.resolved) {
            if (entity.status == ResolveStatus::RESOLVED &&
                entity.detection.confidence == Confidence::HIGH) {
                result.prompt_entities.push_back(entity);
            }
        }
        record("resolve", sw);
    }

    {
        const Stopwatch sw;
        auto outcome = join_annotators(annotator_run, cfg.annotator_timeout);
        result.annotator_notes = std::move(outcome.notes);
        result.aux_block = annotate::merge_annotations(outcome.lists);
        record("annotators", sw);
    }

    // Level 2: generate + parse (with the one-shot repair) and re-asks.
    bool level2_ok = false;
    {
        const Stopwatch sw;
        std::string failure;
        try {
            const backend::InferenceRequest request = build_level2_prompt(
                meta, rosters, result.prompt_entities, result.aux_block, cfg.prompts);
            for (int attempt = 0; attempt < attempts_per_level && !level2_ok; ++attempt) {
                try {
                    result.level2_raw = backends.level2->generate(request);
                    Level2Parse parsed = parse_level2_response(result.level2_raw, meta,
                                                               cfg.prompts.credit_prefix);
                    result.caption = std::move(parsed.parts);
                    result.caption_text = std::move(parsed.text);
                    result.caption_repaired = parsed.repaired;
                    level2_ok = true;
                } catch (const BackendError& e) {
                    failure = e.what();
                    if (!e.retriable) break;
                } catch (const Error& e) {
                    failure = e.what();
                }
            }
        } catch (const std::exception& e) {
            failure = e.what();
        }
        record("level2", sw);
        if (!level2_ok) {
            result.stage_errors.push_back({"level2", failure});
        }
    }

    if (level2_ok) {
        const Stopwatch sw;
        result.validation = caption::validate(result.caption_text, meta, result.prompt_entities,
                                              cfg.prompts.credit_prefix);
        record("validate", sw);
    }

    record("total", total);
    return result;
}

}  // namespace capwire::pipeline
