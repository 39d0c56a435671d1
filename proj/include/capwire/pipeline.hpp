#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "capwire/annotate.hpp"
#include "capwire/backend.hpp"
#include "capwire/caption.hpp"
#include "capwire/domain.hpp"
#include "capwire/roster.hpp"

namespace capwire::pipeline {

struct PromptConfig {
    // Strict mode refuses to build prompts without a roster; lenient mode
    // inserts a "roster unavailable" marker instead.
    bool strict_roster = true;
    int level1_max_tokens = 128;
    int level2_max_tokens = 256;
    double temperature = 0.0;
    std::string credit_prefix = std::string(caption::kDefaultCreditPrefix);
};

struct PipelineConfig {
    PromptConfig prompts;
    // Extra attempts per level on backend or parse failure; total backend
    // calls per image never exceed 2 + 2 * retries.
    int retries = 1;
    std::chrono::milliseconds annotator_timeout{2000};
};

// A Level-1 response line that does not conform to the line grammar.
struct ResponseParseError : Error {
    ResponseParseError(const std::string& what, std::string line_, std::size_t line_index_)
        : Error(what), line(std::move(line_)), line_index(line_index_) {}

    std::string line;
    std::size_t line_index = 0;
};

struct StageError {
    std::string stage;
    std::string message;

    bool operator==(const StageError&) const = default;
};

// Full per-image trace: raw texts, intermediates, validation, stage timings.
struct PipelineResult {
    std::string source_id;
    std::string level1_raw;
    std::vector<EntityDetection> detections;
    std::vector<ResolvedEntity> resolved;         // every detection, resolved
    std::vector<ResolvedEntity> prompt_entities;  // HIGH + RESOLVED subset fed to Level-2
    std::string aux_block;
    std::string level2_raw;
    std::optional<caption::CaptionParts> caption;
    std::string caption_text;  // canonical serialized caption, empty unless parsed
    bool caption_repaired = false;
    std::optional<caption::ValidationReport> validation;
    std::vector<std::pair<std::string, double>> timings_ms;
    std::vector<StageError> stage_errors;
    std::vector<std::string> annotator_notes;

    bool ok() const { return stage_errors.empty(); }
};

// Level-1 prompt: list visible players as `Team (jersey) [HIGH|LOW]`, roster
// context in canonical team order, metadata block. Byte-identical output for
// identical inputs. Throws ConfigError in strict mode with an empty roster.
backend::InferenceRequest build_level1_prompt(const ImageMetadata& meta,
                                              const RosterSet& rosters,
                                              const PromptConfig& cfg = {});

// Parses `<team> (<int>) [HIGH|LOW]` lines (confidence case-insensitive,
// blank lines skipped). Literal "NONE" yields an empty list. Duplicate
// (team, jersey) lines collapse to one detection keeping the higher
// confidence. Any other non-blank line throws ResponseParseError.
std::vector<EntityDetection> parse_level1_response(std::string_view text);

// Level-2 prompt: style instruction, echo strings, entity phrases (one per
// line, or a "No identified players." marker), aux block verbatim, roster and
// metadata context.
backend::InferenceRequest build_level2_prompt(const ImageMetadata& meta,
                                              const RosterSet& rosters,
                                              const std::vector<ResolvedEntity>& entities,
                                              std::string_view aux_block,
                                              const PromptConfig& cfg = {});

struct Level2Parse {
    caption::CaptionParts parts;
    std::string text;  // the text that parsed (raw, or re-wrapped on repair)
    bool repaired = false;
};

// Strict caption parse with a single deterministic repair: when the text has
// no segment structure it is treated as a bare body (period appended when
// missing) and re-wrapped with the metadata segments. Throws Error when both
// paths fail.
Level2Parse parse_level2_response(std::string_view text, const ImageMetadata& meta,
                                  std::string_view credit_prefix = caption::kDefaultCreditPrefix);

struct Backends {
    backend::Backend* level1 = nullptr;
    backend::Backend* level2 = nullptr;
};

// Runs the two-level flow for one image. Annotators run concurrently with
// Level-1 inference; a timed-out or failing annotator contributes nothing and
// is noted. A failed stage is recorded in the result, never thrown.
PipelineResult run_pipeline(const ImageAsset& image, const ImageMetadata& meta,
                            const RosterSet& rosters, Backends backends,
                            const std::vector<annotate::Annotator*>& annotators,
                            const PipelineConfig& cfg = {});

}  // namespace capwire::pipeline
