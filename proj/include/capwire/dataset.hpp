#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "capwire/domain.hpp"
#include "capwire/pipeline.hpp"

namespace capwire::dataset {

// One annotated training image: metadata, annotator-labelled detections with
// confidence, and the original ground-truth caption.
struct AnnotatedImage {
    std::string source_id;
    ImageMetadata metadata;
    std::vector<EntityDetection> gt_detections;
    std::string gt_caption;
};

inline constexpr std::string_view kBuilderVersion = "capwire-sft-1";

struct SftRecord {
    Level level = Level::LEVEL1;
    std::string system_text;
    std::string user_text;
    std::string image_ref;
    std::string target;
    std::string source_id;
    std::string builder_version;

    bool operator==(const SftRecord&) const = default;
};

// How Level-2 records handle captions that mention non-HIGH players:
// STRICT skips the record, SCRUB deletes the offending entity phrase from the
// body and keeps the record when the result is still grammatical.
enum class Level2Policy { STRICT, SCRUB };

std::string to_string(Level2Policy policy);
std::optional<Level2Policy> policy_from_string(std::string_view s);

// Target is the detection list in the Level-1 line grammar, deduplicated and
// sorted by (canonical team, jersey), or "NONE". A detection naming a team
// absent from the rosters is an annotation bug and throws InputError.
SftRecord build_level1_record(const AnnotatedImage& image, const RosterSet& rosters,
                              const pipeline::PromptConfig& cfg = {});

struct Level2Outcome {
    std::optional<SftRecord> record;
    std::string skip_reason;  // set iff record is empty

    bool skipped() const { return !record.has_value(); }
};

// Keeps the ground-truth caption when every mention maps (via roster reverse
// lookup) to a HIGH-confidence detection; otherwise skips or scrubs per the
// policy. Throws InputError for unparseable captions and ambiguous names.
Level2Outcome build_level2_record(const AnnotatedImage& image, const RosterSet& rosters,
                                  Level2Policy policy = Level2Policy::STRICT,
                                  const pipeline::PromptConfig& cfg = {});

// Line-delimited JSON with a stable field order and trailing newline;
// byte-identical output for identical inputs.
std::string export_dataset_string(const std::vector<SftRecord>& records);
void export_dataset(const std::vector<SftRecord>& records, const std::filesystem::path& path);

// Strict reader for exported datasets (round-trip inverse of export).
std::vector<SftRecord> load_dataset(const std::filesystem::path& path);

struct DatasetReport {
    std::size_t level1_count = 0;
    std::size_t level2_count = 0;
    std::size_t high_detections = 0;  // confidence distribution over LEVEL1 targets
    std::size_t low_detections = 0;

    struct Violation {
        std::size_t line = 0;  // 1-based
        std::string message;
    };
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

// Re-checks every record against the SftRecord invariants. Unreadable or
// truncated lines count as violations, never abort the scan.
DatasetReport validate_dataset(const std::filesystem::path& path);

std::string render_report(const DatasetReport& report);

}  // namespace capwire::dataset
