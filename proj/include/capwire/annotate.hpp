#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "capwire/domain.hpp"

namespace capwire::annotate {

enum class AnnotationKind { CELEBRITY = 0, LOGO = 1, OCR_TEXT = 2, GENERIC_CAPTION = 3 };

std::string to_string(AnnotationKind kind);
std::optional<AnnotationKind> kind_from_string(std::string_view s);

// One auxiliary vision signal feeding the Level-2 prompt.
struct AuxAnnotation {
    AnnotationKind kind = AnnotationKind::GENERIC_CAPTION;
    std::string payload;  // non-empty
    double score = 0.0;   // [0, 1]

    bool operator==(const AuxAnnotation&) const = default;
};

// Pluggable contract for the auxiliary vision models (faces, logos, OCR,
// generic description). Real detectors live behind remote endpoints; the
// in-tree implementations are the deterministic fixture stub and the HTTP
// adapter.
class Annotator {
public:
    virtual ~Annotator() = default;
    virtual std::string name() const = 0;
    // Throws InputError for unreadable images and BackendError for service
    // failures (retriable vs permanent per BackendError::retriable).
    virtual std::vector<AuxAnnotation> annotate(const ImageAsset& image) = 0;
};

// Fixture-backed stub keyed by source_id. Unknown ids yield no annotations.
class FixtureAnnotator : public Annotator {
public:
    explicit FixtureAnnotator(const std::filesystem::path& fixture_path);
    explicit FixtureAnnotator(std::map<std::string, std::vector<AuxAnnotation>> fixtures);

    std::string name() const override { return "fixture"; }
    std::vector<AuxAnnotation> annotate(const ImageAsset& image) override;

private:
    std::map<std::string, std::vector<AuxAnnotation>> fixtures_;
};

struct RetryPolicy {
    int max_retries = 2;
    std::chrono::milliseconds initial_backoff{100};
    double backoff_factor = 2.0;
};

// HTTP adapter for an external annotator service. POSTs {"source_id", "image_b64"}
// to <base>/annotate and expects a JSON array of annotations back. Transient
// failures are retried per the policy; 4xx responses are permanent.
class RemoteAnnotator : public Annotator {
public:
    RemoteAnnotator(std::string base_url,
                    std::chrono::milliseconds timeout = std::chrono::milliseconds{2000},
                    RetryPolicy retry = {});

    std::string name() const override { return "remote:" + base_url_; }
    std::vector<AuxAnnotation> annotate(const ImageAsset& image) override;

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
    RetryPolicy retry_;
};

// Serializes annotation lists into the Level-2 context block: one line per
// annotation, `KIND: payload (score=S.SS)`, ordered by kind, then descending
// score, then payload. Pure; permuting the input never changes the output.
std::string merge_annotations(const std::vector<std::vector<AuxAnnotation>>& lists);

}  // namespace capwire::annotate
