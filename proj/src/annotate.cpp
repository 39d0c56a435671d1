#include "capwire/annotate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <thread>
#include <tuple>

#include <httplib.h>

#include "capwire/serde.hpp"

namespace capwire::annotate {

std::string to_string(AnnotationKind kind) {
    switch (kind) {
        case AnnotationKind::CELEBRITY: return "CELEBRITY";
        case AnnotationKind::LOGO: return "LOGO";
        case AnnotationKind::OCR_TEXT: return "OCR_TEXT";
        case AnnotationKind::GENERIC_CAPTION: return "GENERIC_CAPTION";
    }
    return "GENERIC_CAPTION";
}

std::optional<AnnotationKind> kind_from_string(std::string_view s) {
    if (s == "CELEBRITY") return AnnotationKind::CELEBRITY;
    if (s == "LOGO") return AnnotationKind::LOGO;
    if (s == "OCR_TEXT") return AnnotationKind::OCR_TEXT;
    if (s == "GENERIC_CAPTION") return AnnotationKind::GENERIC_CAPTION;
    return std::nullopt;
}

FixtureAnnotator::FixtureAnnotator(const std::filesystem::path& fixture_path) {
    std::ifstream in(fixture_path);
    if (!in) {
        throw IoError("cannot open annotator fixture: " + fixture_path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("annotator fixture " + fixture_path.string() +
                         " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) {
        throw InputError("annotator fixture must map source_id to annotation lists");
    }
    for (const auto& [source_id, entries] : doc.items()) {
        std::vector<AuxAnnotation> list;
        for (const auto& entry : entries) {
            list.push_back(serde::annotation_from_json(entry));
        }
        fixtures_.emplace(source_id, std::move(list));
    }
}

FixtureAnnotator::FixtureAnnotator(std::map<std::string, std::vector<AuxAnnotation>> fixtures)
    : fixtures_(std::move(fixtures)) {}

std::vector<AuxAnnotation> FixtureAnnotator::annotate(const ImageAsset& image) {
    if (image.bytes.empty()) {
        throw InputError("image " + image.source_id + " has no readable bytes");
    }
    const auto it = fixtures_.find(image.source_id);
    if (it == fixtures_.end()) return {};
    return it->second;
}

RemoteAnnotator::RemoteAnnotator(std::string base_url, std::chrono::milliseconds timeout,
                                 RetryPolicy retry)
    : base_url_(std::move(base_url)), timeout_(timeout), retry_(retry) {}

std::vector<AuxAnnotation> RemoteAnnotator::annotate(const ImageAsset& image) {
    if (image.bytes.empty()) {
        throw InputError("image " + image.source_id + " has no readable bytes");
    }

    nlohmann::json payload{{"source_id", image.source_id},
                           {"image_b64", httplib::detail::base64_encode(image.bytes)}};
    const std::string body = payload.dump();

    std::string last_error = "no attempt made";
    auto backoff = retry_.initial_backoff;
    for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long long>(static_cast<double>(backoff.count()) * retry_.backoff_factor));
        }

        httplib::Client client(base_url_);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_));
        client.set_read_timeout(timeout_);
        client.set_write_timeout(timeout_);

        auto res = client.Post("/annotate", body, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;  // retriable
        }
        if (res->status >= 500 || res->status == 429) {
            last_error = "server returned status " + std::to_string(res->status);
            continue;  // retriable
        }
        if (res->status != 200) {
            throw BackendError("annotator " + base_url_ + " rejected request with status " +
                                   std::to_string(res->status),
                               /*retriable=*/false);
        }
        try {
            const auto doc = nlohmann::json::parse(res->body);
            std::vector<AuxAnnotation> list;
            for (const auto& entry : doc) {
                list.push_back(serde::annotation_from_json(entry));
            }
            return list;
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(
                "annotator " + base_url_ + " returned malformed JSON: " + std::string(e.what()),
                /*retriable=*/false);
        }
    }
    throw BackendError("annotator " + base_url_ + " unreachable after " +
                           std::to_string(retry_.max_retries + 1) + " attempts: " + last_error,
                       /*retriable=*/true);
}

std::string merge_annotations(const std::vector<std::vector<AuxAnnotation>>& lists) {
    std::vector<AuxAnnotation> all;
    for (const auto& list : lists) {
        all.insert(all.end(), list.begin(), list.end());
    }
    std::sort(all.begin(), all.end(), [](const AuxAnnotation& a, const AuxAnnotation& b) {
        return std::tuple(static_cast<int>(a.kind), -a.score, std::cref(a.payload)) <
               std::tuple(static_cast<int>(b.kind), -b.score, std::cref(b.payload));
    });

    std::string out;
    for (const AuxAnnotation& a : all) {
        if (!out.empty()) out += '\n';
        char score[16];
        std::snprintf(score, sizeof(score), "%.2f", a.score);
        out += to_string(a.kind);
        out += ": ";
        out += a.payload;
        out += " (score=";
        out += score;
        out += ")";
    }
    return out;
}

}  // namespace capwire::annotate
