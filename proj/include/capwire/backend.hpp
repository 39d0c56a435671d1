#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "capwire/domain.hpp"

namespace capwire::backend {

// One generation request. Mirrors the prompt side of the SFT record layout.
struct InferenceRequest {
    std::string system_text;
    std::string user_text;
    std::string image_ref;   // opaque handle; the pipeline passes source_id
    int max_tokens = 128;
    double temperature = 0.0;

    bool operator==(const InferenceRequest&) const = default;
};

// The single capability every model backend provides. Implementations must be
// safe for concurrent generate() calls and deterministic at temperature 0
// when scripted.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    // Throws BackendError on failure; retriable marks transient transport
    // problems the caller may re-ask.
    virtual std::string generate(const InferenceRequest& request) = 0;
};

// Scripted mock reading a fixture that maps (level, source_id) to response
// text:
//   {"level1": {"sb-001": "..."}, "level2": {"sb-001": "..."}}
// An optional fixed delay simulates inference latency for benchmarks.
class ScriptedMockBackend : public Backend {
public:
    ScriptedMockBackend(Level level, const std::filesystem::path& fixture_path,
                        std::chrono::milliseconds delay = std::chrono::milliseconds{0});
    ScriptedMockBackend(Level level, std::map<std::string, std::string> responses,
                        std::chrono::milliseconds delay = std::chrono::milliseconds{0});

    std::string id() const override;
    std::string generate(const InferenceRequest& request) override;

private:
    Level level_;
    std::map<std::string, std::string> responses_;  // source_id -> text
    std::chrono::milliseconds delay_;
};

// Chat-completion style client: POSTs the system/user messages plus the image
// reference to <base>/v1/chat/completions and returns the first choice text.
class HttpBackend : public Backend {
public:
    HttpBackend(std::string base_url, Level level,
                std::chrono::milliseconds timeout = std::chrono::milliseconds{30000},
                std::string model = "");

    std::string id() const override;
    std::string generate(const InferenceRequest& request) override;

private:
    std::string base_url_;
    Level level_;
    std::chrono::milliseconds timeout_;
    std::string model_;
};

// Builds a backend from an endpoint string: "mock:<fixture path>" or an
// http(s) base address. Throws ConfigError for anything else.
std::unique_ptr<Backend> make_backend(const std::string& endpoint, Level level,
                                      std::chrono::milliseconds mock_delay = std::chrono::milliseconds{0},
                                      std::chrono::milliseconds http_timeout = std::chrono::milliseconds{30000});

}  // namespace capwire::backend
