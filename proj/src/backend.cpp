#include "capwire/backend.hpp"

#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "capwire/errors.hpp"

namespace capwire::backend {

namespace {

const char* level_key(Level level) {
    return level == Level::LEVEL1 ? "level1" : "level2";
}

}  // namespace

ScriptedMockBackend::ScriptedMockBackend(Level level, const std::filesystem::path& fixture_path,
                                         std::chrono::milliseconds delay)
    : level_(level), delay_(delay) {
    std::ifstream in(fixture_path);
    if (!in) {
        throw IoError("cannot open mock backend fixture: " + fixture_path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("mock fixture " + fixture_path.string() + " is not valid JSON: " +
                         e.what());
    }
    const auto it = doc.find(level_key(level_));
    if (it == doc.end() || !it->is_object()) {
        throw InputError("mock fixture " + fixture_path.string() + " has no '" +
                         level_key(level_) + "' section");
    }
    for (const auto& [source_id, text] : it->items()) {
        responses_.emplace(source_id, text.get<std::string>());
    }
}

ScriptedMockBackend::ScriptedMockBackend(Level level, std::map<std::string, std::string> responses,
                                         std::chrono::milliseconds delay)
    : level_(level), responses_(std::move(responses)), delay_(delay) {}

std::string ScriptedMockBackend::id() const {
    return std::string("mock-") + level_key(level_);
}

std::string ScriptedMockBackend::generate(const InferenceRequest& request) {
    if (delay_.count() > 0) {
        std::this_thread::sleep_for(delay_);
    }
    const auto it = responses_.find(request.image_ref);
    if (it == responses_.end()) {
        throw BackendError("mock backend has no scripted " + std::string(level_key(level_)) +
                               " response for source '" + request.image_ref + "'",
                           /*retriable=*/false);
    }
    return it->second;
}

HttpBackend::HttpBackend(std::string base_url, Level level, std::chrono::milliseconds timeout,
                         std::string model)
    : base_url_(std::move(base_url)), level_(level), timeout_(timeout), model_(std::move(model)) {}

std::string HttpBackend::id() const {
    return base_url_ + "#" + level_key(level_);
}

std::string HttpBackend::generate(const InferenceRequest& request) {
    if (request.system_text.empty() || request.user_text.empty()) {
        throw BackendError("inference request must carry system and user text",
                           /*retriable=*/false);
    }

    nlohmann::ordered_json payload;
    if (!model_.empty()) payload["model"] = model_;
    payload["messages"] = nlohmann::ordered_json::array(
        {{{"role", "system"}, {"content", request.system_text}},
         {{"role", "user"},
          {"content", nlohmann::ordered_json::array(
                          {{{"type", "text"}, {"text", request.user_text}},
                           {{"type", "image"}, {"image_ref", request.image_ref}}})}}});
    payload["max_tokens"] = request.max_tokens;
    payload["temperature"] = request.temperature;

    httplib::Client client(base_url_);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_));
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    auto res = client.Post("/v1/chat/completions", payload.dump(), "application/json");
    if (!res) {
        throw BackendError("backend " + base_url_ + " unreachable: " +
                               httplib::to_string(res.error()),
                           /*retriable=*/true);
    }
    if (res->status >= 500 || res->status == 429) {
        throw BackendError("backend " + base_url_ + " returned status " +
                               std::to_string(res->status),
                           /*retriable=*/true);
    }
    if (res->status != 200) {
        throw BackendError("backend " + base_url_ + " rejected request with status " +
                               std::to_string(res->status),
                           /*retriable=*/false);
    }

    try {
        const auto doc = nlohmann::json::parse(res->body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendError("backend " + base_url_ + " returned a malformed completion: " +
                               std::string(e.what()),
                           /*retriable=*/false);
    }
}

std::unique_ptr<Backend> make_backend(const std::string& endpoint, Level level,
                                      std::chrono::milliseconds mock_delay,
                                      std::chrono::milliseconds http_timeout) {
    if (endpoint.rfind("mock:", 0) == 0) {
        return std::make_unique<ScriptedMockBackend>(level, endpoint.substr(5), mock_delay);
    }
    if (endpoint.rfind("http://", 0) == 0 || endpoint.rfind("https://", 0) == 0) {
        return std::make_unique<HttpBackend>(endpoint, level, http_timeout);
    }
    throw ConfigError("backend endpoint must be 'mock:<fixture path>' or an http(s) address, got '" +
                      endpoint + "'");
}

}  // namespace capwire::backend
