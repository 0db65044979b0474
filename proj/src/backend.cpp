#include "prcot/backend.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "prcot/serde.hpp"

namespace prcot {

// ---------------------------------------------------------------------------
// Requests
// ---------------------------------------------------------------------------

void CompletionRequest::validate() const {
    if (messages.empty()) {
        throw ValidationError("completion request has no messages");
    }
    for (const auto& m : messages) {
        if (m.role != Role::assistant && m.content.empty()) {
            throw ValidationError("completion request has an empty " + to_string(m.role) +
                                  " message");
        }
    }
}

std::string CompletionRequest::joined_content() const {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out += '\n';
        out += m.content;
    }
    return out;
}

std::string cache_key(const CompletionRequest& req) {
    // Unit separators keep field boundaries unambiguous in the digest input.
    std::string buf = req.model;
    buf += '\x1f';
    for (const auto& m : req.messages) {
        buf += to_string(m.role);
        buf += '\x1e';
        buf += m.content;
        buf += '\x1f';
    }
    char num[64];
    std::snprintf(num, sizeof(num), "%.17g", req.sampling.temperature);
    buf += num;
    buf += '\x1f';
    buf += std::to_string(req.sampling.max_tokens);
    buf += '\x1f';
    buf += req.sampling.seed ? std::to_string(*req.sampling.seed) : std::string("none");
    return fnv1a64_hex(buf);
}

Usage mock_usage(const CompletionRequest& req, const std::string& reply_text,
                 std::int64_t latency_ms) {
    Usage u;
    for (const auto& m : req.messages) {
        u.prompt_tokens += whitespace_token_count(m.content);
    }
    u.completion_tokens = whitespace_token_count(reply_text);
    u.latency_ms = latency_ms;
    return u;
}

// ---------------------------------------------------------------------------
// MockBackend
// ---------------------------------------------------------------------------

MockBackend::MockBackend(std::vector<MockRule> rules, std::int64_t latency_ms,
                         std::optional<std::string> default_reply)
    : rules_(std::move(rules)), latency_ms_(latency_ms), default_reply_(std::move(default_reply)) {}

std::shared_ptr<MockBackend> MockBackend::from_script_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open mock script: " + path);
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("mock script " + path + ": " + e.what());
    }

    auto parse_purpose_kind = [&path](const std::string& s) {
        if (s == "initial") return PurposeTag::Kind::initial;
        if (s == "reflection") return PurposeTag::Kind::reflection;
        if (s == "synthesis") return PurposeTag::Kind::synthesis;
        if (s == "judge") return PurposeTag::Kind::judge;
        throw ValidationError("mock script " + path + ": unknown purpose '" + s + "'");
    };

    std::vector<MockRule> rules;
    for (const auto& r : j.value("rules", ojson::array())) {
        MockRule rule;
        if (r.contains("purpose") && !r.at("purpose").is_null()) {
            rule.purpose = parse_purpose_kind(r.at("purpose").get<std::string>());
        }
        if (r.contains("perspective") && !r.at("perspective").is_null()) {
            rule.perspective = PerspectiveId::parse(r.at("perspective").get<std::string>());
        }
        rule.contains = r.value("contains", std::string{});
        rule.reply = r.value("reply", std::string{});
        rule.fail = r.value("fail", false);
        rules.push_back(std::move(rule));
    }
    std::optional<std::string> default_reply;
    if (j.contains("default_reply") && !j.at("default_reply").is_null()) {
        default_reply = j.at("default_reply").get<std::string>();
    }
    return std::make_shared<MockBackend>(std::move(rules), j.value("latency_ms", std::int64_t{5}),
                                         std::move(default_reply));
}

CompletionResult MockBackend::complete(const CompletionRequest& req) {
    req.validate();
    calls_.fetch_add(1);
    const std::string haystack = req.joined_content();

    const std::string* reply = nullptr;
    for (const auto& rule : rules_) {
        if (rule.purpose && *rule.purpose != req.purpose.kind) continue;
        if (rule.perspective &&
            (!req.purpose.perspective || *rule.perspective != *req.purpose.perspective)) {
            continue;
        }
        if (!rule.contains.empty() && haystack.find(rule.contains) == std::string::npos) continue;
        if (rule.fail) {
            throw BackendError("mock: scripted failure for purpose " + req.purpose.str());
        }
        reply = &rule.reply;
        break;
    }
    if (reply == nullptr) {
        if (!default_reply_) {
            throw BackendError("mock: no scripted reply matches request (purpose " +
                               req.purpose.str() + ")");
        }
        reply = &*default_reply_;
    }
    if (reply->empty()) {
        throw EmptyOutputError("mock: scripted reply is empty");
    }

    CompletionResult result;
    result.text = *reply;
    result.usage = mock_usage(req, *reply, latency_ms_);
    result.backend = BackendKind::mock;
    result.cache_hit = false;
    return result;
}

// ---------------------------------------------------------------------------
// ReplayStore
// ---------------------------------------------------------------------------

namespace {

ojson request_snapshot(const CompletionRequest& req) {
    ojson messages = ojson::array();
    for (const auto& m : req.messages) messages.push_back(message_to_json(m));
    return ojson{{"model", req.model},
                 {"messages", std::move(messages)},
                 {"sampling", sampling_to_json(req.sampling)},
                 {"purpose", req.purpose.str()}};
}

}  // namespace

ReplayStore::ReplayStore(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // no recording yet; file is created on first append
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("replay store " + path_ + " line " + std::to_string(line_no) +
                                  ": " + e.what());
        }
        Stored stored;
        stored.text = j.at("response").at("text").get<std::string>();
        stored.usage = usage_from_json(j.at("response").at("usage"));
        records_[j.at("key").get<std::string>()] = std::move(stored);
    }
}

std::optional<ReplayStore::Stored> ReplayStore::lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = records_.find(key);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

void ReplayStore::append(const std::string& key, const CompletionRequest& req,
                         const Stored& response) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (records_.count(key)) return;  // first recording wins; keep the file append-only
    records_[key] = response;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw BackendError("cannot append to replay store: " + path_);
    ojson record{{"key", key},
                 {"request", request_snapshot(req)},
                 {"response", ojson{{"text", response.text}, {"usage", usage_to_json(response.usage)}}}};
    out << record.dump() << '\n';
}

size_t ReplayStore::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_.size();
}

// ---------------------------------------------------------------------------
// ReplayBackend
// ---------------------------------------------------------------------------

ReplayBackend::ReplayBackend(std::shared_ptr<ReplayStore> store) : store_(std::move(store)) {}

std::shared_ptr<ReplayBackend> ReplayBackend::from_file(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw ValidationError("replay store not found: " + path);
    probe.close();
    return std::make_shared<ReplayBackend>(std::make_shared<ReplayStore>(path));
}

CompletionResult ReplayBackend::complete(const CompletionRequest& req) {
    req.validate();
    const std::string key = cache_key(req);
    auto stored = store_->lookup(key);
    if (!stored) {
        throw ReplayMissError("replay: no recorded response for key " + key + " (purpose " +
                              req.purpose.str() + ")");
    }
    CompletionResult result;
    result.text = stored->text;
    result.usage = stored->usage;
    result.backend = BackendKind::replay;
    result.cache_hit = false;
    return result;
}

// ---------------------------------------------------------------------------
// RecordingBackend
// ---------------------------------------------------------------------------

RecordingBackend::RecordingBackend(BackendPtr inner, std::shared_ptr<ReplayStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

CompletionResult RecordingBackend::complete(const CompletionRequest& req) {
    const std::string key = cache_key(req);
    if (auto stored = store_->lookup(key)) {
        CompletionResult result;
        result.text = stored->text;
        result.usage = stored->usage;  // latency is the recorded original's
        result.backend = BackendKind::replay;
        result.cache_hit = true;
        return result;
    }
    CompletionResult result = inner_->complete(req);
    store_->append(key, req, ReplayStore::Stored{result.text, result.usage});
    return result;
}

// ---------------------------------------------------------------------------
// CachingBackend
// ---------------------------------------------------------------------------

CachingBackend::CachingBackend(BackendPtr inner) : inner_(std::move(inner)) {}

CompletionResult CachingBackend::complete(const CompletionRequest& req) {
    const std::string key = cache_key(req);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            CompletionResult hit = it->second;
            hit.cache_hit = true;  // latency stays the cached original's
            return hit;
        }
    }
    CompletionResult result = inner_->complete(req);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        cache_.emplace(key, result);
    }
    return result;
}

// ---------------------------------------------------------------------------
// RemoteBackend
// ---------------------------------------------------------------------------

namespace {

const char* getenv_nonempty(const char* name) {
    const char* v = std::getenv(name);
    return (v && *v) ? v : nullptr;
}

}  // namespace

RemoteBackend::RemoteBackend(BackendSpec spec) : spec_(std::move(spec)) {
    if (const char* key = getenv_nonempty("PRCOT_API_KEY")) {
        api_key_ = key;
    } else if (const char* key = getenv_nonempty("OPENAI_API_KEY")) {
        api_key_ = key;
    }

    std::string endpoint = spec_.endpoint;
    if (const char* override_url = getenv_nonempty("PRCOT_ENDPOINT")) {
        endpoint = override_url;
    }

    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ValidationError("remote endpoint must include a scheme: " + endpoint);
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    std::string base_path;
    if (path_start == std::string::npos) {
        host_ = endpoint;
    } else {
        host_ = endpoint.substr(0, path_start);
        base_path = endpoint.substr(path_start);
        while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();
    }
    if (base_path.empty()) base_path = "/v1";
    path_ = base_path.size() >= 17 && base_path.substr(base_path.size() - 17) == "/chat/completions"
                ? base_path
                : base_path + "/chat/completions";
}

std::string RemoteBackend::build_request_body(const CompletionRequest& req) {
    ojson messages = ojson::array();
    for (const auto& m : req.messages) messages.push_back(message_to_json(m));
    ojson body{{"model", req.model},
               {"messages", std::move(messages)},
               {"temperature", req.sampling.temperature},
               {"max_tokens", req.sampling.max_tokens}};
    if (req.sampling.seed) body["seed"] = *req.sampling.seed;
    return body.dump();
}

CompletionResult RemoteBackend::complete(const CompletionRequest& req) {
    req.validate();
    if (api_key_.empty()) {
        throw BackendError("remote backend: no API key (set PRCOT_API_KEY or OPENAI_API_KEY)");
    }

    const std::string body = build_request_body(req);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

    std::string last_error;
    for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
        if (attempt > 0) {
            const auto delay = spec_.retry_base_delay_ms * (std::int64_t{1} << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        attempts_.fetch_add(1);

        httplib::Client client(host_);
        client.set_connection_timeout(spec_.timeout_ms / 1000, (spec_.timeout_ms % 1000) * 1000);
        client.set_read_timeout(spec_.timeout_ms / 1000, (spec_.timeout_ms % 1000) * 1000);

        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(path_, headers, body, "application/json");
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();

        if (!res) {
            last_error = "connection error: " + httplib::to_string(res.error());
            continue;  // transient
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;  // transient
        }
        if (res->status != 200) {
            throw BackendError("remote backend: HTTP " + std::to_string(res->status) + ": " +
                               res->body);
        }

        ojson j;
        try {
            j = ojson::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("remote backend: malformed response JSON: ") + e.what());
        }
        if (!j.contains("choices") || j["choices"].empty()) {
            throw BackendError("remote backend: response has no choices");
        }

        CompletionResult result;
        result.text = j["choices"][0].at("message").at("content").get<std::string>();
        if (result.text.empty()) {
            throw EmptyOutputError("remote backend: empty completion text");
        }
        if (j.contains("usage")) {
            result.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
            result.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
        }
        result.usage.latency_ms = elapsed;
        result.backend = BackendKind::remote;
        result.cache_hit = false;
        return result;
    }
    throw BackendError("remote backend: request failed after " +
                       std::to_string(spec_.max_retries + 1) + " attempts (" + last_error + ")");
}

// ---------------------------------------------------------------------------
// Factory
// ---------------------------------------------------------------------------

BackendPtr make_backend(const BackendSpec& spec) {
    BackendPtr base;
    switch (spec.kind) {
        case BackendKind::mock:
            if (spec.script_path.empty()) {
                throw ValidationError("mock backend requires a script file");
            }
            base = MockBackend::from_script_file(spec.script_path);
            break;
        case BackendKind::replay:
            if (spec.record_path.empty()) {
                throw ValidationError("replay backend requires a record file");
            }
            base = ReplayBackend::from_file(spec.record_path);
            break;
        case BackendKind::remote:
            base = std::make_shared<RemoteBackend>(spec);
            break;
    }
    // A replay base reads the store directly; recording on top would be circular.
    if (!spec.record_path.empty() && spec.kind != BackendKind::replay) {
        base = std::make_shared<RecordingBackend>(base,
                                                  std::make_shared<ReplayStore>(spec.record_path));
    }
    if (spec.cache) {
        base = std::make_shared<CachingBackend>(base);
    }
    return base;
}

}  // namespace prcot
