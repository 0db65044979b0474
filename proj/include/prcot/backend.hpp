#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "prcot/core.hpp"

namespace prcot {

// ---------------------------------------------------------------------------
// Requests and results
// ---------------------------------------------------------------------------

struct CompletionRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    SamplingParams sampling;
    PurposeTag purpose;

    /// Throws ValidationError when messages are empty or a user/system
    /// message has empty content.
    void validate() const;

    /// All message contents joined with newlines; what mock rules match on.
    std::string joined_content() const;
};

struct CompletionResult {
    std::string text;
    Usage usage;
    BackendKind backend = BackendKind::mock;
    bool cache_hit = false;
};

/// Deterministic digest over (model, message roles+contents, sampling).
/// The purpose tag is excluded so baselines share cached calls with the
/// poly-reflective runs.
std::string cache_key(const CompletionRequest& req);

/// Deterministic usage for scripted completions: whitespace token counts
/// for prompt and reply, plus a fixed synthetic latency.
Usage mock_usage(const CompletionRequest& req, const std::string& reply_text,
                 std::int64_t latency_ms);

// ---------------------------------------------------------------------------
// Backend interface
// ---------------------------------------------------------------------------

class Backend {
public:
    virtual ~Backend() = default;

    /// Issues one completion. Throws BackendError (or a subclass) on failure
    /// and EmptyOutputError when the completion text is empty.
    virtual CompletionResult complete(const CompletionRequest& req) = 0;

    virtual BackendKind kind() const = 0;
};

using BackendPtr = std::shared_ptr<Backend>;

// ---------------------------------------------------------------------------
// Scripted mock
// ---------------------------------------------------------------------------

/// One scripted reply. A rule matches when every set field matches: purpose
/// kind, reflection perspective, and `contains` as a substring of the
/// request's joined message contents. Rules are tried in order.
struct MockRule {
    std::optional<PurposeTag::Kind> purpose;
    std::optional<PerspectiveId> perspective;
    std::string contains;
    std::string reply;
    bool fail = false;  // simulate a backend failure instead of replying
};

class MockBackend : public Backend {
public:
    explicit MockBackend(std::vector<MockRule> rules, std::int64_t latency_ms = 5,
                         std::optional<std::string> default_reply = std::nullopt);

    /// Loads rules from a JSON script file:
    ///   {"latency_ms": 5, "default_reply": null,
    ///    "rules": [{"purpose": "reflection", "perspective": "v1",
    ///               "contains": "...", "reply": "...", "fail": false}, ...]}
    static std::shared_ptr<MockBackend> from_script_file(const std::string& path);

    CompletionResult complete(const CompletionRequest& req) override;
    BackendKind kind() const override { return BackendKind::mock; }

    std::int64_t latency_ms() const { return latency_ms_; }
    std::int64_t calls() const { return calls_.load(); }

private:
    std::vector<MockRule> rules_;
    std::int64_t latency_ms_;
    std::optional<std::string> default_reply_;
    std::atomic<std::int64_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Record / replay store
// ---------------------------------------------------------------------------

/// Append-only store of completed calls, one JSON record per line:
///   {"key": ..., "request": {...}, "response": {"text": ..., "usage": {...}}}
/// Doubles as the persistent cache that lets interrupted runs resume without
/// re-calling the backend.
class ReplayStore {
public:
    /// In-memory store (no file attached).
    ReplayStore() = default;

    /// Loads existing records from `path` if it exists; appends new records
    /// to the same file.
    explicit ReplayStore(std::string path);

    struct Stored {
        std::string text;
        Usage usage;
    };

    std::optional<Stored> lookup(const std::string& key) const;
    void append(const std::string& key, const CompletionRequest& req, const Stored& response);
    size_t size() const;

private:
    mutable std::mutex mutex_;
    std::string path_;
    std::unordered_map<std::string, Stored> records_;
};

/// Serves completions from a store only; unrecorded requests raise
/// ReplayMissError.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(std::shared_ptr<ReplayStore> store);
    static std::shared_ptr<ReplayBackend> from_file(const std::string& path);

    CompletionResult complete(const CompletionRequest& req) override;
    BackendKind kind() const override { return BackendKind::replay; }

private:
    std::shared_ptr<ReplayStore> store_;
};

/// Wraps another backend and records every completion into a store. A request
/// already present in the store is served from it without calling the inner
/// backend, so reruns are free.
class RecordingBackend : public Backend {
public:
    RecordingBackend(BackendPtr inner, std::shared_ptr<ReplayStore> store);

    CompletionResult complete(const CompletionRequest& req) override;
    BackendKind kind() const override { return inner_->kind(); }

private:
    BackendPtr inner_;
    std::shared_ptr<ReplayStore> store_;
};

// ---------------------------------------------------------------------------
// In-memory cache
// ---------------------------------------------------------------------------

class CachingBackend : public Backend {
public:
    explicit CachingBackend(BackendPtr inner);

    CompletionResult complete(const CompletionRequest& req) override;
    BackendKind kind() const override { return inner_->kind(); }

private:
    BackendPtr inner_;
    std::mutex mutex_;
    std::unordered_map<std::string, CompletionResult> cache_;
};

// ---------------------------------------------------------------------------
// Remote OpenAI-compatible backend
// ---------------------------------------------------------------------------

/// Chat-completions client. Endpoint, model, timeout and retry policy come
/// from the BackendSpec; the API key comes from PRCOT_API_KEY (falling back
/// to OPENAI_API_KEY) and is never written to disk. Transient failures
/// (connection errors, HTTP 429/5xx) are retried with exponential backoff.
class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(BackendSpec spec);

    CompletionResult complete(const CompletionRequest& req) override;
    BackendKind kind() const override { return BackendKind::remote; }

    /// HTTP attempts issued so far (across retries); used by tests to assert
    /// zero network traffic under replay.
    std::int64_t http_attempts() const { return attempts_.load(); }

    /// Request body sent on the wire, as a deterministic function of the
    /// request alone. Retries resend exactly these bytes.
    static std::string build_request_body(const CompletionRequest& req);

private:
    BackendSpec spec_;
    std::string api_key_;
    std::string host_;   // scheme://host[:port]
    std::string path_;   // /…/chat/completions
    std::atomic<std::int64_t> attempts_{0};
};

/// Builds the configured backend chain: base (mock/replay/remote), wrapped in
/// a recording layer when record_path is set, wrapped in an in-memory cache
/// when spec.cache is true.
BackendPtr make_backend(const BackendSpec& spec);

}  // namespace prcot
