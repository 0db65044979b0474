#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prcot/errors.hpp"

namespace prcot {

// ---------------------------------------------------------------------------
// Tasks and gold labels
// ---------------------------------------------------------------------------

enum class TaskKind { arithmetic, commonsense, ethics, logic_puzzle, custom };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

enum class MatchMode { exact, normalized, numeric };

std::string to_string(MatchMode mode);
MatchMode match_mode_from_string(const std::string& s);

/// Expected answer for a task, with the rule used to compare against it.
struct GoldLabel {
    std::string canonical_answer;
    std::vector<std::string> acceptable_aliases;
    MatchMode match_mode = MatchMode::normalized;

    /// Throws ValidationError if canonical_answer is empty, or if match_mode
    /// is numeric and canonical_answer does not parse as a decimal number.
    void validate() const;

    bool operator==(const GoldLabel&) const = default;
};

/// One input query, optionally with a gold label for scoring.
struct TaskInstance {
    std::string id;
    TaskKind kind = TaskKind::custom;
    std::string query;
    std::optional<GoldLabel> gold;

    /// Throws ValidationError if id is empty or query is blank.
    void validate() const;

    bool operator==(const TaskInstance&) const = default;
};

// ---------------------------------------------------------------------------
// Reasoning artifacts
// ---------------------------------------------------------------------------

enum class ArtifactStage { initial, refined };

std::string to_string(ArtifactStage stage);
ArtifactStage artifact_stage_from_string(const std::string& s);

/// A chain-of-thought text plus the answer extracted from it. The answer is
/// absent when the completion carried no answer marker; under the synthesis
/// fallback rule the refined artifact may instead carry the initial answer,
/// flagged on the transcript.
struct ReasoningArtifact {
    std::string cot_text;
    std::optional<std::string> answer;
    ArtifactStage stage = ArtifactStage::initial;

    bool operator==(const ReasoningArtifact&) const = default;
};

// ---------------------------------------------------------------------------
// Perspectives
// ---------------------------------------------------------------------------

/// Identifier of a reflection angle: one of the four built-ins or a named
/// custom perspective. Built-ins order before customs; customs order
/// lexicographically by name.
struct PerspectiveId {
    enum class Tag { v1, v2, v3, v4, custom };

    Tag tag = Tag::v1;
    std::string custom_name;  // set only for Tag::custom

    static PerspectiveId v1() { return {Tag::v1, {}}; }
    static PerspectiveId v2() { return {Tag::v2, {}}; }
    static PerspectiveId v3() { return {Tag::v3, {}}; }
    static PerspectiveId v4() { return {Tag::v4, {}}; }
    static PerspectiveId custom(std::string name);

    bool is_builtin() const { return tag != Tag::custom; }

    /// "v1".."v4" or "custom:<name>".
    std::string str() const;
    static PerspectiveId parse(const std::string& s);

    /// Human-readable angle name, used in critique labels and report rows.
    std::string display_name() const;

    bool operator==(const PerspectiveId&) const = default;
    bool operator<(const PerspectiveId& other) const;
};

/// Sorts ids into canonical order (v1, v2, v3, v4, customs lexicographically).
/// Throws ValidationError on duplicates. The output is a permutation of the
/// input; calling it twice is a no-op.
std::vector<PerspectiveId> canonical_perspective_order(std::vector<PerspectiveId> ids);

// ---------------------------------------------------------------------------
// Usage accounting
// ---------------------------------------------------------------------------

/// Token and latency cost of one completion call.
struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;

    std::int64_t total_tokens() const { return prompt_tokens + completion_tokens; }

    Usage& operator+=(const Usage& other) {
        prompt_tokens += other.prompt_tokens;
        completion_tokens += other.completion_tokens;
        latency_ms += other.latency_ms;
        return *this;
    }

    bool operator==(const Usage&) const = default;
};

/// One perspective's critique of the initial chain-of-thought.
struct ReflectionCritique {
    PerspectiveId perspective;
    std::string text;
    Usage usage;

    bool operator==(const ReflectionCritique&) const = default;
};

// ---------------------------------------------------------------------------
// Chat messages and call purposes
// ---------------------------------------------------------------------------

enum class Role { system, user, assistant };

std::string to_string(Role role);
Role role_from_string(const std::string& s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

/// Why a completion call was issued. Judge calls are tagged so evaluation
/// overhead can be excluded from pipeline cost summaries.
struct PurposeTag {
    enum class Kind { initial, reflection, synthesis, judge };

    Kind kind = Kind::initial;
    std::optional<PerspectiveId> perspective;  // set only for reflections

    static PurposeTag initial() { return {Kind::initial, std::nullopt}; }
    static PurposeTag reflection(PerspectiveId p) { return {Kind::reflection, std::move(p)}; }
    static PurposeTag synthesis() { return {Kind::synthesis, std::nullopt}; }
    static PurposeTag judge() { return {Kind::judge, std::nullopt}; }

    /// "initial", "reflection:v2", "synthesis" or "judge".
    std::string str() const;
    static PurposeTag parse(const std::string& s);

    bool operator==(const PurposeTag&) const = default;
};

// ---------------------------------------------------------------------------
// Pipeline configuration
// ---------------------------------------------------------------------------

struct SamplingParams {
    double temperature = 0.0;
    std::int64_t max_tokens = 1024;
    std::optional<std::int64_t> seed;

    bool operator==(const SamplingParams&) const = default;
};

enum class BackendKind { remote, mock, replay };

std::string to_string(BackendKind kind);
BackendKind backend_kind_from_string(const std::string& s);

/// Everything needed to construct a completion backend. The API key is never
/// stored here; the remote backend reads it from the environment.
struct BackendSpec {
    BackendKind kind = BackendKind::mock;
    std::string model = "mock-model";
    std::string endpoint = "https://api.openai.com";
    std::int64_t timeout_ms = 30000;
    int max_retries = 3;
    std::int64_t retry_base_delay_ms = 250;
    std::string script_path;       // mock: scripted rules file
    std::string record_path;       // replay source / recording sink
    std::int64_t mock_latency_ms = 5;
    bool cache = true;

    bool operator==(const BackendSpec&) const = default;
};

enum class Method { cot, mcot, prcot };

std::string to_string(Method method);
Method method_from_string(const std::string& s);

inline constexpr const char* kDefaultAnswerMarker = "FINAL ANSWER:";

/// Full configuration of one pipeline run.
struct PipelineConfig {
    Method method = Method::cot;
    std::vector<PerspectiveId> active_perspectives;  // kept in canonical order
    BackendSpec backend;
    SamplingParams sampling;
    std::string answer_marker = kDefaultAnswerMarker;
    int parallelism = 1;

    /// Normalizes perspective order and checks the method/perspective
    /// arity rules. prcot accepts an empty set and degenerates to the
    /// plain initial pass, so the baseline-reduction law is testable.
    void validate();

    bool operator==(const PipelineConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Run transcripts
// ---------------------------------------------------------------------------

/// One completion call as recorded in a transcript: the full prompt, the
/// completion text, and its usage.
struct CallRecord {
    PurposeTag purpose;
    std::vector<ChatMessage> messages;
    std::string completion;
    Usage usage;

    bool operator==(const CallRecord&) const = default;
};

struct FailureInfo {
    std::string stage;  // "initial" | "reflection" | "synthesis"
    std::string message;

    bool operator==(const FailureInfo&) const = default;
};

/// Complete record of one pipeline execution over one task.
///
/// created_at_ms is wall-clock metadata and is excluded from determinism
/// comparisons; wall_time_ms is the sum of per-call latencies on mock and
/// replay backends and measured wall time on the remote backend.
struct RunTranscript {
    std::string task_id;
    Method method = Method::cot;
    std::string config_fingerprint;
    ReasoningArtifact initial;
    std::vector<ReflectionCritique> critiques;
    ReasoningArtifact final;
    bool answer_fallback = false;
    std::vector<CallRecord> calls;
    std::int64_t wall_time_ms = 0;
    std::int64_t created_at_ms = 0;
    std::optional<FailureInfo> failure;

    bool succeeded() const { return !failure.has_value(); }

    /// Final answer with the synthesis fallback applied.
    std::optional<std::string> effective_final_answer() const {
        if (final.answer.has_value()) return final.answer;
        if (answer_fallback) return initial.answer;
        return std::nullopt;
    }

    Usage total_usage() const {
        Usage sum;
        for (const auto& call : calls) sum += call.usage;
        return sum;
    }

    bool operator==(const RunTranscript&) const = default;
};

// ---------------------------------------------------------------------------
// Hashing
// ---------------------------------------------------------------------------

/// FNV-1a 64-bit. Stable across platforms and processes, so it is safe to
/// persist as a cache key or config fingerprint.
std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// 16-hex-digit rendering of fnv1a64.
std::string fnv1a64_hex(const std::string& data);

/// Trims ASCII whitespace from both ends.
std::string trim(const std::string& s);

/// Number of whitespace-delimited tokens.
std::int64_t whitespace_token_count(const std::string& s);

}  // namespace prcot
