#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prcot/backend.hpp"
#include "prcot/core.hpp"
#include "prcot/prompts.hpp"

namespace prcot {

/// Answer extraction rule: the value is the remainder of the line holding the
/// LAST occurrence of the marker, trimmed. Absent when the marker never
/// appears. Models that restate the marker mid-reasoning are therefore read
/// at their final statement.
std::optional<std::string> extract_answer(const std::string& text, const std::string& marker);

/// Digest over perspectives, backend identity, sampling, answer marker and
/// every prompt template (name, version, body). The method label is excluded:
/// two configs that issue identical calls share a fingerprint, which is what
/// caching and baseline-identity comparisons need.
std::string config_fingerprint(const PipelineConfig& config, const PromptLibrary& prompts);

/// Executes the reasoning protocol over a shared backend: an initial pass,
/// one independent reflection per active perspective, and a synthesis pass
/// folding all critiques back into a refined answer. cot runs the initial
/// pass only; mcot reflects from a single perspective.
class Pipeline {
public:
    Pipeline(PipelineConfig config, PromptLibrary prompts, BackendPtr backend);

    /// One completion tagged initial; answer extracted via the marker (absent
    /// if the marker is missing — not an error).
    ReasoningArtifact generate_initial(const TaskInstance& task, std::vector<CallRecord>& calls);

    /// One completion per active perspective, each seeing only the query and
    /// the initial chain-of-thought. Reflections run concurrently when the
    /// configured parallelism allows; results always come back in canonical
    /// perspective order. Any single failure fails the whole set — a partial
    /// critique set must never reach synthesis.
    std::vector<ReflectionCritique> reflect_all(const TaskInstance& task,
                                                const ReasoningArtifact& initial,
                                                std::vector<CallRecord>& calls);

    /// One completion tagged synthesis producing the refined artifact. When
    /// the refined output carries no marker, the initial answer is kept and
    /// the fallback flag reported to the caller.
    ReasoningArtifact synthesize(const TaskInstance& task, const ReasoningArtifact& initial,
                                 const std::vector<ReflectionCritique>& critiques,
                                 std::vector<CallRecord>& calls, bool& answer_fallback);

    /// Full run. Stage errors are captured in the transcript's failure field
    /// rather than thrown; call counts obey 1 + |perspectives| + (1 if any
    /// perspective is active).
    RunTranscript run(const TaskInstance& task);

    /// Runs every task, preserving dataset order in the result. Tasks execute
    /// concurrently up to config.parallelism.
    std::vector<RunTranscript> run_batch(const std::vector<TaskInstance>& tasks);

    const PipelineConfig& config() const { return config_; }
    const std::string& fingerprint() const { return fingerprint_; }

private:
    CompletionRequest make_request(std::string prompt_text, PurposeTag purpose) const;
    CallRecord issue(std::string prompt_text, PurposeTag purpose) const;

    PipelineConfig config_;
    PromptLibrary prompts_;
    BackendPtr backend_;
    std::string fingerprint_;
};

/// Runs fn(i) for i in [0, n) on up to `parallelism` worker threads. Exceptions
/// propagate to the caller (first index wins).
void parallel_for(size_t n, int parallelism, const std::function<void(size_t)>& fn);

}  // namespace prcot
