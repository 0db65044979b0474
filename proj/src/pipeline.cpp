#include "prcot/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace prcot {

std::optional<std::string> extract_answer(const std::string& text, const std::string& marker) {
    const size_t pos = text.rfind(marker);
    if (pos == std::string::npos) return std::nullopt;
    const size_t value_start = pos + marker.size();
    const size_t eol = text.find('\n', value_start);
    const std::string rest = eol == std::string::npos
                                 ? text.substr(value_start)
                                 : text.substr(value_start, eol - value_start);
    return trim(rest);
}

std::string config_fingerprint(const PipelineConfig& config, const PromptLibrary& prompts) {
    std::string buf;
    for (const auto& p : config.active_perspectives) {
        buf += p.str();
        buf += ',';
    }
    buf += '\x1f';
    buf += to_string(config.backend.kind);
    buf += '\x1f';
    buf += config.backend.model;
    buf += '\x1f';
    buf += config.backend.endpoint;
    buf += '\x1f';
    char num[64];
    std::snprintf(num, sizeof(num), "%.17g", config.sampling.temperature);
    buf += num;
    buf += '\x1f';
    buf += std::to_string(config.sampling.max_tokens);
    buf += '\x1f';
    buf += config.sampling.seed ? std::to_string(*config.sampling.seed) : std::string("none");
    buf += '\x1f';
    buf += config.answer_marker;
    buf += '\x1f';
    buf += prompts.fingerprint_text();
    return fnv1a64_hex(buf);
}

void parallel_for(size_t n, int parallelism, const std::function<void(size_t)>& fn) {
    if (n == 0) return;
    const size_t workers = std::min<size_t>(static_cast<size_t>(std::max(parallelism, 1)), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    size_t first_error_index = n;

    auto worker = [&] {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (i < first_error_index) {
                    first_error_index = i;
                    first_error = std::current_exception();
                }
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

Pipeline::Pipeline(PipelineConfig config, PromptLibrary prompts, BackendPtr backend)
    : config_(std::move(config)), prompts_(std::move(prompts)), backend_(std::move(backend)) {
    config_.validate();
    if (!backend_) throw ValidationError("pipeline requires a backend");
    fingerprint_ = config_fingerprint(config_, prompts_);
}

CompletionRequest Pipeline::make_request(std::string prompt_text, PurposeTag purpose) const {
    CompletionRequest req;
    req.model = config_.backend.model;
    req.messages.push_back({Role::user, std::move(prompt_text)});
    req.sampling = config_.sampling;
    req.purpose = std::move(purpose);
    return req;
}

CallRecord Pipeline::issue(std::string prompt_text, PurposeTag purpose) const {
    CompletionRequest req = make_request(std::move(prompt_text), std::move(purpose));
    CompletionResult result = backend_->complete(req);
    CallRecord record;
    record.purpose = req.purpose;
    record.messages = std::move(req.messages);
    record.completion = result.text;
    record.usage = result.usage;
    return record;
}

ReasoningArtifact Pipeline::generate_initial(const TaskInstance& task,
                                             std::vector<CallRecord>& calls) {
    const std::string prompt =
        render_initial(prompts_.initial_template(), task, config_.answer_marker);
    CallRecord record = issue(prompt, PurposeTag::initial());

    ReasoningArtifact artifact;
    artifact.cot_text = record.completion;
    artifact.answer = extract_answer(record.completion, config_.answer_marker);
    artifact.stage = ArtifactStage::initial;
    calls.push_back(std::move(record));
    return artifact;
}

std::vector<ReflectionCritique> Pipeline::reflect_all(const TaskInstance& task,
                                                      const ReasoningArtifact& initial,
                                                      std::vector<CallRecord>& calls) {
    const auto& perspectives = config_.active_perspectives;
    if (perspectives.empty()) {
        throw ContractError("reflect_all requires at least one active perspective");
    }

    // Slots are indexed by canonical position, so scheduling order can never
    // leak into the critique order or the transcript.
    std::vector<ReflectionCritique> critiques(perspectives.size());
    std::vector<CallRecord> records(perspectives.size());
    parallel_for(perspectives.size(), config_.parallelism, [&](size_t i) {
        const PerspectiveId& p = perspectives[i];
        const std::string prompt =
            render_reflection(prompts_.reflection_template(p), task, initial);
        CallRecord record = issue(prompt, PurposeTag::reflection(p));
        critiques[i] = ReflectionCritique{p, record.completion, record.usage};
        records[i] = std::move(record);
    });

    for (auto& r : records) calls.push_back(std::move(r));
    return critiques;
}

ReasoningArtifact Pipeline::synthesize(const TaskInstance& task, const ReasoningArtifact& initial,
                                       const std::vector<ReflectionCritique>& critiques,
                                       std::vector<CallRecord>& calls, bool& answer_fallback) {
    const std::string prompt = render_synthesis(prompts_.synthesis_template(), task, initial,
                                                critiques, config_.answer_marker);
    CallRecord record = issue(prompt, PurposeTag::synthesis());

    ReasoningArtifact artifact;
    artifact.cot_text = record.completion;
    artifact.answer = extract_answer(record.completion, config_.answer_marker);
    artifact.stage = ArtifactStage::refined;
    if (!artifact.answer) {
        // A formatting miss in the refined output must not register as a
        // changed answer; keep the initial answer and flag the fallback.
        artifact.answer = initial.answer;
        answer_fallback = true;
    }
    calls.push_back(std::move(record));
    return artifact;
}

RunTranscript Pipeline::run(const TaskInstance& task) {
    task.validate();

    RunTranscript t;
    t.task_id = task.id;
    t.method = config_.method;
    t.config_fingerprint = fingerprint_;
    t.created_at_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();

    // Wall time is the sum of per-call latencies: measured per call on the
    // remote backend, synthetic/recorded elsewhere. This keeps transcripts
    // bit-reproducible under mock and replay.
    auto finalize = [&t] {
        t.wall_time_ms = t.total_usage().latency_ms;
        return t;
    };

    try {
        t.initial = generate_initial(task, t.calls);
    } catch (const std::exception& e) {
        t.failure = FailureInfo{"initial", e.what()};
        return finalize();
    }
    t.final = t.initial;

    if (config_.active_perspectives.empty()) {
        return finalize();  // cot (or degenerate prcot): final is the initial artifact
    }

    try {
        t.critiques = reflect_all(task, t.initial, t.calls);
    } catch (const std::exception& e) {
        t.failure = FailureInfo{"reflection", e.what()};
        return finalize();
    }

    try {
        t.final = synthesize(task, t.initial, t.critiques, t.calls, t.answer_fallback);
    } catch (const std::exception& e) {
        t.failure = FailureInfo{"synthesis", e.what()};
        return finalize();
    }
    return finalize();
}

std::vector<RunTranscript> Pipeline::run_batch(const std::vector<TaskInstance>& tasks) {
    std::vector<RunTranscript> out(tasks.size());
    parallel_for(tasks.size(), config_.parallelism,
                 [&](size_t i) { out[i] = run(tasks[i]); });
    return out;
}

}  // namespace prcot
