#pragma once

// Shared test fixtures: scripted mock sessions with known correctness
// patterns, plus small filesystem helpers.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "prcot/backend.hpp"
#include "prcot/core.hpp"
#include "prcot/evaluation.hpp"
#include "prcot/prompts.hpp"

namespace prcot::testfx {

// ---------------------------------------------------------------------------
// Flaw-injection suite: one task per error tag. The task query carries a
// TASK[<tag>] marker; only the perspective mapped to the tag emits a critique
// carrying FLAW[<tag>]; the scripted synthesis corrects the answer iff some
// FLAW marker reached its prompt. Correction patterns under dropped
// perspectives are therefore fully determined by the correction map.
// ---------------------------------------------------------------------------

inline std::vector<TaskInstance> flaw_tasks() {
    std::vector<TaskInstance> tasks;
    for (ErrorTag tag : all_error_tags()) {
        const std::string name = to_string(tag);
        TaskInstance task;
        task.id = "flaw_" + name;
        task.kind = TaskKind::ethics;
        task.query = "TASK[" + name + "] Decide the right course of action in scenario '" + name +
                     "' and justify it.";
        task.gold = GoldLabel{"right_" + name, {}, MatchMode::normalized};
        tasks.push_back(std::move(task));
    }
    return tasks;
}

inline std::vector<MockRule> flaw_rules() {
    std::vector<MockRule> rules;
    for (ErrorTag tag : all_error_tags()) {
        const std::string name = to_string(tag);
        rules.push_back({PurposeTag::Kind::initial, std::nullopt, "TASK[" + name + "]",
                         "Initial reasoning about scenario " + name + ".\nFINAL ANSWER: wrong_" +
                             name,
                         false});
    }
    for (ErrorTag tag : all_error_tags()) {
        const std::string name = to_string(tag);
        for (const auto& p : expected_correction_map(tag)) {
            rules.push_back({PurposeTag::Kind::reflection, p, "TASK[" + name + "]",
                             "FLAW[" + name + "] the reasoning exhibits the " + name + " problem.",
                             false});
        }
    }
    // Non-mapped perspectives see nothing wrong.
    rules.push_back({PurposeTag::Kind::reflection, std::nullopt, "", "No issues found.", false});
    for (ErrorTag tag : all_error_tags()) {
        const std::string name = to_string(tag);
        rules.push_back({PurposeTag::Kind::synthesis, std::nullopt, "FLAW[" + name + "]",
                         "Revised reasoning addressing " + name + ".\nFINAL ANSWER: right_" + name,
                         false});
    }
    for (ErrorTag tag : all_error_tags()) {
        const std::string name = to_string(tag);
        rules.push_back({PurposeTag::Kind::synthesis, std::nullopt, "TASK[" + name + "]",
                         "Revised reasoning, no changes needed.\nFINAL ANSWER: wrong_" + name,
                         false});
    }
    rules.push_back({PurposeTag::Kind::judge, std::nullopt, "",
                     "VERDICT: CONSISTENT the trace holds together.", false});
    return rules;
}

inline std::shared_ptr<MockBackend> flaw_backend(std::int64_t latency_ms = 5) {
    return std::make_shared<MockBackend>(flaw_rules(), latency_ms);
}

// ---------------------------------------------------------------------------
// Counting suite: n independent arithmetic tasks the scripted model always
// answers correctly. Useful for call-count and efficiency laws.
// ---------------------------------------------------------------------------

inline std::vector<TaskInstance> counting_tasks(int n) {
    std::vector<TaskInstance> tasks;
    for (int i = 0; i < n; ++i) {
        TaskInstance task;
        task.id = "count_" + std::to_string(i);
        task.kind = TaskKind::arithmetic;
        task.query = "CASE[" + std::to_string(i) + "] Compute " + std::to_string(i) + " + " +
                     std::to_string(i) + ".";
        task.gold = GoldLabel{std::to_string(2 * i), {}, MatchMode::numeric};
        tasks.push_back(std::move(task));
    }
    return tasks;
}

inline std::vector<MockRule> counting_rules(int n) {
    std::vector<MockRule> rules;
    for (int i = 0; i < n; ++i) {
        const std::string tag = "CASE[" + std::to_string(i) + "]";
        const std::string sum = std::to_string(2 * i);
        rules.push_back({PurposeTag::Kind::initial, std::nullopt, tag,
                         "Adding the two numbers step by step gives " + sum + ".\nFINAL ANSWER: " +
                             sum,
                         false});
        rules.push_back({PurposeTag::Kind::synthesis, std::nullopt, tag,
                         "Rechecked the arithmetic; the sum stands.\nFINAL ANSWER: " + sum, false});
    }
    rules.push_back({PurposeTag::Kind::reflection, std::nullopt, "",
                     "Reviewed carefully; the reasoning looks sound.", false});
    rules.push_back({PurposeTag::Kind::judge, std::nullopt, "",
                     "VERDICT: CONSISTENT no contradictions found.", false});
    return rules;
}

inline std::shared_ptr<MockBackend> counting_backend(int n, std::int64_t latency_ms = 5) {
    return std::make_shared<MockBackend>(counting_rules(n), latency_ms);
}

// ---------------------------------------------------------------------------
// Config and filesystem helpers
// ---------------------------------------------------------------------------

inline PipelineConfig base_config(Method method, std::vector<PerspectiveId> perspectives,
                                  int parallelism = 1) {
    PipelineConfig config;
    config.method = method;
    config.active_perspectives = std::move(perspectives);
    config.backend.kind = BackendKind::mock;
    config.backend.model = "mock-model";
    config.sampling.temperature = 0.0;
    config.sampling.seed = 7;
    config.parallelism = parallelism;
    config.validate();
    return config;
}

inline std::vector<PerspectiveId> all_perspectives() {
    return {PerspectiveId::v1(), PerspectiveId::v2(), PerspectiveId::v3(), PerspectiveId::v4()};
}

/// Fresh unique directory under the system temp dir.
inline std::filesystem::path make_temp_dir(const std::string& stem) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               (stem + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace prcot::testfx
