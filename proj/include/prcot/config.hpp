#pragma once

#include <optional>
#include <string>

#include "prcot/core.hpp"
#include "prcot/prompts.hpp"

namespace prcot {

struct JudgeSettings {
    bool enabled = false;
    std::optional<BackendSpec> backend;  // absent: judge shares the pipeline backend spec
    SamplingParams sampling;
};

/// One experiment = one config file. Structured JSON, nested sections for
/// backend, sampling and judge. Credentials never appear here; the remote
/// backend reads its API key from the environment.
struct ExperimentConfig {
    std::string prompts_dir;  // empty: use the compiled-in templates
    PipelineConfig pipeline;
    JudgeSettings judge;

    /// Directory templates when prompts_dir is set, built-ins otherwise.
    PromptLibrary load_prompts() const;
};

/// Parses a config file. Validation errors name the offending field. When
/// "perspectives" is omitted, the method's default set applies: empty for
/// cot, {v1} for mcot, {v1,v2,v3,v4} for prcot.
ExperimentConfig load_config(const std::string& path);

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin);

}  // namespace prcot
