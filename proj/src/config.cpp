#include "prcot/config.hpp"

#include <fstream>
#include <sstream>

#include "prcot/serde.hpp"

namespace prcot {

namespace {

BackendSpec parse_backend(const ojson& j, const std::string& where) {
    BackendSpec spec;
    try {
        if (j.contains("kind")) spec.kind = backend_kind_from_string(j.at("kind").get<std::string>());
        spec.model = j.value("model", spec.model);
        spec.endpoint = j.value("endpoint", spec.endpoint);
        spec.timeout_ms = j.value("timeout_ms", spec.timeout_ms);
        spec.max_retries = j.value("max_retries", spec.max_retries);
        spec.retry_base_delay_ms = j.value("retry_base_delay_ms", spec.retry_base_delay_ms);
        spec.script_path = j.value("script", spec.script_path);
        spec.record_path = j.value("record_file", spec.record_path);
        spec.mock_latency_ms = j.value("mock_latency_ms", spec.mock_latency_ms);
        spec.cache = j.value("cache", spec.cache);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(where + ": " + e.what());
    }
    return spec;
}

SamplingParams parse_sampling(const ojson& j, const std::string& where) {
    // Defaults favor reproducibility: temperature 0 and a fixed seed, passed
    // through to backends that support one. "seed": null opts out.
    SamplingParams s;
    s.seed = 0;
    try {
        s.temperature = j.value("temperature", s.temperature);
        s.max_tokens = j.value("max_tokens", s.max_tokens);
        if (j.contains("seed")) {
            if (j.at("seed").is_null()) {
                s.seed = std::nullopt;
            } else {
                s.seed = j.at("seed").get<std::int64_t>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(where + ": " + e.what());
    }
    return s;
}

std::vector<PerspectiveId> default_perspectives(Method method) {
    switch (method) {
        case Method::cot: return {};
        case Method::mcot: return {PerspectiveId::v1()};
        case Method::prcot:
            return {PerspectiveId::v1(), PerspectiveId::v2(), PerspectiveId::v3(),
                    PerspectiveId::v4()};
    }
    return {};
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin) {
    ojson j;
    try {
        j = ojson::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(origin + ": invalid JSON: " + e.what());
    }

    ExperimentConfig cfg;
    cfg.prompts_dir = j.value("prompts_dir", std::string{});

    if (j.contains("method")) {
        cfg.pipeline.method = method_from_string(j.at("method").get<std::string>());
    } else {
        cfg.pipeline.method = Method::prcot;
    }

    if (j.contains("perspectives")) {
        if (!j.at("perspectives").is_array()) {
            throw ValidationError(origin + ": field 'perspectives' must be an array");
        }
        for (const auto& p : j.at("perspectives")) {
            cfg.pipeline.active_perspectives.push_back(PerspectiveId::parse(p.get<std::string>()));
        }
    } else {
        cfg.pipeline.active_perspectives = default_perspectives(cfg.pipeline.method);
    }

    if (j.contains("backend")) {
        cfg.pipeline.backend = parse_backend(j.at("backend"), origin + ": field 'backend'");
    }
    cfg.pipeline.sampling = parse_sampling(j.contains("sampling") ? j.at("sampling") : ojson::object(),
                                           origin + ": field 'sampling'");
    cfg.pipeline.answer_marker = j.value("answer_marker", std::string(kDefaultAnswerMarker));
    cfg.pipeline.parallelism = j.value("parallelism", 1);

    if (j.contains("judge")) {
        const ojson& jj = j.at("judge");
        cfg.judge.enabled = jj.value("enabled", false);
        if (jj.contains("backend") && !jj.at("backend").is_null()) {
            cfg.judge.backend = parse_backend(jj.at("backend"), origin + ": field 'judge.backend'");
        }
        if (jj.contains("sampling")) {
            cfg.judge.sampling = parse_sampling(jj.at("sampling"), origin + ": field 'judge.sampling'");
        } else {
            cfg.judge.sampling = cfg.pipeline.sampling;
        }
    } else {
        cfg.judge.sampling = cfg.pipeline.sampling;
    }

    try {
        cfg.pipeline.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

PromptLibrary ExperimentConfig::load_prompts() const {
    if (prompts_dir.empty()) return PromptLibrary::builtin();
    return PromptLibrary::load_dir(prompts_dir);
}

}  // namespace prcot
