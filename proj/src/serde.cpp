#include "prcot/serde.hpp"

#include <fstream>
#include <sstream>

namespace prcot {

ojson usage_to_json(const Usage& u) {
    return ojson{{"prompt_tokens", u.prompt_tokens},
                 {"completion_tokens", u.completion_tokens},
                 {"latency_ms", u.latency_ms}};
}

Usage usage_from_json(const ojson& j) {
    Usage u;
    u.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
    u.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
    u.latency_ms = j.at("latency_ms").get<std::int64_t>();
    return u;
}

ojson message_to_json(const ChatMessage& m) {
    return ojson{{"role", to_string(m.role)}, {"content", m.content}};
}

ChatMessage message_from_json(const ojson& j) {
    return ChatMessage{role_from_string(j.at("role").get<std::string>()),
                       j.at("content").get<std::string>()};
}

ojson sampling_to_json(const SamplingParams& s) {
    ojson j{{"temperature", s.temperature}, {"max_tokens", s.max_tokens}};
    if (s.seed) j["seed"] = *s.seed;
    return j;
}

SamplingParams sampling_from_json(const ojson& j) {
    SamplingParams s;
    s.temperature = j.at("temperature").get<double>();
    s.max_tokens = j.at("max_tokens").get<std::int64_t>();
    if (j.contains("seed") && !j.at("seed").is_null()) {
        s.seed = j.at("seed").get<std::int64_t>();
    }
    return s;
}

ojson artifact_to_json(const ReasoningArtifact& a) {
    ojson j{{"cot_text", a.cot_text}};
    if (a.answer) {
        j["answer"] = *a.answer;
    } else {
        j["answer"] = nullptr;
    }
    j["stage"] = to_string(a.stage);
    return j;
}

ReasoningArtifact artifact_from_json(const ojson& j) {
    ReasoningArtifact a;
    a.cot_text = j.at("cot_text").get<std::string>();
    if (!j.at("answer").is_null()) a.answer = j.at("answer").get<std::string>();
    a.stage = artifact_stage_from_string(j.at("stage").get<std::string>());
    return a;
}

ojson critique_to_json(const ReflectionCritique& c) {
    return ojson{{"perspective", c.perspective.str()},
                 {"text", c.text},
                 {"usage", usage_to_json(c.usage)}};
}

ReflectionCritique critique_from_json(const ojson& j) {
    ReflectionCritique c;
    c.perspective = PerspectiveId::parse(j.at("perspective").get<std::string>());
    c.text = j.at("text").get<std::string>();
    c.usage = usage_from_json(j.at("usage"));
    return c;
}

ojson call_record_to_json(const CallRecord& c) {
    ojson messages = ojson::array();
    for (const auto& m : c.messages) messages.push_back(message_to_json(m));
    return ojson{{"purpose", c.purpose.str()},
                 {"messages", std::move(messages)},
                 {"completion", c.completion},
                 {"usage", usage_to_json(c.usage)}};
}

CallRecord call_record_from_json(const ojson& j) {
    CallRecord c;
    c.purpose = PurposeTag::parse(j.at("purpose").get<std::string>());
    for (const auto& m : j.at("messages")) c.messages.push_back(message_from_json(m));
    c.completion = j.at("completion").get<std::string>();
    c.usage = usage_from_json(j.at("usage"));
    return c;
}

ojson transcript_to_json(const RunTranscript& t) {
    ojson critiques = ojson::array();
    for (const auto& c : t.critiques) critiques.push_back(critique_to_json(c));
    ojson calls = ojson::array();
    for (const auto& c : t.calls) calls.push_back(call_record_to_json(c));

    ojson j{{"task_id", t.task_id},
            {"method", to_string(t.method)},
            {"config_fingerprint", t.config_fingerprint},
            {"initial", artifact_to_json(t.initial)},
            {"critiques", std::move(critiques)},
            {"final", artifact_to_json(t.final)},
            {"answer_fallback", t.answer_fallback},
            {"calls", std::move(calls)},
            {"wall_time_ms", t.wall_time_ms}};
    if (t.failure) {
        j["failure"] = ojson{{"stage", t.failure->stage}, {"message", t.failure->message}};
    } else {
        j["failure"] = nullptr;
    }
    j["meta"] = ojson{{"created_at_ms", t.created_at_ms}};
    return j;
}

RunTranscript transcript_from_json(const ojson& j) {
    RunTranscript t;
    t.task_id = j.at("task_id").get<std::string>();
    t.method = method_from_string(j.at("method").get<std::string>());
    t.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    t.initial = artifact_from_json(j.at("initial"));
    for (const auto& c : j.at("critiques")) t.critiques.push_back(critique_from_json(c));
    t.final = artifact_from_json(j.at("final"));
    t.answer_fallback = j.at("answer_fallback").get<bool>();
    for (const auto& c : j.at("calls")) t.calls.push_back(call_record_from_json(c));
    t.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
    if (!j.at("failure").is_null()) {
        t.failure = FailureInfo{j.at("failure").at("stage").get<std::string>(),
                                j.at("failure").at("message").get<std::string>()};
    }
    if (j.contains("meta")) {
        t.created_at_ms = j.at("meta").at("created_at_ms").get<std::int64_t>();
    }
    return t;
}

void write_transcript_archive(const std::string& path,
                              const std::vector<RunTranscript>& transcripts) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open transcript archive for writing: " + path);
    for (const auto& t : transcripts) {
        out << transcript_to_json(t).dump() << '\n';
    }
    if (!out) throw ValidationError("failed writing transcript archive: " + path);
}

std::vector<RunTranscript> read_transcript_archive(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open transcript archive: " + path);
    std::vector<RunTranscript> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("transcript archive " + path + " line " +
                                  std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(transcript_from_json(j));
    }
    return out;
}

std::string archive_payload_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open transcript archive: " + path);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ojson j = ojson::parse(line);
        j.erase("meta");
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace prcot
