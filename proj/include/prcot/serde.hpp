#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prcot/core.hpp"

namespace prcot {

/// Ordered JSON keeps field order stable, so serialized transcripts and
/// replay records are byte-reproducible across runs.
using ojson = nlohmann::ordered_json;

ojson usage_to_json(const Usage& u);
Usage usage_from_json(const ojson& j);

ojson message_to_json(const ChatMessage& m);
ChatMessage message_from_json(const ojson& j);

ojson sampling_to_json(const SamplingParams& s);
SamplingParams sampling_from_json(const ojson& j);

ojson artifact_to_json(const ReasoningArtifact& a);
ReasoningArtifact artifact_from_json(const ojson& j);

ojson critique_to_json(const ReflectionCritique& c);
ReflectionCritique critique_from_json(const ojson& j);

ojson call_record_to_json(const CallRecord& c);
CallRecord call_record_from_json(const ojson& j);

/// Full transcript record. created_at_ms lives in a separate "meta" object
/// so determinism checks can drop timestamps without touching payload bytes.
ojson transcript_to_json(const RunTranscript& t);
RunTranscript transcript_from_json(const ojson& j);

/// Transcript archive: one JSON record per line, UTF-8.
void write_transcript_archive(const std::string& path, const std::vector<RunTranscript>& transcripts);
std::vector<RunTranscript> read_transcript_archive(const std::string& path);

/// Archive bytes with every record's "meta" object removed; used to compare
/// reruns for byte identity modulo timestamps.
std::string archive_payload_bytes(const std::string& path);

}  // namespace prcot
