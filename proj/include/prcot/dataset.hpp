#pragma once

#include <map>
#include <string>
#include <vector>

#include "prcot/core.hpp"

namespace prcot {

/// Dataset file format: one task per line, UTF-8 JSON:
///   {"id": "...", "kind": "arithmetic", "query": "...",
///    "gold": {"canonical_answer": "...", "aliases": [...], "match_mode": "numeric"}}
/// gold is optional. Malformed lines raise ValidationError naming the line
/// and field; duplicate ids raise ValidationError naming the id.
std::vector<TaskInstance> load_dataset(const std::string& path);

std::vector<TaskInstance> parse_dataset(const std::string& jsonl_text, const std::string& origin);

void write_dataset(const std::string& path, const std::vector<TaskInstance>& tasks);

/// Index by task id for joining transcripts against gold labels.
std::map<std::string, TaskInstance> index_by_id(const std::vector<TaskInstance>& tasks);

}  // namespace prcot
