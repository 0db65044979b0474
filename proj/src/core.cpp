#include "prcot/core.hpp"

#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

namespace prcot {

// ---------------------------------------------------------------------------
// Enum <-> string
// ---------------------------------------------------------------------------

std::string to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::arithmetic: return "arithmetic";
        case TaskKind::commonsense: return "commonsense";
        case TaskKind::ethics: return "ethics";
        case TaskKind::logic_puzzle: return "logic_puzzle";
        case TaskKind::custom: return "custom";
    }
    return "custom";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "arithmetic") return TaskKind::arithmetic;
    if (s == "commonsense") return TaskKind::commonsense;
    if (s == "ethics") return TaskKind::ethics;
    if (s == "logic_puzzle") return TaskKind::logic_puzzle;
    if (s == "custom") return TaskKind::custom;
    throw ValidationError("unknown task kind: '" + s + "'");
}

std::string to_string(MatchMode mode) {
    switch (mode) {
        case MatchMode::exact: return "exact";
        case MatchMode::normalized: return "normalized";
        case MatchMode::numeric: return "numeric";
    }
    return "normalized";
}

MatchMode match_mode_from_string(const std::string& s) {
    if (s == "exact") return MatchMode::exact;
    if (s == "normalized") return MatchMode::normalized;
    if (s == "numeric") return MatchMode::numeric;
    throw ValidationError("unknown match mode: '" + s + "'");
}

std::string to_string(ArtifactStage stage) {
    return stage == ArtifactStage::initial ? "initial" : "refined";
}

ArtifactStage artifact_stage_from_string(const std::string& s) {
    if (s == "initial") return ArtifactStage::initial;
    if (s == "refined") return ArtifactStage::refined;
    throw ValidationError("unknown artifact stage: '" + s + "'");
}

std::string to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(const std::string& s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw ValidationError("unknown message role: '" + s + "'");
}

std::string to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::remote: return "remote";
        case BackendKind::mock: return "mock";
        case BackendKind::replay: return "replay";
    }
    return "mock";
}

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "remote") return BackendKind::remote;
    if (s == "mock") return BackendKind::mock;
    if (s == "replay") return BackendKind::replay;
    throw ValidationError("unknown backend kind: '" + s + "'");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::cot: return "cot";
        case Method::mcot: return "mcot";
        case Method::prcot: return "prcot";
    }
    return "cot";
}

Method method_from_string(const std::string& s) {
    if (s == "cot") return Method::cot;
    if (s == "mcot") return Method::mcot;
    if (s == "prcot") return Method::prcot;
    throw ValidationError("unknown method: '" + s + "' (expected cot, mcot or prcot)");
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

bool parses_as_decimal(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    return ec == std::errc{} && ptr == end;
}

}  // namespace

void GoldLabel::validate() const {
    if (canonical_answer.empty()) {
        throw ValidationError("gold label: canonical_answer is empty");
    }
    if (match_mode == MatchMode::numeric && !parses_as_decimal(canonical_answer)) {
        throw ValidationError("gold label: numeric match mode but canonical_answer '" +
                              canonical_answer + "' is not a decimal number");
    }
}

void TaskInstance::validate() const {
    if (id.empty()) {
        throw ValidationError("task: id is empty");
    }
    if (trim(query).empty()) {
        throw ValidationError("task '" + id + "': query is blank");
    }
    if (gold) gold->validate();
}

// ---------------------------------------------------------------------------
// PerspectiveId
// ---------------------------------------------------------------------------

PerspectiveId PerspectiveId::custom(std::string name) {
    if (name.empty()) {
        throw ValidationError("custom perspective name is empty");
    }
    return {Tag::custom, std::move(name)};
}

std::string PerspectiveId::str() const {
    switch (tag) {
        case Tag::v1: return "v1";
        case Tag::v2: return "v2";
        case Tag::v3: return "v3";
        case Tag::v4: return "v4";
        case Tag::custom: return "custom:" + custom_name;
    }
    return "v1";
}

PerspectiveId PerspectiveId::parse(const std::string& s) {
    if (s == "v1") return v1();
    if (s == "v2") return v2();
    if (s == "v3") return v3();
    if (s == "v4") return v4();
    if (s.rfind("custom:", 0) == 0) return custom(s.substr(7));
    throw ValidationError("unknown perspective id: '" + s + "'");
}

std::string PerspectiveId::display_name() const {
    switch (tag) {
        case Tag::v1: return "Logical Consistency";
        case Tag::v2: return "Information Completeness";
        case Tag::v3: return "Ethical Consideration";
        case Tag::v4: return "Alternative Solutions";
        case Tag::custom: return custom_name;
    }
    return custom_name;
}

bool PerspectiveId::operator<(const PerspectiveId& other) const {
    if (tag != other.tag) {
        return static_cast<int>(tag) < static_cast<int>(other.tag);
    }
    return custom_name < other.custom_name;
}

std::vector<PerspectiveId> canonical_perspective_order(std::vector<PerspectiveId> ids) {
    std::set<PerspectiveId> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw ValidationError("duplicate perspective id: " + id.str());
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// ---------------------------------------------------------------------------
// PurposeTag
// ---------------------------------------------------------------------------

std::string PurposeTag::str() const {
    switch (kind) {
        case Kind::initial: return "initial";
        case Kind::reflection: return "reflection:" + (perspective ? perspective->str() : "");
        case Kind::synthesis: return "synthesis";
        case Kind::judge: return "judge";
    }
    return "initial";
}

PurposeTag PurposeTag::parse(const std::string& s) {
    if (s == "initial") return initial();
    if (s == "synthesis") return synthesis();
    if (s == "judge") return judge();
    if (s.rfind("reflection:", 0) == 0) {
        return reflection(PerspectiveId::parse(s.substr(11)));
    }
    throw ValidationError("unknown purpose tag: '" + s + "'");
}

// ---------------------------------------------------------------------------
// PipelineConfig
// ---------------------------------------------------------------------------

void PipelineConfig::validate() {
    active_perspectives = canonical_perspective_order(std::move(active_perspectives));
    switch (method) {
        case Method::cot:
            if (!active_perspectives.empty()) {
                throw ValidationError("method cot requires an empty perspective set");
            }
            break;
        case Method::mcot:
            if (active_perspectives.size() != 1) {
                throw ValidationError("method mcot requires exactly one perspective, got " +
                                      std::to_string(active_perspectives.size()));
            }
            break;
        case Method::prcot:
            break;  // any count, including the degenerate empty set
    }
    if (sampling.temperature < 0.0) {
        throw ValidationError("sampling temperature must be >= 0");
    }
    if (parallelism < 1) {
        throw ValidationError("parallelism must be >= 1");
    }
    if (answer_marker.empty()) {
        throw ValidationError("answer marker must be nonempty");
    }
}

// ---------------------------------------------------------------------------
// Hashing and small string helpers
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed) {
    std::uint64_t hash = seed;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string fnv1a64_hex(const std::string& data) {
    std::uint64_t h = fnv1a64(data);
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::int64_t whitespace_token_count(const std::string& s) {
    std::int64_t count = 0;
    bool in_token = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

}  // namespace prcot
