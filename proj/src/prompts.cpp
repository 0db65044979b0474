#include "prcot/prompts.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "prcot/serde.hpp"

namespace prcot {

namespace {

const std::set<std::string> kAllowedPlaceholders = {"query", "cot", "critiques", "answer_marker"};

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

}  // namespace

std::vector<std::string> PromptTemplate::placeholders() const {
    std::vector<std::string> found;
    std::set<std::string> seen;
    for (size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '{') continue;
        size_t j = i + 1;
        while (j < body.size() && is_placeholder_char(body[j])) ++j;
        if (j > i + 1 && j < body.size() && body[j] == '}') {
            std::string name = body.substr(i + 1, j - i - 1);
            if (seen.insert(name).second) found.push_back(std::move(name));
            i = j;
        }
    }
    return found;
}

void PromptTemplate::validate() const {
    for (const auto& p : placeholders()) {
        if (!kAllowedPlaceholders.count(p)) {
            throw ValidationError("template '" + name + "': unknown placeholder {" + p + "}");
        }
    }
}

namespace {

void check_stage_placeholders(const PromptTemplate& t, const std::set<std::string>& allowed,
                              const std::set<std::string>& required, const char* stage) {
    t.validate();
    std::set<std::string> present;
    for (const auto& p : t.placeholders()) {
        if (!allowed.count(p)) {
            throw RenderError("template '" + t.name + "': placeholder {" + p +
                              "} is not allowed in a " + stage + " prompt");
        }
        present.insert(p);
    }
    for (const auto& r : required) {
        if (!present.count(r)) {
            throw RenderError("template '" + t.name + "': " + stage +
                              " prompt requires placeholder {" + r + "}");
        }
    }
}

}  // namespace

std::string render_initial(const PromptTemplate& t, const TaskInstance& task,
                           const std::string& answer_marker) {
    check_stage_placeholders(t, {"query", "answer_marker"}, {"query"}, "initial");
    std::string out = replace_all(t.body, "{query}", task.query);
    return replace_all(std::move(out), "{answer_marker}", answer_marker);
}

std::string render_reflection(const PromptTemplate& t, const TaskInstance& task,
                              const ReasoningArtifact& initial) {
    check_stage_placeholders(t, {"query", "cot"}, {"query", "cot"}, "reflection");
    if (trim(initial.cot_text).empty()) {
        throw RenderError("template '" + t.name + "': cannot reflect on an empty chain-of-thought");
    }
    std::string out = replace_all(t.body, "{query}", task.query);
    return replace_all(std::move(out), "{cot}", initial.cot_text);
}

std::string format_critique_blocks(std::vector<ReflectionCritique> critiques) {
    std::vector<PerspectiveId> ids;
    ids.reserve(critiques.size());
    for (const auto& c : critiques) ids.push_back(c.perspective);
    canonical_perspective_order(ids);  // rejects duplicates
    std::sort(critiques.begin(), critiques.end(),
              [](const ReflectionCritique& a, const ReflectionCritique& b) {
                  return a.perspective < b.perspective;
              });

    std::ostringstream out;
    bool first = true;
    for (const auto& c : critiques) {
        if (!first) out << "\n\n";
        first = false;
        out << '[' << c.perspective.str() << ' ' << c.perspective.display_name() << "]\n"
            << c.text;
    }
    return out.str();
}

std::string render_synthesis(const PromptTemplate& t, const TaskInstance& task,
                             const ReasoningArtifact& initial,
                             std::vector<ReflectionCritique> critiques,
                             const std::string& answer_marker) {
    if (critiques.empty()) {
        throw ContractError("synthesis requires at least one critique; skip synthesis for cot");
    }
    check_stage_placeholders(t, {"query", "cot", "critiques", "answer_marker"},
                             {"query", "cot", "critiques", "answer_marker"}, "synthesis");
    std::string out = replace_all(t.body, "{critiques}", format_critique_blocks(std::move(critiques)));
    out = replace_all(std::move(out), "{query}", task.query);
    out = replace_all(std::move(out), "{cot}", initial.cot_text);
    return replace_all(std::move(out), "{answer_marker}", answer_marker);
}

std::string render_judge(const PromptTemplate& t, const TaskInstance& task,
                         const std::string& cot_text) {
    check_stage_placeholders(t, {"query", "cot"}, {"cot"}, "judge");
    if (trim(cot_text).empty()) {
        throw RenderError("template '" + t.name + "': cannot judge an empty chain-of-thought");
    }
    std::string out = replace_all(t.body, "{query}", task.query);
    return replace_all(std::move(out), "{cot}", cot_text);
}

// ---------------------------------------------------------------------------
// Built-in templates
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kInitialBody =
    R"(You are given the following task.

Task: {query}

Think step-by-step and write out your full reasoning before answering.
When you are done, give your final answer on its own line in the form:
{answer_marker} <your answer>
)";

constexpr const char* kReflectV1Body =
    R"(A task and a first reasoning attempt are given below.

Task: {query}

Reasoning under review:
{cot}

Examine the internal coherence, rigor, and non-contradiction of the reasoning steps.
Identify any leaps in logic, unsupported assertions, circular reasoning, or contradictory statements.
Check that each step follows from the preceding steps and the initial premises.
Reply with a concise critique listing every issue you find, or state that the reasoning is sound.
)";

constexpr const char* kReflectV2Body =
    R"(A task and a first reasoning attempt are given below.

Task: {query}

Reasoning under review:
{cot}

Reflect on whether critical information, relevant background knowledge, specific assumptions, or explicit constraints were overlooked, misinterpreted, or improperly used.
Check that every piece of data needed for the task was incorporated and correctly weighted, and that stated facts are accurate.
Reply with a concise critique listing every issue you find, or state that the reasoning is sound.
)";

constexpr const char* kReflectV3Body =
    R"(A task and a first reasoning attempt are given below.

Task: {query}

Reasoning under review:
{cot}

Scrutinize the reasoning for inappropriate biases, fairness issues, or neglected ethical dimensions.
Consider the broader implications of the conclusion and whether the reasoning adheres to fairness, equity, and responsibility.
Reply with a concise critique listing every issue you find, or state that the reasoning is sound.
)";

constexpr const char* kReflectV4Body =
    R"(A task and a first reasoning attempt are given below.

Task: {query}

Reasoning under review:
{cot}

Consider whether other plausible reasoning paths, alternative methodologies, or different viable solutions exist that were ignored or prematurely discarded.
Explore what-if scenarios and assess whether the current solution is truly optimal or merely one of several possibilities.
Reply with a concise critique listing every issue you find, or state that the reasoning is sound.
)";

constexpr const char* kSynthesisBody =
    R"(A task, a first reasoning attempt, and a set of critiques of that attempt are given below.

Task: {query}

Initial reasoning:
{cot}

Critiques:
{critiques}

Revise the initial reasoning into a single improved solution. As you revise:
1. Identify overlapping or reinforcing critiques and prioritize the significant issues they raise.
2. Prioritize critical flaws over minor suggestions.
3. Incorporate any new information or considerations the critiques surfaced.
4. Re-evaluate the initial assumptions and constraints in light of the critiques.
5. Construct a new, more robust line of reasoning that addresses every identified shortcoming.

Write out the revised reasoning in full, then give your final answer on its own line in the form:
{answer_marker} <your answer>
)";

constexpr const char* kJudgeBody =
    R"(A task and a reasoning trace are given below.

Task: {query}

Reasoning:
{cot}

Decide whether the reasoning maintains coherence and avoids contradictions from start to finish.
Reply with exactly one verdict line, either:
VERDICT: CONSISTENT
or
VERDICT: INCONSISTENT
followed by a brief rationale.
)";

}  // namespace

PromptLibrary PromptLibrary::builtin() {
    PromptLibrary lib;
    lib.put({"initial", kInitialBody, 1});
    lib.put({"reflect_v1", kReflectV1Body, 1});
    lib.put({"reflect_v2", kReflectV2Body, 1});
    lib.put({"reflect_v3", kReflectV3Body, 1});
    lib.put({"reflect_v4", kReflectV4Body, 1});
    lib.put({"synthesis", kSynthesisBody, 1});
    lib.put({"judge", kJudgeBody, 1});
    return lib;
}

PromptLibrary PromptLibrary::load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw ValidationError("prompt directory not found: " + dir);
    }

    std::map<std::string, int> versions;
    const fs::path manifest = fs::path(dir) / "manifest.json";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        ojson j;
        try {
            j = ojson::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("prompt manifest " + manifest.string() + ": " + e.what());
        }
        if (j.contains("versions")) {
            for (const auto& [name, version] : j.at("versions").items()) {
                versions[name] = version.get<int>();
            }
        }
    }

    PromptLibrary lib;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        std::ostringstream body;
        body << in.rdbuf();
        const std::string name = file.stem().string();
        auto it = versions.find(name);
        PromptTemplate t{name, body.str(), it == versions.end() ? 1 : it->second};
        t.validate();
        lib.put(std::move(t));
    }
    if (lib.templates_.empty()) {
        throw ValidationError("prompt directory has no *.txt templates: " + dir);
    }
    return lib;
}

bool PromptLibrary::has(const std::string& name) const { return templates_.count(name) > 0; }

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw ValidationError("unknown prompt template: '" + name + "'");
    }
    return it->second;
}

std::string PromptLibrary::reflection_template_name(const PerspectiveId& p) {
    if (p.is_builtin()) return "reflect_" + p.str();
    return "reflect_custom_" + p.custom_name;
}

const PromptTemplate& PromptLibrary::reflection_template(const PerspectiveId& p) const {
    return get(reflection_template_name(p));
}

void PromptLibrary::put(PromptTemplate t) {
    t.validate();
    templates_[t.name] = std::move(t);
}

std::string PromptLibrary::fingerprint_text() const {
    std::string out;
    for (const auto& [name, t] : templates_) {
        out += name;
        out += '\x1e';
        out += std::to_string(t.version);
        out += '\x1e';
        out += t.body;
        out += '\x1f';
    }
    return out;
}

}  // namespace prcot
