#pragma once

#include <map>
#include <string>
#include <vector>

#include "prcot/core.hpp"

namespace prcot {

/// A versioned prompt body with placeholders from {query}, {cot}, {critiques}
/// and {answer_marker}. Bodies live in external text files so experiments can
/// vary wording without rebuilds; the built-in set ships under prompts/.
struct PromptTemplate {
    std::string name;
    std::string body;
    int version = 1;

    /// Placeholder names appearing in body, in order of first appearance.
    std::vector<std::string> placeholders() const;

    /// Throws ValidationError when body contains a placeholder other than
    /// the four allowed names.
    void validate() const;
};

/// Substitutes {query} and {answer_marker}. The template must contain
/// {query} and may not use {cot} or {critiques}.
std::string render_initial(const PromptTemplate& t, const TaskInstance& task,
                           const std::string& answer_marker);

/// Substitutes {query} and {cot}. Both are required, so every rendered
/// reflection embeds the query and the initial chain-of-thought verbatim.
/// An empty initial cot_text is a render error.
std::string render_reflection(const PromptTemplate& t, const TaskInstance& task,
                              const ReasoningArtifact& initial);

/// Expands {critiques} into one labeled block per critique in canonical
/// perspective order, then substitutes {query}, {cot} and {answer_marker}.
/// Input critiques may arrive in any order; rendering canonicalizes them.
/// An empty critique list is a contract error (the caller must skip
/// synthesis entirely for the plain-cot method).
std::string render_synthesis(const PromptTemplate& t, const TaskInstance& task,
                             const ReasoningArtifact& initial,
                             std::vector<ReflectionCritique> critiques,
                             const std::string& answer_marker);

/// Substitutes {query} and {cot} with the reasoning under judgment.
std::string render_judge(const PromptTemplate& t, const TaskInstance& task,
                         const std::string& cot_text);

/// "[v1 Logical Consistency]\n<text>" blocks in canonical order, separated
/// by blank lines.
std::string format_critique_blocks(std::vector<ReflectionCritique> critiques);

/// Named collection of templates. Lookup names: "initial", "reflect_v1" ..
/// "reflect_v4", "reflect_custom_<name>", "synthesis", "judge".
class PromptLibrary {
public:
    /// Compiled-in defaults, identical to the files shipped under prompts/.
    static PromptLibrary builtin();

    /// Loads every *.txt file in dir (template name = file stem). A
    /// manifest.json beside them pins versions: {"versions": {"initial": 2}}.
    static PromptLibrary load_dir(const std::string& dir);

    bool has(const std::string& name) const;
    const PromptTemplate& get(const std::string& name) const;

    const PromptTemplate& initial_template() const { return get("initial"); }
    const PromptTemplate& synthesis_template() const { return get("synthesis"); }
    const PromptTemplate& judge_template() const { return get("judge"); }
    const PromptTemplate& reflection_template(const PerspectiveId& p) const;

    void put(PromptTemplate t);

    /// Stable digest input covering every template (name, version, body);
    /// prompt edits must change config fingerprints.
    std::string fingerprint_text() const;

    static std::string reflection_template_name(const PerspectiveId& p);

private:
    std::map<std::string, PromptTemplate> templates_;
};

}  // namespace prcot
