#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prcot/backend.hpp"
#include "prcot/core.hpp"
#include "prcot/efficiency.hpp"
#include "prcot/prompts.hpp"

namespace prcot {

// ---------------------------------------------------------------------------
// Answer matching
// ---------------------------------------------------------------------------

/// Case-fold, trim, collapse internal whitespace, strip trailing punctuation.
std::string normalize_answer(const std::string& s);

/// True when the extracted answer matches the gold label under its match
/// mode. Unparseable text under numeric mode is a mismatch, not an error.
bool match_answer(const std::string& extracted, const GoldLabel& gold);

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

struct ScoreCounts {
    int n_total = 0;           // transcripts scored against a gold label
    int n_initial_wrong = 0;
    int n_corrected = 0;       // initial wrong AND final correct
    int n_regressed = 0;       // initial correct AND final wrong
    int n_initial_correct = 0;
    int n_final_correct = 0;
    int n_judged = 0;
    int n_judged_consistent = 0;
    int n_failed_runs = 0;
    int n_scoring_warnings = 0;  // transcripts excluded (no gold, unknown id)
    int n_judge_warnings = 0;    // judge verdicts excluded (unparseable)
};

/// Correctness of one transcript against its task's gold label. Absent
/// answers count as incorrect. Throws ScoringError when the task has no gold.
struct ScoreOutcome {
    std::string task_id;
    TaskKind kind = TaskKind::custom;
    bool initial_correct = false;
    bool final_correct = false;
    bool run_failed = false;
};

ScoreOutcome score_transcript(const RunTranscript& t, const TaskInstance& task);

struct EcrResult {
    std::optional<double> ecr;  // absent when nothing was initially wrong
    ScoreCounts counts;
};

/// ECR = corrected / initially-wrong over all scoreable transcripts.
/// Transcripts without a matching gold-labeled task are excluded and counted
/// as warnings. A zero denominator yields an undefined (absent) rate, which
/// is distinct from zero.
EcrResult compute_ecr(const std::vector<RunTranscript>& transcripts,
                      const std::map<std::string, TaskInstance>& tasks);

// ---------------------------------------------------------------------------
// Logical-consistency judge
// ---------------------------------------------------------------------------

struct JudgeVerdict {
    bool consistent = false;
    std::string rationale;
    Usage usage;  // summed over the judge call(s) for this item
};

struct JudgeConfig {
    BackendPtr backend;
    std::string model;
    SamplingParams sampling;
    PromptTemplate prompt;
};

/// First parseable "VERDICT: CONSISTENT" / "VERDICT: INCONSISTENT" token in
/// the reply, tolerant of leading and trailing noise. Returns the verdict
/// and the rationale text following the token.
std::optional<std::pair<bool, std::string>> parse_verdict(const std::string& reply);

/// Judges the final chain-of-thought under a strict two-token protocol. An
/// unparseable reply triggers exactly one re-ask carrying a format reminder;
/// a second failure raises JudgeParseError. Judge calls are tagged judge and
/// appended to *calls_out when provided.
JudgeVerdict judge_consistency(const TaskInstance& task, const RunTranscript& transcript,
                               const JudgeConfig& judge,
                               std::vector<CallRecord>* calls_out = nullptr);

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

enum class ErrorTag {
    logical_leap,
    incomplete_info,
    implicit_bias,
    narrow_scope,
    factual_inaccuracy,
    contradictory_steps,
    ambiguity_misinterpretation,
    premature_conclusion,
};

std::string to_string(ErrorTag tag);
ErrorTag error_tag_from_string(const std::string& s);
const std::vector<ErrorTag>& all_error_tags();

/// Which reflection perspective(s) are expected to catch each flaw kind.
std::vector<PerspectiveId> expected_correction_map(ErrorTag tag);

/// Heuristic taxonomy classifier: matches critique text against per-tag
/// phrase lists (keyword search, no model call). Returns every matching tag
/// in taxonomy order; empty when nothing matches. Negated mentions are not
/// distinguished, so treat results as a triage aid, not ground truth.
std::vector<ErrorTag> classify_error(const std::string& critique_text);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Published results for the same configuration, attached to report rows as
/// annotations. Never asserted: they depend on proprietary models and
/// undisclosed datasets.
struct ReferenceAnnotation {
    std::optional<double> lc;   // fraction in [0,1]
    std::optional<double> ecr;  // fraction in [0,1]
    std::string note;
};

struct MetricsRow {
    std::string label;      // configuration label, e.g. "PR-CoT w/o v3"
    Method method = Method::cot;
    std::string perspectives;  // comma-joined active set
    std::string task_kind;     // one kind per row
    ScoreCounts counts;
    std::optional<double> logical_consistency;
    std::optional<double> error_correction_rate;
    double accuracy_initial = 0.0;
    double accuracy_final = 0.0;
    std::optional<ReferenceAnnotation> reference;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;
    std::vector<MethodComparisonRow> efficiency;
    std::vector<std::string> notes;
};

/// Scores one batch of transcripts into per-task-kind rows (kinds in fixed
/// report order). Judge verdicts are computed when a judge config is given;
/// their usage is appended to *judge_ledger (tagged judge) when provided,
/// with task keys prefixed by ledger_task_prefix so multi-configuration
/// experiments keep per-execution grouping.
std::vector<MetricsRow> score_transcripts(const std::vector<RunTranscript>& transcripts,
                                          const std::map<std::string, TaskInstance>& tasks,
                                          const std::string& label, Method method,
                                          const std::string& perspectives,
                                          const JudgeConfig* judge = nullptr,
                                          UsageLedger* judge_ledger = nullptr,
                                          const std::string& ledger_task_prefix = "");

/// Published single-method results keyed by (method, task kind).
std::optional<ReferenceAnnotation> reference_for(Method method, TaskKind kind);

// ---------------------------------------------------------------------------
// Experiment drivers
// ---------------------------------------------------------------------------

/// Context shared by the ablation and incremental drivers.
struct ExperimentContext {
    PipelineConfig base_config;  // perspectives field = the full base set
    PromptLibrary prompts;
    BackendPtr backend;                 // shared across configurations
    const JudgeConfig* judge = nullptr;  // optional
    std::function<void(const std::string&)> progress;  // optional, one line per config
};

struct ExperimentResult {
    MetricsReport report;
    UsageLedger ledger;
    std::map<std::string, std::vector<RunTranscript>> transcripts_by_label;
};

/// Leave-one-out study: full set, each single-perspective drop, and the two
/// baselines. Row order: CoT baseline, MCoT, full set, then drops in
/// canonical perspective order.
ExperimentResult run_ablation(const std::vector<TaskInstance>& tasks, ExperimentContext ctx);

/// Growing-prefix study over the fixed addition order v1, v2, v4, v3.
/// prefix 0 is the cot baseline and prefix 1 is mcot with v1.
ExperimentResult run_incremental(const std::vector<TaskInstance>& tasks, ExperimentContext ctx);

/// Human-readable rendering: one table of metric rows plus the efficiency
/// comparison, kinds and configurations in report order.
std::string render_report_text(const MetricsReport& report);

/// Machine-readable rendering (ordered JSON).
std::string render_report_json(const MetricsReport& report);

}  // namespace prcot
