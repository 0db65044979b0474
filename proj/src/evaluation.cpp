#include "prcot/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "prcot/dataset.hpp"
#include "prcot/pipeline.hpp"
#include "prcot/serde.hpp"

namespace prcot {

// ---------------------------------------------------------------------------
// Answer matching
// ---------------------------------------------------------------------------

std::string normalize_answer(const std::string& s) {
    std::string folded;
    folded.reserve(s.size());
    for (unsigned char c : s) {
        folded.push_back(static_cast<char>(std::tolower(c)));
    }
    std::string trimmed = trim(folded);

    std::string collapsed;
    collapsed.reserve(trimmed.size());
    bool in_space = false;
    for (unsigned char c : trimmed) {
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !collapsed.empty()) collapsed.push_back(' ');
        in_space = false;
        collapsed.push_back(static_cast<char>(c));
    }

    static const std::string kTrailingPunct = ".,;:!?";
    while (!collapsed.empty() && kTrailingPunct.find(collapsed.back()) != std::string::npos) {
        collapsed.pop_back();
    }
    return collapsed;
}

namespace {

std::optional<double> parse_decimal(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
    return value;
}

constexpr double kNumericTolerance = 1e-9;

}  // namespace

bool match_answer(const std::string& extracted, const GoldLabel& gold) {
    gold.validate();
    switch (gold.match_mode) {
        case MatchMode::exact: {
            if (extracted == gold.canonical_answer) return true;
            for (const auto& alias : gold.acceptable_aliases) {
                if (extracted == alias) return true;
            }
            return false;
        }
        case MatchMode::normalized: {
            const std::string lhs = normalize_answer(extracted);
            if (lhs == normalize_answer(gold.canonical_answer)) return true;
            for (const auto& alias : gold.acceptable_aliases) {
                if (lhs == normalize_answer(alias)) return true;
            }
            return false;
        }
        case MatchMode::numeric: {
            const auto value = parse_decimal(extracted);
            if (!value) return false;
            const auto canonical = parse_decimal(gold.canonical_answer);
            if (canonical && std::fabs(*value - *canonical) <= kNumericTolerance) return true;
            for (const auto& alias : gold.acceptable_aliases) {
                const auto a = parse_decimal(alias);
                if (a && std::fabs(*value - *a) <= kNumericTolerance) return true;
            }
            return false;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

ScoreOutcome score_transcript(const RunTranscript& t, const TaskInstance& task) {
    if (!task.gold) {
        throw ScoringError("task '" + task.id + "' has no gold label");
    }
    ScoreOutcome outcome;
    outcome.task_id = t.task_id;
    outcome.kind = task.kind;
    outcome.run_failed = !t.succeeded();
    const auto& gold = *task.gold;
    outcome.initial_correct = t.initial.answer && match_answer(*t.initial.answer, gold);
    const auto final_answer = t.effective_final_answer();
    outcome.final_correct = final_answer && match_answer(*final_answer, gold);
    return outcome;
}

namespace {

void accumulate(ScoreCounts& counts, const ScoreOutcome& o) {
    counts.n_total += 1;
    if (o.run_failed) counts.n_failed_runs += 1;
    if (o.initial_correct) {
        counts.n_initial_correct += 1;
        if (!o.final_correct) counts.n_regressed += 1;
    } else {
        counts.n_initial_wrong += 1;
        if (o.final_correct) counts.n_corrected += 1;
    }
    if (o.final_correct) counts.n_final_correct += 1;
}

}  // namespace

EcrResult compute_ecr(const std::vector<RunTranscript>& transcripts,
                      const std::map<std::string, TaskInstance>& tasks) {
    EcrResult result;
    for (const auto& t : transcripts) {
        auto it = tasks.find(t.task_id);
        if (it == tasks.end() || !it->second.gold) {
            result.counts.n_scoring_warnings += 1;
            continue;
        }
        accumulate(result.counts, score_transcript(t, it->second));
    }
    if (result.counts.n_initial_wrong > 0) {
        result.ecr = static_cast<double>(result.counts.n_corrected) /
                     static_cast<double>(result.counts.n_initial_wrong);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Judge
// ---------------------------------------------------------------------------

std::optional<std::pair<bool, std::string>> parse_verdict(const std::string& reply) {
    static const std::string kMarker = "VERDICT:";
    size_t pos = 0;
    while ((pos = reply.find(kMarker, pos)) != std::string::npos) {
        size_t i = pos + kMarker.size();
        while (i < reply.size() && (reply[i] == ' ' || reply[i] == '\t')) ++i;
        size_t end = i;
        while (end < reply.size() && reply[end] >= 'A' && reply[end] <= 'Z') ++end;
        const bool word_boundary =
            end == reply.size() || !std::isalpha(static_cast<unsigned char>(reply[end]));
        if (word_boundary) {
            const std::string token = reply.substr(i, end - i);
            if (token == "CONSISTENT") return std::make_pair(true, trim(reply.substr(end)));
            if (token == "INCONSISTENT") return std::make_pair(false, trim(reply.substr(end)));
        }
        pos += kMarker.size();
    }
    return std::nullopt;
}

JudgeVerdict judge_consistency(const TaskInstance& task, const RunTranscript& transcript,
                               const JudgeConfig& judge, std::vector<CallRecord>* calls_out) {
    if (!judge.backend) throw ValidationError("judge backend not configured");

    CompletionRequest req;
    req.model = judge.model;
    req.sampling = judge.sampling;
    req.purpose = PurposeTag::judge();
    req.messages.push_back({Role::user, render_judge(judge.prompt, task, transcript.final.cot_text)});

    Usage total;
    auto ask = [&](const CompletionRequest& r) {
        CompletionResult res = judge.backend->complete(r);
        total += res.usage;
        if (calls_out) {
            calls_out->push_back(CallRecord{r.purpose, r.messages, res.text, res.usage});
        }
        return res;
    };

    CompletionResult first = ask(req);
    if (auto parsed = parse_verdict(first.text)) {
        return JudgeVerdict{parsed->first, parsed->second, total};
    }

    // One structured re-ask, then give up.
    CompletionRequest retry = req;
    retry.messages.push_back({Role::assistant, first.text});
    retry.messages.push_back(
        {Role::user,
         "Your previous reply had no parseable verdict. Reply with exactly "
         "VERDICT: CONSISTENT or VERDICT: INCONSISTENT followed by a brief rationale."});
    CompletionResult second = ask(retry);
    if (auto parsed = parse_verdict(second.text)) {
        return JudgeVerdict{parsed->first, parsed->second, total};
    }
    throw JudgeParseError("judge reply for task '" + task.id +
                          "' had no parseable verdict after re-ask");
}

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------

std::string to_string(ErrorTag tag) {
    switch (tag) {
        case ErrorTag::logical_leap: return "logical_leap";
        case ErrorTag::incomplete_info: return "incomplete_info";
        case ErrorTag::implicit_bias: return "implicit_bias";
        case ErrorTag::narrow_scope: return "narrow_scope";
        case ErrorTag::factual_inaccuracy: return "factual_inaccuracy";
        case ErrorTag::contradictory_steps: return "contradictory_steps";
        case ErrorTag::ambiguity_misinterpretation: return "ambiguity_misinterpretation";
        case ErrorTag::premature_conclusion: return "premature_conclusion";
    }
    return "logical_leap";
}

ErrorTag error_tag_from_string(const std::string& s) {
    for (ErrorTag tag : all_error_tags()) {
        if (to_string(tag) == s) return tag;
    }
    throw ValidationError("unknown error tag: '" + s + "'");
}

const std::vector<ErrorTag>& all_error_tags() {
    static const std::vector<ErrorTag> tags = {
        ErrorTag::logical_leap,          ErrorTag::incomplete_info,
        ErrorTag::implicit_bias,         ErrorTag::narrow_scope,
        ErrorTag::factual_inaccuracy,    ErrorTag::contradictory_steps,
        ErrorTag::ambiguity_misinterpretation, ErrorTag::premature_conclusion,
    };
    return tags;
}

std::vector<PerspectiveId> expected_correction_map(ErrorTag tag) {
    switch (tag) {
        case ErrorTag::logical_leap: return {PerspectiveId::v1()};
        case ErrorTag::incomplete_info: return {PerspectiveId::v2()};
        case ErrorTag::implicit_bias: return {PerspectiveId::v3()};
        case ErrorTag::narrow_scope: return {PerspectiveId::v4()};
        case ErrorTag::factual_inaccuracy: return {PerspectiveId::v2()};
        case ErrorTag::contradictory_steps: return {PerspectiveId::v1()};
        case ErrorTag::ambiguity_misinterpretation: return {PerspectiveId::v2()};
        case ErrorTag::premature_conclusion: return {PerspectiveId::v1()};
    }
    return {};
}

namespace {

const std::vector<std::string>& tag_phrases(ErrorTag tag) {
    static const std::map<ErrorTag, std::vector<std::string>> phrases = {
        {ErrorTag::logical_leap,
         {"logical leap", "logical_leap", "leap in logic", "leaps in logic",
          "unsupported assertion", "does not follow", "inferential gap", "missing step"}},
        {ErrorTag::incomplete_info,
         {"incomplete", "incomplete_info", "overlook", "omits", "omitted", "key constraint",
          "missing information", "left out"}},
        {ErrorTag::implicit_bias,
         {"bias", "implicit_bias", "unfair", "fairness", "discriminat", "one demographic",
          "partial reasoning"}},
        {ErrorTag::narrow_scope,
         {"narrow scope", "narrow_scope", "only one solution", "only one path",
          "alternative path", "alternatives were not", "single approach"}},
        {ErrorTag::factual_inaccuracy,
         {"factual", "factual_inaccuracy", "misstates", "incorrect fact", "erroneous premise",
          "wrong fact"}},
        {ErrorTag::contradictory_steps,
         {"contradict", "contradictory_steps", "conflicts with", "inconsistent with step"}},
        {ErrorTag::ambiguity_misinterpretation,
         {"ambigu", "ambiguity_misinterpretation", "misinterpret", "vague term", "unclear term"}},
        {ErrorTag::premature_conclusion,
         {"premature", "premature_conclusion", "jumps to", "before full analysis",
          "too quickly"}},
    };
    return phrases.at(tag);
}

}  // namespace

std::vector<ErrorTag> classify_error(const std::string& critique_text) {
    std::string folded;
    folded.reserve(critique_text.size());
    for (unsigned char c : critique_text) folded.push_back(static_cast<char>(std::tolower(c)));

    std::vector<ErrorTag> matches;
    for (ErrorTag tag : all_error_tags()) {
        for (const auto& phrase : tag_phrases(tag)) {
            if (folded.find(phrase) != std::string::npos) {
                matches.push_back(tag);
                break;
            }
        }
    }
    return matches;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

const std::vector<TaskKind> kKindReportOrder = {TaskKind::arithmetic, TaskKind::commonsense,
                                                TaskKind::ethics, TaskKind::logic_puzzle,
                                                TaskKind::custom};

}  // namespace

std::optional<ReferenceAnnotation> reference_for(Method method, TaskKind kind) {
    // Published per-task results for the three methods; annotation only.
    auto make = [](double lc, std::optional<double> ecr) {
        ReferenceAnnotation a;
        a.lc = lc;
        a.ecr = ecr;
        a.note = "published reference, not asserted";
        return a;
    };
    switch (kind) {
        case TaskKind::arithmetic:
            if (method == Method::cot) return make(0.85, std::nullopt);
            if (method == Method::mcot) return make(0.92, 0.15);
            return make(0.94, 0.17);
        case TaskKind::commonsense:
            if (method == Method::cot) return make(0.78, std::nullopt);
            if (method == Method::mcot) return make(0.85, 0.12);
            return make(0.87, 0.14);
        case TaskKind::ethics:
            if (method == Method::cot) return make(0.74, std::nullopt);
            if (method == Method::mcot) return make(0.81, 0.18);
            return make(0.84, 0.21);
        case TaskKind::logic_puzzle:
            if (method == Method::cot) return make(0.82, std::nullopt);
            if (method == Method::mcot) return make(0.90, 0.20);
            return make(0.93, 0.23);
        case TaskKind::custom:
            return std::nullopt;
    }
    return std::nullopt;
}

std::vector<MetricsRow> score_transcripts(const std::vector<RunTranscript>& transcripts,
                                          const std::map<std::string, TaskInstance>& tasks,
                                          const std::string& label, Method method,
                                          const std::string& perspectives,
                                          const JudgeConfig* judge, UsageLedger* judge_ledger,
                                          const std::string& ledger_task_prefix) {
    struct KindBucket {
        ScoreCounts counts;
    };
    std::map<TaskKind, KindBucket> buckets;
    int orphan_warnings = 0;

    for (const auto& t : transcripts) {
        auto it = tasks.find(t.task_id);
        if (it == tasks.end()) {
            ++orphan_warnings;
            continue;
        }
        const TaskInstance& task = it->second;
        KindBucket& bucket = buckets[task.kind];

        if (task.gold) {
            accumulate(bucket.counts, score_transcript(t, task));
        } else {
            bucket.counts.n_scoring_warnings += 1;
        }

        // Logical consistency needs no gold label, only the final trace.
        if (judge && t.succeeded()) {
            std::vector<CallRecord> judge_calls;
            try {
                JudgeVerdict verdict = judge_consistency(task, t, *judge, &judge_calls);
                bucket.counts.n_judged += 1;
                if (verdict.consistent) bucket.counts.n_judged_consistent += 1;
            } catch (const JudgeParseError&) {
                bucket.counts.n_judge_warnings += 1;
            }
            if (judge_ledger) {
                for (const auto& call : judge_calls) {
                    judge_ledger->append({to_string(method), ledger_task_prefix + t.task_id,
                                          call.purpose, call.usage});
                }
            }
        }
    }

    std::vector<MetricsRow> rows;
    for (TaskKind kind : kKindReportOrder) {
        auto it = buckets.find(kind);
        if (it == buckets.end()) continue;
        const ScoreCounts& c = it->second.counts;

        MetricsRow row;
        row.label = label;
        row.method = method;
        row.perspectives = perspectives;
        row.task_kind = to_string(kind);
        row.counts = c;
        row.counts.n_scoring_warnings += orphan_warnings;
        orphan_warnings = 0;  // attach orphan count to the first emitted row only
        if (c.n_judged > 0) {
            row.logical_consistency =
                static_cast<double>(c.n_judged_consistent) / static_cast<double>(c.n_judged);
        }
        if (c.n_initial_wrong > 0) {
            row.error_correction_rate =
                static_cast<double>(c.n_corrected) / static_cast<double>(c.n_initial_wrong);
        }
        if (c.n_total > 0) {
            row.accuracy_initial =
                static_cast<double>(c.n_initial_correct) / static_cast<double>(c.n_total);
            row.accuracy_final =
                static_cast<double>(c.n_final_correct) / static_cast<double>(c.n_total);
        }
        row.reference = reference_for(method, kind);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Experiment drivers
// ---------------------------------------------------------------------------

namespace {

struct NamedConfig {
    std::string label;
    Method method;
    std::vector<PerspectiveId> perspectives;
    std::optional<ReferenceAnnotation> reference;
};

ReferenceAnnotation ethics_reference(double lc, double ecr) {
    ReferenceAnnotation a;
    a.lc = lc;
    a.ecr = ecr;
    a.note = "published reference (ethics task), not asserted";
    return a;
}

ExperimentResult run_named_configs(const std::vector<TaskInstance>& tasks,
                                   ExperimentContext& ctx,
                                   const std::vector<NamedConfig>& configs) {
    if (tasks.empty()) throw ValidationError("experiment requires a nonempty dataset");

    ExperimentResult result;
    for (const auto& nc : configs) {
        if (ctx.progress) {
            ctx.progress("running configuration: " + nc.label + " (" +
                         std::to_string(tasks.size()) + " tasks)");
        }
        PipelineConfig config = ctx.base_config;
        config.method = nc.method;
        config.active_perspectives = nc.perspectives;
        config.validate();

        Pipeline pipeline(config, ctx.prompts, ctx.backend);
        std::vector<RunTranscript> transcripts = pipeline.run_batch(tasks);

        // Ledger task keys carry the configuration label so per-task averages
        // stay per execution when several configurations share a dataset.
        const std::string task_prefix = nc.label + "/";
        for (const auto& t : transcripts) {
            for (const auto& call : t.calls) {
                result.ledger.append(
                    {to_string(nc.method), task_prefix + t.task_id, call.purpose, call.usage});
            }
        }

        std::string perspective_list;
        for (const auto& p : config.active_perspectives) {
            if (!perspective_list.empty()) perspective_list += ",";
            perspective_list += p.str();
        }

        auto rows = score_transcripts(transcripts, index_by_id(tasks), nc.label, nc.method,
                                      perspective_list, ctx.judge, &result.ledger, task_prefix);
        for (auto& row : rows) {
            if (nc.reference) row.reference = nc.reference;
            result.report.rows.push_back(std::move(row));
        }
        result.transcripts_by_label.emplace(nc.label, std::move(transcripts));
    }

    result.ledger.close();
    std::set<std::string> methods;
    for (const auto& e : result.ledger.entries()) methods.insert(e.method);
    if (methods.size() >= 2) {
        result.report.efficiency = compare_methods(result.ledger);
        result.report.notes.push_back(
            "efficiency rows aggregate per method label; the prcot row averages per-task cost "
            "over every prcot configuration executed in this experiment");
    }
    result.report.notes.push_back(
        "token totals count every prompt and completion token of every non-judge call");
    return result;
}

}  // namespace

ExperimentResult run_ablation(const std::vector<TaskInstance>& tasks, ExperimentContext ctx) {
    std::vector<PerspectiveId> base = ctx.base_config.active_perspectives;
    if (base.empty()) {
        base = {PerspectiveId::v1(), PerspectiveId::v2(), PerspectiveId::v3(), PerspectiveId::v4()};
    }
    base = canonical_perspective_order(std::move(base));

    PerspectiveId mcot_perspective = base.front();
    for (const auto& p : base) {
        if (p == PerspectiveId::v1()) mcot_perspective = p;
    }

    const bool default_base = base.size() == 4 && base[0] == PerspectiveId::v1() &&
                              base[1] == PerspectiveId::v2() && base[2] == PerspectiveId::v3() &&
                              base[3] == PerspectiveId::v4();

    std::vector<NamedConfig> configs;
    configs.push_back({"CoT Baseline", Method::cot, {},
                       default_base ? std::optional(ethics_reference(0.74, 0.18)) : std::nullopt});
    configs.push_back({"MCoT (Single Reflection)", Method::mcot, {mcot_perspective},
                       default_base ? std::optional(ethics_reference(0.81, 0.18)) : std::nullopt});
    configs.push_back({"PR-CoT Full", Method::prcot, base,
                       default_base ? std::optional(ethics_reference(0.84, 0.21)) : std::nullopt});

    const std::map<std::string, ReferenceAnnotation> drop_reference = {
        {"v1", ethics_reference(0.79, 0.19)},
        {"v2", ethics_reference(0.80, 0.19)},
        {"v3", ethics_reference(0.77, 0.18)},
        {"v4", ethics_reference(0.82, 0.20)},
    };
    for (const auto& drop : base) {
        std::vector<PerspectiveId> remaining;
        for (const auto& p : base) {
            if (!(p == drop)) remaining.push_back(p);
        }
        NamedConfig nc;
        nc.label = "PR-CoT w/o " + drop.str();
        nc.method = Method::prcot;
        nc.perspectives = std::move(remaining);
        if (default_base) {
            auto it = drop_reference.find(drop.str());
            if (it != drop_reference.end()) nc.reference = it->second;
        }
        configs.push_back(std::move(nc));
    }

    return run_named_configs(tasks, ctx, configs);
}

ExperimentResult run_incremental(const std::vector<TaskInstance>& tasks, ExperimentContext ctx) {
    // Fixed addition order: v1, v2, v4, and finally v3.
    const std::vector<PerspectiveId> order = {PerspectiveId::v1(), PerspectiveId::v2(),
                                              PerspectiveId::v4(), PerspectiveId::v3()};
    const std::vector<std::pair<double, double>> reference = {
        {0.74, 0.18}, {0.81, 0.18}, {0.82, 0.19}, {0.83, 0.20}, {0.84, 0.21}};

    std::vector<NamedConfig> configs;
    for (size_t n = 0; n <= order.size(); ++n) {
        NamedConfig nc;
        if (n == 0) {
            nc.label = "N=0 (CoT Baseline)";
            nc.method = Method::cot;
        } else if (n == 1) {
            nc.label = "N=1 (MCoT-like)";
            nc.method = Method::mcot;
        } else if (n == order.size()) {
            nc.label = "N=" + std::to_string(n) + " (Full PR-CoT)";
            nc.method = Method::prcot;
        } else {
            nc.label = "N=" + std::to_string(n);
            nc.method = Method::prcot;
        }
        nc.perspectives.assign(order.begin(), order.begin() + static_cast<long>(n));
        nc.reference = ethics_reference(reference[n].first, reference[n].second);
        configs.push_back(std::move(nc));
    }

    return run_named_configs(tasks, ctx, configs);
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

std::string pct(std::optional<double> value) {
    if (!value) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", *value * 100.0);
    return buf;
}

std::string ecr_cell(const MetricsRow& row) {
    if (row.error_correction_rate) return pct(row.error_correction_rate);
    if (row.counts.n_total > 0 && row.counts.n_initial_wrong == 0) return "undef";
    return "-";
}

std::string pad(std::string s, size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

std::string render_report_text(const MetricsReport& report) {
    std::ostringstream out;
    out << pad("Configuration", 28) << pad("Task", 14) << pad("n", 5) << pad("LC", 8)
        << pad("ECR", 8) << pad("Acc(init)", 11) << pad("Acc(final)", 11) << "Reference\n";
    out << std::string(100, '-') << '\n';
    for (const auto& row : report.rows) {
        std::string reference = "-";
        if (row.reference) {
            reference = "LC " + pct(row.reference->lc) + ", ECR " + pct(row.reference->ecr);
        }
        out << pad(row.label, 28) << pad(row.task_kind, 14)
            << pad(std::to_string(row.counts.n_total), 5)
            << pad(pct(row.logical_consistency), 8) << pad(ecr_cell(row), 8)
            << pad(pct(row.accuracy_initial), 11) << pad(pct(row.accuracy_final), 11) << reference
            << '\n';
    }

    if (!report.efficiency.empty()) {
        out << '\n'
            << pad("Method", 10) << pad("tasks", 7) << pad("avg tokens", 12)
            << pad("avg latency ms", 16) << pad("tokens vs cot", 15) << "reference\n";
        out << std::string(85, '-') << '\n';
        for (const auto& row : report.efficiency) {
            char tokens[32], latency[32];
            std::snprintf(tokens, sizeof(tokens), "%.1f", row.summary.avg_total_tokens);
            std::snprintf(latency, sizeof(latency), "%.1f", row.summary.avg_latency_ms);
            std::string ratio = "-";
            if (row.tokens_ratio_vs_cot) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.2fx", *row.tokens_ratio_vs_cot);
                ratio = buf;
            }
            std::string reference = "-";
            if (row.reference_avg_tokens) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.0f tok / %.1f s", *row.reference_avg_tokens,
                              row.reference_avg_seconds.value_or(0.0));
                reference = buf;
            }
            out << pad(row.summary.method, 10) << pad(std::to_string(row.summary.n_tasks), 7)
                << pad(tokens, 12) << pad(latency, 16) << pad(ratio, 15) << reference << '\n';
        }
    }

    for (const auto& note : report.notes) {
        out << "\nnote: " << note << '\n';
    }
    return out.str();
}

std::string render_report_json(const MetricsReport& report) {
    ojson rows = ojson::array();
    for (const auto& row : report.rows) {
        ojson j{{"label", row.label},
                {"method", to_string(row.method)},
                {"perspectives", row.perspectives},
                {"task_kind", row.task_kind},
                {"counts",
                 ojson{{"n_total", row.counts.n_total},
                       {"n_initial_wrong", row.counts.n_initial_wrong},
                       {"n_corrected", row.counts.n_corrected},
                       {"n_regressed", row.counts.n_regressed},
                       {"n_initial_correct", row.counts.n_initial_correct},
                       {"n_final_correct", row.counts.n_final_correct},
                       {"n_judged", row.counts.n_judged},
                       {"n_judged_consistent", row.counts.n_judged_consistent},
                       {"n_failed_runs", row.counts.n_failed_runs},
                       {"n_scoring_warnings", row.counts.n_scoring_warnings},
                       {"n_judge_warnings", row.counts.n_judge_warnings}}}};
        j["logical_consistency"] =
            row.logical_consistency ? ojson(*row.logical_consistency) : ojson(nullptr);
        if (row.error_correction_rate) {
            j["error_correction_rate"] = *row.error_correction_rate;
        } else if (row.counts.n_total > 0 && row.counts.n_initial_wrong == 0) {
            j["error_correction_rate"] = "undefined";
        } else {
            j["error_correction_rate"] = nullptr;
        }
        j["accuracy_initial"] = row.accuracy_initial;
        j["accuracy_final"] = row.accuracy_final;
        if (row.reference) {
            ojson ref;
            ref["lc"] = row.reference->lc ? ojson(*row.reference->lc) : ojson(nullptr);
            ref["ecr"] = row.reference->ecr ? ojson(*row.reference->ecr) : ojson(nullptr);
            ref["note"] = row.reference->note;
            j["reference"] = std::move(ref);
        } else {
            j["reference"] = nullptr;
        }
        rows.push_back(std::move(j));
    }

    ojson efficiency = ojson::array();
    for (const auto& row : report.efficiency) {
        ojson j{{"method", row.summary.method},
                {"n_tasks", row.summary.n_tasks},
                {"avg_total_tokens", row.summary.avg_total_tokens},
                {"avg_latency_ms", row.summary.avg_latency_ms},
                {"judge_included", row.summary.judge_included}};
        j["tokens_ratio_vs_cot"] =
            row.tokens_ratio_vs_cot ? ojson(*row.tokens_ratio_vs_cot) : ojson(nullptr);
        j["latency_ratio_vs_cot"] =
            row.latency_ratio_vs_cot ? ojson(*row.latency_ratio_vs_cot) : ojson(nullptr);
        j["reference_avg_tokens"] =
            row.reference_avg_tokens ? ojson(*row.reference_avg_tokens) : ojson(nullptr);
        j["reference_avg_seconds"] =
            row.reference_avg_seconds ? ojson(*row.reference_avg_seconds) : ojson(nullptr);
        efficiency.push_back(std::move(j));
    }

    ojson notes = ojson::array();
    for (const auto& note : report.notes) notes.push_back(note);

    return ojson{{"rows", std::move(rows)},
                 {"efficiency", std::move(efficiency)},
                 {"notes", std::move(notes)}}
        .dump(2);
}

}  // namespace prcot
