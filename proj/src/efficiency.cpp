#include "prcot/efficiency.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace prcot {

void UsageLedger::append(Entry entry) {
    if (closed_) throw ContractError("usage ledger is closed");
    entries_.push_back(std::move(entry));
}

void UsageLedger::append_transcript(const std::string& method, const RunTranscript& t) {
    for (const auto& call : t.calls) {
        append(Entry{method, t.task_id, call.purpose, call.usage});
    }
}

UsageLedger UsageLedger::from_transcripts(const std::vector<RunTranscript>& transcripts) {
    UsageLedger ledger;
    for (const auto& t : transcripts) {
        ledger.append_transcript(to_string(t.method), t);
    }
    return ledger;
}

Usage UsageLedger::total() const {
    Usage sum;
    for (const auto& e : entries_) sum += e.usage;
    return sum;
}

MethodSummary summarize(const UsageLedger& ledger, const std::string& method,
                        bool include_judge) {
    if (!ledger.closed()) {
        throw ContractError("summarize requires a closed ledger");
    }

    std::map<std::string, Usage> per_task;
    for (const auto& e : ledger.entries()) {
        if (e.method != method) continue;
        if (!include_judge && e.purpose.kind == PurposeTag::Kind::judge) continue;
        per_task[e.task_id] += e.usage;
    }
    if (per_task.empty()) {
        throw EmptySummaryError("no ledger entries for method '" + method + "'");
    }

    MethodSummary s;
    s.method = method;
    s.n_tasks = static_cast<int>(per_task.size());
    double tokens = 0.0;
    double latency = 0.0;
    for (const auto& [task_id, usage] : per_task) {
        tokens += static_cast<double>(usage.total_tokens());
        latency += static_cast<double>(usage.latency_ms);
    }
    s.avg_total_tokens = tokens / s.n_tasks;
    s.avg_latency_ms = latency / s.n_tasks;
    s.judge_included = include_judge;
    return s;
}

namespace {

int method_rank(const std::string& m) {
    if (m == "cot") return 0;
    if (m == "mcot") return 1;
    if (m == "prcot") return 2;
    return 3;
}

}  // namespace

std::optional<double> reference_avg_tokens(const std::string& method) {
    if (method == "cot") return 450.0;
    if (method == "mcot") return 800.0;
    if (method == "prcot") return 2100.0;
    return std::nullopt;
}

std::optional<double> reference_avg_seconds(const std::string& method) {
    if (method == "cot") return 5.2;
    if (method == "mcot") return 8.5;
    if (method == "prcot") return 20.3;
    return std::nullopt;
}

std::vector<MethodComparisonRow> compare_methods(const UsageLedger& ledger, bool include_judge) {
    std::set<std::string> methods;
    for (const auto& e : ledger.entries()) methods.insert(e.method);
    if (methods.size() < 2) {
        throw EmptySummaryError("method comparison requires at least two methods, found " +
                                std::to_string(methods.size()));
    }

    std::vector<std::string> ordered(methods.begin(), methods.end());
    std::sort(ordered.begin(), ordered.end(), [](const std::string& a, const std::string& b) {
        const int ra = method_rank(a);
        const int rb = method_rank(b);
        return ra != rb ? ra < rb : a < b;
    });

    std::optional<MethodSummary> cot;
    if (methods.count("cot")) cot = summarize(ledger, "cot", include_judge);

    std::vector<MethodComparisonRow> rows;
    for (const auto& m : ordered) {
        MethodComparisonRow row;
        row.summary = summarize(ledger, m, include_judge);
        if (cot && cot->avg_total_tokens > 0.0) {
            row.tokens_ratio_vs_cot = row.summary.avg_total_tokens / cot->avg_total_tokens;
        }
        if (cot && cot->avg_latency_ms > 0.0) {
            row.latency_ratio_vs_cot = row.summary.avg_latency_ms / cot->avg_latency_ms;
        }
        row.reference_avg_tokens = reference_avg_tokens(m);
        row.reference_avg_seconds = reference_avg_seconds(m);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace prcot
