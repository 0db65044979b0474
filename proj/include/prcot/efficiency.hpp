#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prcot/core.hpp"

namespace prcot {

/// Append-only record of every completion's cost, keyed by method, task and
/// call purpose. Summaries run over a closed ledger only.
class UsageLedger {
public:
    struct Entry {
        std::string method;
        std::string task_id;
        PurposeTag purpose;
        Usage usage;
    };

    void append(Entry entry);
    void append_transcript(const std::string& method, const RunTranscript& t);
    static UsageLedger from_transcripts(const std::vector<RunTranscript>& transcripts);

    /// No further appends allowed after closing.
    void close() { closed_ = true; }
    bool closed() const { return closed_; }

    const std::vector<Entry>& entries() const { return entries_; }

    /// Sum over every entry, judge calls included.
    Usage total() const;

private:
    std::vector<Entry> entries_;
    bool closed_ = false;
};

struct MethodSummary {
    std::string method;
    int n_tasks = 0;
    double avg_total_tokens = 0.0;   // prompt + completion per task
    double avg_latency_ms = 0.0;     // summed per-call latency per task
    bool judge_included = false;
};

/// Per-task averages for one method. Judge-tagged entries are excluded
/// unless include_judge is set: the published efficiency figures describe
/// the reasoning pipeline, not evaluation overhead. Throws EmptySummaryError
/// when the ledger holds no entries for the method, and ContractError when
/// the ledger is still open.
MethodSummary summarize(const UsageLedger& ledger, const std::string& method,
                        bool include_judge = false);

struct MethodComparisonRow {
    MethodSummary summary;
    std::optional<double> tokens_ratio_vs_cot;
    std::optional<double> latency_ratio_vs_cot;
    std::optional<double> reference_avg_tokens;     // published figures, not asserted
    std::optional<double> reference_avg_seconds;
};

/// One row per method present in the ledger, ordered cot, mcot, prcot, then
/// others lexicographically, with cost ratios relative to cot. Requires at
/// least two methods.
std::vector<MethodComparisonRow> compare_methods(const UsageLedger& ledger,
                                                 bool include_judge = false);

/// Published per-task cost figures for the three methods (annotation only).
std::optional<double> reference_avg_tokens(const std::string& method);
std::optional<double> reference_avg_seconds(const std::string& method);

}  // namespace prcot
