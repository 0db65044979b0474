#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "prcot/config.hpp"

namespace prcot {

/// Command implementations shared by the binary and the tests. Each returns
/// a process exit code; user-facing errors print to `err` instead of
/// escaping as exceptions.

struct RunOptions {
    std::string config_path;
    std::string dataset_path;
    std::string out_path;
    std::optional<std::string> method;        // --method override
    std::optional<std::string> backend_kind;  // --backend override
    std::optional<int> parallel;              // --parallel override
};

/// Executes the configured method over every dataset task and writes one
/// transcript record per task. Exit 0 only when every task succeeded; task
/// failures land in <out>.failures.json and force a nonzero exit.
int run_command(const RunOptions& options, std::ostream& out, std::ostream& err);

struct EvalOptions {
    std::string config_path;
    std::string transcripts_path;
    std::string dataset_path;
    std::string out_prefix;  // writes <prefix>.json and <prefix>.txt
    bool include_judge_cost = false;
};

int eval_command(const EvalOptions& options, std::ostream& out, std::ostream& err);

struct ExperimentOptions {
    std::string config_path;
    std::string dataset_path;
    std::string out_prefix;
    std::optional<int> parallel;
};

int ablate_command(const ExperimentOptions& options, std::ostream& out, std::ostream& err);
int incremental_command(const ExperimentOptions& options, std::ostream& out, std::ostream& err);

}  // namespace prcot
