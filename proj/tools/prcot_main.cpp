// prcot — poly-reflective chain-of-thought runner and evaluation harness.
//
// Subcommands:
//   run          execute cot/mcot/prcot over a dataset, writing transcripts
//   eval         score a transcript archive against a dataset
//   ablate       leave-one-out perspective study
//   incremental  growing-prefix perspective study

#include <iostream>

#include <CLI11.hpp>

#include "prcot/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"poly-reflective chain-of-thought pipeline and evaluation harness"};
    app.require_subcommand(1);

    prcot::RunOptions run_options;
    std::string run_method;
    std::string run_backend;
    int run_parallel = 0;
    auto* run = app.add_subcommand("run", "run a method over a dataset");
    run->add_option("--config", run_options.config_path, "experiment config file")->required();
    run->add_option("--dataset", run_options.dataset_path, "task dataset (one JSON per line)")
        ->required();
    run->add_option("--out", run_options.out_path, "transcript archive to write")->required();
    run->add_option("--method", run_method, "cot | mcot | prcot (overrides config)");
    run->add_option("--backend", run_backend, "remote | mock | replay (overrides config)");
    run->add_option("--parallel", run_parallel, "task-level parallelism bound (overrides config)");

    prcot::EvalOptions eval_options;
    auto* eval = app.add_subcommand("eval", "score transcripts against a dataset");
    eval->add_option("--config", eval_options.config_path, "experiment config file")->required();
    eval->add_option("--transcripts", eval_options.transcripts_path, "transcript archive")
        ->required();
    eval->add_option("--dataset", eval_options.dataset_path, "task dataset")->required();
    eval->add_option("--out", eval_options.out_prefix, "report path prefix (.json/.txt)")
        ->required();
    eval->add_flag("--include-judge-cost", eval_options.include_judge_cost,
                   "include judge calls in efficiency summaries");

    prcot::ExperimentOptions ablate_options;
    int ablate_parallel = 0;
    auto* ablate = app.add_subcommand("ablate", "leave-one-out perspective study");
    ablate->add_option("--config", ablate_options.config_path, "experiment config file")
        ->required();
    ablate->add_option("--dataset", ablate_options.dataset_path, "task dataset")->required();
    ablate->add_option("--out", ablate_options.out_prefix, "report path prefix (.json/.txt)")
        ->required();
    ablate->add_option("--parallel", ablate_parallel, "task-level parallelism bound");

    prcot::ExperimentOptions incremental_options;
    int incremental_parallel = 0;
    auto* incremental = app.add_subcommand("incremental", "growing-prefix perspective study");
    incremental->add_option("--config", incremental_options.config_path, "experiment config file")
        ->required();
    incremental->add_option("--dataset", incremental_options.dataset_path, "task dataset")
        ->required();
    incremental
        ->add_option("--out", incremental_options.out_prefix, "report path prefix (.json/.txt)")
        ->required();
    incremental->add_option("--parallel", incremental_parallel, "task-level parallelism bound");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (!run_method.empty()) run_options.method = run_method;
        if (!run_backend.empty()) run_options.backend_kind = run_backend;
        if (run_parallel > 0) run_options.parallel = run_parallel;
        return prcot::run_command(run_options, std::cout, std::cerr);
    }
    if (eval->parsed()) {
        return prcot::eval_command(eval_options, std::cout, std::cerr);
    }
    if (ablate->parsed()) {
        if (ablate_parallel > 0) ablate_options.parallel = ablate_parallel;
        return prcot::ablate_command(ablate_options, std::cout, std::cerr);
    }
    if (incremental->parsed()) {
        if (incremental_parallel > 0) incremental_options.parallel = incremental_parallel;
        return prcot::incremental_command(incremental_options, std::cout, std::cerr);
    }
    return 1;
}
