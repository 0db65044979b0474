#include "prcot/cli.hpp"

#include <fstream>
#include <ostream>
#include <set>

#include "prcot/dataset.hpp"
#include "prcot/evaluation.hpp"
#include "prcot/pipeline.hpp"
#include "prcot/serde.hpp"

namespace prcot {

namespace {

ExperimentConfig load_config_with_overrides(const RunOptions& options) {
    ExperimentConfig cfg = load_config(options.config_path);
    if (options.method) {
        cfg.pipeline.method = method_from_string(*options.method);
        // Method overrides re-derive the perspective set unless the config's
        // set already satisfies the new method's arity.
        if (cfg.pipeline.method == Method::cot) {
            cfg.pipeline.active_perspectives.clear();
        } else if (cfg.pipeline.method == Method::mcot &&
                   cfg.pipeline.active_perspectives.size() != 1) {
            cfg.pipeline.active_perspectives = {PerspectiveId::v1()};
        } else if (cfg.pipeline.method == Method::prcot &&
                   cfg.pipeline.active_perspectives.empty()) {
            cfg.pipeline.active_perspectives = {PerspectiveId::v1(), PerspectiveId::v2(),
                                                PerspectiveId::v3(), PerspectiveId::v4()};
        }
    }
    if (options.backend_kind) {
        cfg.pipeline.backend.kind = backend_kind_from_string(*options.backend_kind);
    }
    if (options.parallel) cfg.pipeline.parallelism = *options.parallel;
    cfg.pipeline.validate();
    return cfg;
}

std::optional<JudgeConfig> make_judge(const ExperimentConfig& cfg, const PromptLibrary& prompts,
                                      const BackendPtr& pipeline_backend) {
    if (!cfg.judge.enabled) return std::nullopt;
    JudgeConfig judge;
    if (cfg.judge.backend) {
        judge.backend = make_backend(*cfg.judge.backend);
        judge.model = cfg.judge.backend->model;
    } else {
        judge.backend = pipeline_backend;
        judge.model = cfg.pipeline.backend.model;
    }
    judge.sampling = cfg.judge.sampling;
    judge.prompt = prompts.judge_template();
    return judge;
}

}  // namespace

int run_command(const RunOptions& options, std::ostream& out, std::ostream& err) {
    try {
        ExperimentConfig cfg = load_config_with_overrides(options);
        std::vector<TaskInstance> tasks = load_dataset(options.dataset_path);
        if (tasks.empty()) {
            err << "error: dataset is empty: " << options.dataset_path << '\n';
            return 2;
        }
        PromptLibrary prompts = cfg.load_prompts();
        BackendPtr backend = make_backend(cfg.pipeline.backend);

        Pipeline pipeline(cfg.pipeline, prompts, backend);
        std::vector<RunTranscript> transcripts = pipeline.run_batch(tasks);
        write_transcript_archive(options.out_path, transcripts);

        ojson failures = ojson::array();
        for (const auto& t : transcripts) {
            if (t.failure) {
                failures.push_back(ojson{{"task_id", t.task_id},
                                         {"stage", t.failure->stage},
                                         {"message", t.failure->message}});
                err << "task " << t.task_id << " failed at " << t.failure->stage << ": "
                    << t.failure->message << '\n';
            }
        }
        out << "wrote " << transcripts.size() << " transcripts to " << options.out_path << '\n';
        if (!failures.empty()) {
            const std::string manifest_path = options.out_path + ".failures.json";
            std::ofstream manifest(manifest_path, std::ios::binary | std::ios::trunc);
            manifest << failures.dump(2) << '\n';
            err << failures.size() << " task(s) failed; manifest: " << manifest_path << '\n';
            return 1;
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

int eval_command(const EvalOptions& options, std::ostream& out, std::ostream& err) {
    try {
        ExperimentConfig cfg = load_config(options.config_path);
        std::vector<RunTranscript> transcripts = read_transcript_archive(options.transcripts_path);
        if (transcripts.empty()) {
            throw ValidationError("transcript archive is empty: " + options.transcripts_path);
        }
        std::vector<TaskInstance> tasks = load_dataset(options.dataset_path);
        auto task_index = index_by_id(tasks);

        std::string unmatched;
        for (const auto& t : transcripts) {
            if (!task_index.count(t.task_id)) {
                if (!unmatched.empty()) unmatched += ", ";
                unmatched += t.task_id;
            }
        }
        if (!unmatched.empty()) {
            throw ScoringError("transcript ids not present in dataset: " + unmatched);
        }

        PromptLibrary prompts = cfg.load_prompts();
        BackendPtr backend;  // only constructed if the judge needs it
        std::optional<JudgeConfig> judge;
        if (cfg.judge.enabled) {
            if (!cfg.judge.backend) backend = make_backend(cfg.pipeline.backend);
            judge = make_judge(cfg, prompts, backend);
        }

        // One row group per method present in the archive, kinds in report order.
        std::set<Method> methods;
        for (const auto& t : transcripts) methods.insert(t.method);

        MetricsReport report;
        UsageLedger ledger = UsageLedger::from_transcripts(transcripts);
        for (Method method : methods) {
            std::vector<RunTranscript> subset;
            for (const auto& t : transcripts) {
                if (t.method == method) subset.push_back(t);
            }
            std::string perspective_list;
            if (!subset.empty() && !subset.front().critiques.empty()) {
                for (const auto& c : subset.front().critiques) {
                    if (!perspective_list.empty()) perspective_list += ",";
                    perspective_list += c.perspective.str();
                }
            }
            auto rows = score_transcripts(subset, task_index, to_string(method), method,
                                          perspective_list, judge ? &*judge : nullptr, &ledger);
            for (auto& row : rows) report.rows.push_back(std::move(row));
        }
        ledger.close();
        if (methods.size() >= 2) {
            report.efficiency = compare_methods(ledger, options.include_judge_cost);
        } else {
            // Single-method archive: per-task averages only, no ratios.
            MethodComparisonRow row;
            const std::string method = to_string(*methods.begin());
            row.summary = summarize(ledger, method, options.include_judge_cost);
            row.reference_avg_tokens = reference_avg_tokens(method);
            row.reference_avg_seconds = reference_avg_seconds(method);
            report.efficiency.push_back(std::move(row));
        }
        report.notes.push_back(
            "token totals count every prompt and completion token of every non-judge call" +
            std::string(options.include_judge_cost ? "; judge costs included on request" : ""));

        const std::string text = render_report_text(report);
        std::ofstream txt(options.out_prefix + ".txt", std::ios::binary | std::ios::trunc);
        txt << text;
        std::ofstream json(options.out_prefix + ".json", std::ios::binary | std::ios::trunc);
        json << render_report_json(report) << '\n';
        out << text;
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

namespace {

int experiment_command(const ExperimentOptions& options, std::ostream& out, std::ostream& err,
                       bool incremental) {
    try {
        ExperimentConfig cfg = load_config(options.config_path);
        if (options.parallel) cfg.pipeline.parallelism = *options.parallel;
        std::vector<TaskInstance> tasks = load_dataset(options.dataset_path);
        PromptLibrary prompts = cfg.load_prompts();
        BackendPtr backend = make_backend(cfg.pipeline.backend);

        std::optional<JudgeConfig> judge = make_judge(cfg, prompts, backend);

        ExperimentContext ctx;
        ctx.base_config = cfg.pipeline;
        ctx.prompts = prompts;
        ctx.backend = backend;
        ctx.judge = judge ? &*judge : nullptr;
        ctx.progress = [&err](const std::string& line) { err << line << '\n'; };

        ExperimentResult result =
            incremental ? run_incremental(tasks, std::move(ctx)) : run_ablation(tasks, std::move(ctx));

        const std::string text = render_report_text(result.report);
        std::ofstream txt(options.out_prefix + ".txt", std::ios::binary | std::ios::trunc);
        txt << text;
        std::ofstream json(options.out_prefix + ".json", std::ios::binary | std::ios::trunc);
        json << render_report_json(result.report) << '\n';
        out << text;
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace

int ablate_command(const ExperimentOptions& options, std::ostream& out, std::ostream& err) {
    return experiment_command(options, out, err, /*incremental=*/false);
}

int incremental_command(const ExperimentOptions& options, std::ostream& out, std::ostream& err) {
    return experiment_command(options, out, err, /*incremental=*/true);
}

}  // namespace prcot
