// Acceptance suite: one check per shipped guarantee, one PASS/FAIL line each.
//
//   1. call-count law            calls per task = 1 / 3 / N+2, under 5 s
//   2. baseline reduction        prcot with no perspectives == cot
//   3. ECR oracle equivalence    compute_ecr == brute-force recount, 100 seeds
//   4. flaw-correction matrix    full set corrects 8/8; drops miss mapped tags
//   5. incremental monotonicity  corrected count grows with each added angle
//   6. efficiency ordering       tokens/calls: cot < mcot < prcot; exact sums
//   7. determinism and replay    recorded session replays byte-identical, offline
//   8. judge protocol            30 scripted verdicts parse as expected
//   9. answer-extraction fuzz    last-marker rule == scan-all oracle, 1000 cases

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include <httplib.h>

#include "../fixtures.hpp"
#include "prcot/cli.hpp"
#include "prcot/dataset.hpp"
#include "prcot/evaluation.hpp"
#include "prcot/pipeline.hpp"
#include "prcot/serde.hpp"

using namespace prcot;
namespace fs = std::filesystem;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& what) {
    if (!condition) throw CheckFailure(what);
}

RunTranscript strip_time(RunTranscript t) {
    t.created_at_ms = 0;
    return t;
}

// ---------------------------------------------------------------------------
// 1. Call-count law
// ---------------------------------------------------------------------------

void criterion_call_count_law() {
    const auto start = std::chrono::steady_clock::now();
    const int n = 20;
    auto tasks = testfx::counting_tasks(n);
    const auto all = testfx::all_perspectives();

    Pipeline cot(testfx::base_config(Method::cot, {}), PromptLibrary::builtin(),
                 testfx::counting_backend(n));
    for (const auto& t : cot.run_batch(tasks)) {
        require(t.succeeded(), "cot task failed: " + t.task_id);
        require(t.calls.size() == 1, "cot made " + std::to_string(t.calls.size()) + " calls");
    }

    Pipeline mcot(testfx::base_config(Method::mcot, {PerspectiveId::v1()}),
                  PromptLibrary::builtin(), testfx::counting_backend(n));
    for (const auto& t : mcot.run_batch(tasks)) {
        require(t.calls.size() == 3, "mcot made " + std::to_string(t.calls.size()) + " calls");
    }

    for (size_t k = 1; k <= all.size(); ++k) {
        std::vector<PerspectiveId> subset(all.begin(), all.begin() + static_cast<long>(k));
        Pipeline prcot(testfx::base_config(Method::prcot, subset), PromptLibrary::builtin(),
                       testfx::counting_backend(n));
        for (const auto& t : prcot.run_batch(tasks)) {
            require(t.calls.size() == k + 2, "prcot N=" + std::to_string(k) + " made " +
                                                 std::to_string(t.calls.size()) + " calls");
        }
    }

    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    require(elapsed < 5000, "fixture took " + std::to_string(elapsed) + " ms (limit 5000)");
}

// ---------------------------------------------------------------------------
// 2. Baseline reduction
// ---------------------------------------------------------------------------

void criterion_baseline_reduction() {
    const int n = 20;
    auto tasks = testfx::counting_tasks(n);
    Pipeline cot(testfx::base_config(Method::cot, {}), PromptLibrary::builtin(),
                 testfx::counting_backend(n));
    Pipeline empty_prcot(testfx::base_config(Method::prcot, {}), PromptLibrary::builtin(),
                         testfx::counting_backend(n));

    auto cot_out = cot.run_batch(tasks);
    auto prcot_out = empty_prcot.run_batch(tasks);
    require(cot_out.size() == prcot_out.size(), "batch sizes differ");
    for (size_t i = 0; i < cot_out.size(); ++i) {
        RunTranscript a = strip_time(cot_out[i]);
        RunTranscript b = strip_time(prcot_out[i]);
        require(a.method == Method::cot && b.method == Method::prcot, "method labels off");
        b.method = a.method;
        require(a == b, "transcripts differ beyond the method label for " + a.task_id);
    }
}

// ---------------------------------------------------------------------------
// 3. ECR oracle equivalence
// ---------------------------------------------------------------------------

void criterion_ecr_oracle() {
    for (unsigned seed = 0; seed < 100; ++seed) {
        std::mt19937 rng(seed);
        std::vector<TaskInstance> tasks;
        std::vector<RunTranscript> transcripts;
        for (int i = 0; i < 50; ++i) {
            const std::string id = "s" + std::to_string(seed) + "_" + std::to_string(i);
            tasks.push_back(TaskInstance{id, TaskKind::logic_puzzle, "q",
                                         GoldLabel{"G", {}, MatchMode::exact}});
            auto roll = [&rng]() -> std::optional<std::string> {
                switch (rng() % 3) {
                    case 0: return "G";
                    case 1: return "X";
                    default: return std::nullopt;
                }
            };
            RunTranscript t;
            t.task_id = id;
            t.method = Method::prcot;
            t.initial = ReasoningArtifact{"cot", roll(), ArtifactStage::initial};
            t.final = ReasoningArtifact{"cot2", roll(), ArtifactStage::refined};
            transcripts.push_back(std::move(t));
        }

        // Independent brute-force recount on plain string equality.
        int wrong = 0;
        int corrected = 0;
        for (const auto& t : transcripts) {
            const bool initial_ok = t.initial.answer && *t.initial.answer == "G";
            const bool final_ok = t.final.answer && *t.final.answer == "G";
            if (!initial_ok) {
                ++wrong;
                if (final_ok) ++corrected;
            }
        }

        auto result = compute_ecr(transcripts, index_by_id(tasks));
        require(result.counts.n_initial_wrong == wrong,
                "seed " + std::to_string(seed) + ": denominator mismatch");
        require(result.counts.n_corrected == corrected,
                "seed " + std::to_string(seed) + ": numerator mismatch");
        if (wrong == 0) {
            require(!result.ecr.has_value(), "seed " + std::to_string(seed) + ": ECR not undefined");
        } else {
            require(result.ecr.has_value() &&
                        *result.ecr == static_cast<double>(corrected) / static_cast<double>(wrong),
                    "seed " + std::to_string(seed) + ": ECR value mismatch");
        }
    }
}

// ---------------------------------------------------------------------------
// 4. Flaw-correction matrix
// ---------------------------------------------------------------------------

const MetricsRow& find_row(const MetricsReport& report, const std::string& label) {
    for (const auto& row : report.rows) {
        if (row.label == label) return row;
    }
    throw CheckFailure("missing report row: " + label);
}

void criterion_flaw_matrix() {
    ExperimentContext ctx;
    ctx.base_config = testfx::base_config(Method::prcot, testfx::all_perspectives());
    ctx.prompts = PromptLibrary::builtin();
    ctx.backend = testfx::flaw_backend();
    auto result = run_ablation(testfx::flaw_tasks(), std::move(ctx));

    const auto& full = find_row(result.report, "PR-CoT Full");
    require(full.counts.n_initial_wrong == 8, "full run: expected 8 initially wrong");
    require(full.counts.n_corrected == 8, "full run: expected 8 corrected");
    require(full.error_correction_rate && *full.error_correction_rate == 1.0,
            "full run: ECR must be exactly 8/8");

    const std::map<std::string, int> mapped = {{"v1", 3}, {"v2", 3}, {"v3", 1}, {"v4", 1}};
    for (const auto& [p, k] : mapped) {
        const auto& row = find_row(result.report, "PR-CoT w/o " + p);
        require(row.counts.n_corrected == 8 - k,
                "drop " + p + ": corrected " + std::to_string(row.counts.n_corrected) +
                    ", expected " + std::to_string(8 - k));
        require(row.error_correction_rate &&
                    *row.error_correction_rate == static_cast<double>(8 - k) / 8.0,
                "drop " + p + ": ECR not exactly (8-k)/8");
        require(*row.error_correction_rate < *full.error_correction_rate,
                "drop " + p + " is not strictly worse than the full set");
    }
}

// ---------------------------------------------------------------------------
// 5. Incremental monotonicity
// ---------------------------------------------------------------------------

void criterion_incremental_monotonicity() {
    ExperimentContext ctx;
    ctx.base_config = testfx::base_config(Method::prcot, testfx::all_perspectives());
    ctx.prompts = PromptLibrary::builtin();
    ctx.backend = testfx::flaw_backend();
    auto result = run_incremental(testfx::flaw_tasks(), std::move(ctx));
    require(result.report.rows.size() == 5, "expected 5 incremental rows");

    // Tags in the fixture mapped to each perspective, in addition order.
    const std::vector<std::pair<PerspectiveId, int>> addition = {
        {PerspectiveId::v1(), 3}, {PerspectiveId::v2(), 3}, {PerspectiveId::v4(), 1},
        {PerspectiveId::v3(), 1}};

    int previous = result.report.rows[0].counts.n_corrected;
    require(previous == 0, "cot baseline corrected nothing by construction");
    for (size_t i = 0; i < addition.size(); ++i) {
        const int current = result.report.rows[i + 1].counts.n_corrected;
        require(current >= previous, "corrected count decreased at step " + std::to_string(i + 1));
        if (addition[i].second > 0) {
            require(current > previous,
                    "adding " + addition[i].first.str() + " did not strictly help");
        }
        previous = current;
    }
    require(previous == 8, "full prefix must correct all 8 items");
}

// ---------------------------------------------------------------------------
// 6. Efficiency ordering and accounting conservation
// ---------------------------------------------------------------------------

void criterion_efficiency_ordering() {
    const int n = 20;
    auto tasks = testfx::counting_tasks(n);

    auto run_method = [&](Method method, std::vector<PerspectiveId> perspectives) {
        Pipeline pipeline(testfx::base_config(method, std::move(perspectives)),
                          PromptLibrary::builtin(), testfx::counting_backend(n));
        return pipeline.run_batch(tasks);
    };
    auto cot_out = run_method(Method::cot, {});
    auto mcot_out = run_method(Method::mcot, {PerspectiveId::v1()});
    auto prcot_out = run_method(Method::prcot, testfx::all_perspectives());

    std::vector<RunTranscript> everything;
    for (const auto* batch : {&cot_out, &mcot_out, &prcot_out}) {
        everything.insert(everything.end(), batch->begin(), batch->end());
    }
    UsageLedger ledger = UsageLedger::from_transcripts(everything);

    Usage expected;
    for (const auto& t : everything) expected += t.total_usage();
    require(ledger.total() == expected, "ledger total != sum of transcript usages");

    ledger.close();
    auto cot = summarize(ledger, "cot");
    auto mcot = summarize(ledger, "mcot");
    auto prcot = summarize(ledger, "prcot");
    require(cot.avg_total_tokens < mcot.avg_total_tokens, "tokens: cot !< mcot");
    require(mcot.avg_total_tokens < prcot.avg_total_tokens, "tokens: mcot !< prcot");
    require(cot_out[0].calls.size() < mcot_out[0].calls.size(), "calls: cot !< mcot");
    require(mcot_out[0].calls.size() < prcot_out[0].calls.size(), "calls: mcot !< prcot");

    // Reference figures (450 < 800 < 2100) are annotations, never asserted.
    auto rows = compare_methods(ledger);
    require(rows.size() == 3, "expected a comparison row per method");
}

// ---------------------------------------------------------------------------
// 7. Determinism and replay
// ---------------------------------------------------------------------------

struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};

    LocalServer() {
        server.Post("/v1/chat/completions",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        ++hits;
                        ojson body = ojson::parse(req.body);
                        std::string prompt = body["messages"].back()["content"];
                        // Scripted answers keyed on the CASE marker in the prompt.
                        std::string reply = "remote reasoning.\nFINAL ANSWER: unknown";
                        const auto marker = prompt.find("CASE[");
                        if (marker != std::string::npos) {
                            const auto end = prompt.find(']', marker);
                            const std::string id =
                                prompt.substr(marker + 5, end - marker - 5);
                            reply = "remote reasoning for case " + id + ".\nFINAL ANSWER: " +
                                    std::to_string(2 * std::atoi(id.c_str()));
                        }
                        ojson out{{"choices", ojson::array({ojson{{"message",
                                                                   ojson{{"role", "assistant"},
                                                                         {"content", reply}}}}})},
                                  {"usage", ojson{{"prompt_tokens", 42},
                                                  {"completion_tokens", 17}}}};
                        res.set_content(out.dump(), "application/json");
                    });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        thread.join();
    }
};

void criterion_determinism_replay() {
    setenv("PRCOT_API_KEY", "acceptance-key", 1);
    auto dir = testfx::make_temp_dir("prcot_acceptance_replay");
    const std::string record_path = (dir / "session.jsonl").string();
    const int n = 6;
    auto tasks = testfx::counting_tasks(n);

    int recorded_hits = 0;
    {
        LocalServer server;
        BackendSpec spec;
        spec.kind = BackendKind::remote;
        spec.model = "test-model";
        spec.endpoint = "http://127.0.0.1:" + std::to_string(server.port);
        spec.max_retries = 2;
        spec.retry_base_delay_ms = 1;
        spec.record_path = record_path;
        spec.cache = false;

        PipelineConfig config = testfx::base_config(Method::cot, {});
        config.backend = spec;
        Pipeline pipeline(config, PromptLibrary::builtin(), make_backend(spec));
        auto transcripts = pipeline.run_batch(tasks);
        for (const auto& t : transcripts) {
            require(t.succeeded(), "recording run failed for " + t.task_id);
        }
        recorded_hits = server.hits.load();
        require(recorded_hits == n, "expected one network call per task while recording");
    }
    // Server is now down: any further completion must come from the store.

    BackendSpec replay_spec;
    replay_spec.kind = BackendKind::replay;
    replay_spec.model = "test-model";
    replay_spec.record_path = record_path;
    replay_spec.cache = false;

    PipelineConfig replay_config = testfx::base_config(Method::cot, {});
    replay_config.backend = replay_spec;

    auto replay_once = [&](const std::string& out_path) {
        Pipeline pipeline(replay_config, PromptLibrary::builtin(), make_backend(replay_spec));
        auto transcripts = pipeline.run_batch(tasks);
        for (const auto& t : transcripts) {
            require(t.succeeded(), "replay run failed for " + t.task_id);
        }
        write_transcript_archive(out_path, transcripts);
    };
    const std::string first = (dir / "replay1.jsonl").string();
    const std::string second = (dir / "replay2.jsonl").string();
    replay_once(first);
    replay_once(second);

    require(archive_payload_bytes(first) == archive_payload_bytes(second),
            "replay archives differ (timestamps excluded)");

    // Unrecorded requests must fail rather than silently reach the network.
    auto replay_backend = make_backend(replay_spec);
    CompletionRequest unseen;
    unseen.model = "test-model";
    unseen.messages = {{Role::user, "never recorded"}};
    unseen.purpose = PurposeTag::initial();
    bool missed = false;
    try {
        replay_backend->complete(unseen);
    } catch (const ReplayMissError&) {
        missed = true;
    }
    require(missed, "replay miss did not raise");
    fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// 8. Judge protocol
// ---------------------------------------------------------------------------

void criterion_judge_protocol() {
    enum class Expected { consistent, inconsistent, parse_error };
    struct Case {
        std::string cot;
        std::string first_reply;
        Expected expected;
    };

    std::vector<Case> cases;
    const std::vector<std::string> consistent_shapes = {
        "VERDICT: CONSISTENT the steps line up",
        "Considering everything...\nVERDICT: CONSISTENT\nno contradictions surfaced",
        "noise before the token VERDICT: CONSISTENT and noise after",
        "  \t VERDICT:    CONSISTENT rationale with   spacing",
    };
    const std::vector<std::string> inconsistent_shapes = {
        "VERDICT: INCONSISTENT step 3 contradicts step 1",
        "Preliminary thoughts.\nVERDICT: INCONSISTENT\ntrailing commentary",
        "hedging first... VERDICT: INCONSISTENT because of a circular argument",
        "VERDICT:\tINCONSISTENT (tab separated)",
    };
    for (int i = 0; i < 12; ++i) {
        cases.push_back({"JCASE[" + std::to_string(cases.size()) + "] trace",
                         consistent_shapes[i % consistent_shapes.size()], Expected::consistent});
    }
    for (int i = 0; i < 12; ++i) {
        cases.push_back({"JCASE[" + std::to_string(cases.size()) + "] trace",
                         inconsistent_shapes[i % inconsistent_shapes.size()],
                         Expected::inconsistent});
    }
    for (int i = 0; i < 3; ++i) {  // recover on the re-ask
        cases.push_back({"JCASE[" + std::to_string(cases.size()) + "] trace",
                         "garble-recoverable with no token", Expected::consistent});
    }
    for (int i = 0; i < 3; ++i) {  // exhaust both attempts
        cases.push_back({"JCASE[" + std::to_string(cases.size()) + "] trace",
                         "garble-hopeless with no token", Expected::parse_error});
    }
    require(cases.size() == 30, "fixture must hold 30 cases");

    std::vector<MockRule> rules;
    // Re-ask requests embed the first reply; key the second-round behavior on it.
    rules.push_back({PurposeTag::Kind::judge, std::nullopt, "garble-recoverable",
                     "VERDICT: CONSISTENT after the format reminder", false});
    rules.push_back({PurposeTag::Kind::judge, std::nullopt, "garble-hopeless",
                     "still not a verdict", false});
    for (size_t i = 0; i < cases.size(); ++i) {
        rules.push_back({PurposeTag::Kind::judge, std::nullopt,
                         "JCASE[" + std::to_string(i) + "]", cases[i].first_reply, false});
    }

    JudgeConfig judge;
    judge.backend = std::make_shared<MockBackend>(rules);
    judge.model = "mock-model";
    judge.prompt = PromptLibrary::builtin().judge_template();

    int matched = 0;
    for (size_t i = 0; i < cases.size(); ++i) {
        TaskInstance task{"judge_case_" + std::to_string(i), TaskKind::custom, "q", std::nullopt};
        RunTranscript t;
        t.task_id = task.id;
        t.final = ReasoningArtifact{cases[i].cot, std::nullopt, ArtifactStage::refined};

        Expected got;
        try {
            got = judge_consistency(task, t, judge).consistent ? Expected::consistent
                                                               : Expected::inconsistent;
        } catch (const JudgeParseError&) {
            got = Expected::parse_error;
        }
        if (got == cases[i].expected) {
            ++matched;
        }
    }
    require(matched == 30, "judge protocol matched " + std::to_string(matched) + "/30 cases");
}

// ---------------------------------------------------------------------------
// 9. Answer-extraction fuzz
// ---------------------------------------------------------------------------

std::optional<std::string> oracle_extract(const std::string& text, const std::string& marker) {
    std::optional<size_t> last;
    for (size_t pos = text.find(marker); pos != std::string::npos;
         pos = text.find(marker, pos + 1)) {
        last = pos;
    }
    if (!last) return std::nullopt;
    size_t start = *last + marker.size();
    size_t end = start;
    while (end < text.size() && text[end] != '\n') ++end;
    while (start < end && std::isspace(static_cast<unsigned char>(text[start]))) ++start;
    while (end > start && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return text.substr(start, end - start);
}

void criterion_extraction_fuzz() {
    const std::string marker = "FINAL ANSWER:";
    std::mt19937 rng(0xFADE);
    std::uniform_int_distribution<int> piece_count(0, 16);
    std::uniform_int_distribution<int> piece_kind(0, 6);

    for (int round = 0; round < 1000; ++round) {
        std::string text;
        const int pieces = piece_count(rng);
        for (int i = 0; i < pieces; ++i) {
            switch (piece_kind(rng)) {
                case 0: text += marker; break;
                case 1: text += "FINAL"; break;
                case 2: text += " ANSWER:"; break;
                case 3: text += '\n'; break;
                case 4: text += "  "; break;
                case 5: text += std::to_string(rng() % 1000); break;
                default: {
                    const int len = static_cast<int>(rng() % 7);
                    for (int k = 0; k < len; ++k) text += static_cast<char>('a' + rng() % 26);
                    break;
                }
            }
        }
        const auto expected = oracle_extract(text, marker);
        const auto got = extract_answer(text, marker);
        if (expected != got) {
            throw CheckFailure("fuzz case " + std::to_string(round) + " diverged on: " + text);
        }
    }
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void()> body;
    };
    const std::vector<Criterion> criteria = {
        {"criterion 1: call-count law (1 / 3 / N+2 calls, < 5 s)", criterion_call_count_law},
        {"criterion 2: baseline reduction (prcot with empty set == cot)",
         criterion_baseline_reduction},
        {"criterion 3: ECR oracle equivalence (100 seeds x 50 transcripts)",
         criterion_ecr_oracle},
        {"criterion 4: flaw-correction matrix (8/8 full, (8-k)/8 drops)", criterion_flaw_matrix},
        {"criterion 5: incremental monotonicity (order v1, v2, v4, v3)",
         criterion_incremental_monotonicity},
        {"criterion 6: efficiency ordering and accounting conservation",
         criterion_efficiency_ordering},
        {"criterion 7: determinism and replay (offline, byte-identical)",
         criterion_determinism_replay},
        {"criterion 8: judge protocol (30-case verdict fixture)", criterion_judge_protocol},
        {"criterion 9: answer-extraction fuzz (1000 completions)", criterion_extraction_fuzz},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        try {
            criterion.body();
            std::printf("[PASS] %s\n", criterion.name);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("[FAIL] %s\n       %s\n", criterion.name, e.what());
        }
        std::fflush(stdout);
    }
    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
