// Copyright 2025 The T2L Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support/fakes.hpp"
#include "t2l/corpus.hpp"
#include "t2l/error.hpp"
#include "t2l/orchestrator.hpp"
#include "t2l/providers.hpp"

using namespace t2l;
using t2l::testing::CountingBackend;
using t2l::testing::FailingBackend;
using t2l::testing::ScriptedProvider;

namespace {

std::filesystem::path toyproj() { return t2l::testing::fixture_dir() / "toyproj"; }

CaseEntry toy_case()
{
    auto cases = load_manifest(toyproj() / "manifest.json");
    REQUIRE(cases.size() == 1);
    return cases[0];
}

RunConfig replay_config()
{
    RunConfig cfg;
    cfg.model = "scripted";
    cfg.seed = 1;
    cfg.k_divergence = 3;
    cfg.max_rounds = 2;
    cfg.tau_solved = 0.5;
    cfg.budget_usd = 1.0;
    return cfg;
}

// The crash fires in decode_records but the defect is the unvalidated count
// coming out of read_count (lines 7..10). Round 1: two samples agree on a
// partial interval there, one stays at the crash site; round 2 (refine)
// produces the exact ground-truth interval 7..10.
std::string toy_script(const Prompt& prompt, const SamplingParams& params)
{
    long variant = params.seed % 3;
    if (prompt.mode == PromptMode::kInitial) {
        if (variant != 0)
            return R"([{"file":"src/decoder.c","symbol":"read_count","start_line":9,
                        "end_line":10,"confidence":0.7,
                        "rationale":"record count never validated: `return buf[pos];`"}])";
        return R"([{"file":"src/decoder.c","symbol":"decode_records","start_line":21,
                    "end_line":23,"confidence":0.4,
                    "rationale":"crash site `out[produced] = tag * 256 + i;`"}])";
    }
    if (prompt.mode == PromptMode::kRefine) {
        if (variant == 2)
            return "I see nothing new.";
        return R"([{"file":"src/decoder.c","symbol":"read_count","start_line":7,
                    "end_line":10,"confidence":0.9,
                    "rationale":"whole bounds path `if (pos >= len) {` lacks an upper clamp"}])";
    }
    return "[]";
}

} // namespace

TEST_CASE("planner_decide follows the round/budget/progress rule")
{
    RunConfig cfg;
    cfg.max_rounds = 3;
    cfg.budget_usd = 1.0;

    SUBCASE("progress means continue")
    {
        std::vector<RoundSummary> s = { { 1, 2, 2, 0.7, 0.1, "" } };
        CHECK(planner_decide(s, cfg));
    }
    SUBCASE("no new candidates and flat confidence means stop")
    {
        std::vector<RoundSummary> s = { { 1, 3, 3, 0.7, 0.1, "" }, { 2, 0, 3, 0.7, 0.2, "" } };
        CHECK_FALSE(planner_decide(s, cfg));
    }
    SUBCASE("confidence jump alone keeps going")
    {
        std::vector<RoundSummary> s = { { 1, 1, 1, 0.5, 0.1, "" }, { 2, 0, 1, 0.56, 0.2, "" } };
        CHECK(planner_decide(s, cfg));
    }
    SUBCASE("round cap always stops")
    {
        std::vector<RoundSummary> s = { { 1, 1, 1, 0.5, 0.1, "" }, { 2, 1, 2, 0.6, 0.2, "" },
            { 3, 5, 7, 0.9, 0.3, "" } };
        CHECK_FALSE(planner_decide(s, cfg));
    }
    SUBCASE("budget exhaustion stops")
    {
        std::vector<RoundSummary> s = { { 1, 5, 5, 0.9, 1.5, "" } };
        CHECK_FALSE(planner_decide(s, cfg));
    }
}

TEST_CASE("classify_outcome precedence")
{
    RunFlags flags;
    flags.decodable_candidates = 3;
    flags.metrics_computed = true;
    CHECK(classify_outcome(flags).variant == RunOutcomeKind::kSuccess);

    flags.data_failure = true;
    CHECK(classify_outcome(flags).variant == RunOutcomeKind::kDataOperationFailure);

    flags.execution_error = true;
    CHECK(classify_outcome(flags).variant == RunOutcomeKind::kExecutionError);

    flags.budget_exceeded = true; // trumps everything
    CHECK(classify_outcome(flags).variant == RunOutcomeKind::kBudgetExceeded);

    RunFlags none;
    none.decodable_candidates = 0;
    CHECK(classify_outcome(none).variant == RunOutcomeKind::kNoActionableCandidates);

    // ledger exceeded mid-run plus a later parse error stays BudgetExceeded
    RunFlags both;
    both.budget_exceeded = true;
    both.data_failure = true;
    CHECK(classify_outcome(both).variant == RunOutcomeKind::kBudgetExceeded);
}

TEST_CASE("run_case on the replay fixture reaches full detection and localization")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();
    ReplayExecBackend backend(toyproj() / "logs", entry.source_root);
    ScriptedProvider provider(toy_script);

    RunResult result = run_case(entry, cfg, backend, provider);

    CHECK(result.outcome.variant == RunOutcomeKind::kSuccess);
    CHECK(result.metrics.detection == 1.0);
    CHECK(result.metrics.localization == 1.0);
    CHECK(result.metrics.strict == 1.0);
    CHECK(result.metrics.solved);
    REQUIRE(result.summaries.size() == 2);
    CHECK(result.summaries[0].round == 1);
    CHECK(result.summaries[0].new_candidates >= 1);
    CHECK(result.summaries[1].decision == "stop");
    // round 2 strictly improved localization over round 1
    CHECK(result.summaries[1].verified_count >= result.summaries[0].verified_count);
}

TEST_CASE("run_case round 1 alone scores partial localization")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();
    cfg.max_rounds = 1;
    ReplayExecBackend backend(toyproj() / "logs", entry.source_root);
    ScriptedProvider provider(toy_script);

    RunResult result = run_case(entry, cfg, backend, provider);
    CHECK(result.outcome.variant == RunOutcomeKind::kSuccess);
    CHECK(result.metrics.detection == 1.0);
    CHECK(result.metrics.localization == doctest::Approx(0.5)); // 2 of 4 gt lines
    CHECK(result.metrics.strict == 0.0);
}

TEST_CASE("refinement can be disabled: single round only")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();
    cfg.refinement_enabled = false;
    ReplayExecBackend backend(toyproj() / "logs", entry.source_root);
    ScriptedProvider provider(toy_script);

    RunResult result = run_case(entry, cfg, backend, provider);
    CHECK(result.summaries.size() == 1);
    CHECK(result.metrics.localization == doctest::Approx(0.5));
}

TEST_CASE("ATA ablation: no evidence, zero scores, zero backend calls")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();
    cfg.ata_enabled = false;

    CountingBackend backend(entry.source_root);
    ScriptedProvider provider([](const Prompt& prompt, const SamplingParams&) {
        // evidence-free replay: the model guesses the wrong file
        CHECK(prompt.mode != PromptMode::kInitial);
        for (const Attachment& a : prompt.attachments)
            CHECK(a.label != "crash-log");
        return std::string(
            R"([{"file":"src/util.c","symbol":"util_max","start_line":8,"end_line":10,
                "confidence":0.4,"rationale":"guess"}])");
    });

    RunResult result = run_case(entry, cfg, backend, provider);
    CHECK(result.metrics.detection == 0.0);
    CHECK(result.metrics.localization == 0.0);
    CHECK(backend.run_calls == 0);
    CHECK(backend.san_requests == 0);
    CHECK(backend.gdb_requests == 0);
}

TEST_CASE("undecodable responses across all rounds classify NoActionableCandidates")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();
    ReplayExecBackend backend(toyproj() / "logs", entry.source_root);
    ScriptedProvider provider(
        [](const Prompt&, const SamplingParams&) { return std::string("I cannot help."); });

    RunResult result = run_case(entry, cfg, backend, provider);
    // evidence seeds still score, but zero decodable model output wins the
    // outcome classification
    CHECK(result.outcome.variant == RunOutcomeKind::kNoActionableCandidates);
}

TEST_CASE("backend failure classifies ExecutionError")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();
    FailingBackend backend(entry.source_root);
    ScriptedProvider provider(toy_script);

    RunResult result = run_case(entry, cfg, backend, provider);
    CHECK(result.outcome.variant == RunOutcomeKind::kExecutionError);
}

TEST_CASE("malformed ground-truth diff classifies DataOperationFailure")
{
    CaseEntry entry = toy_case();
    entry.ground_truth_diff = toyproj() / "manifest.json"; // not a diff
    RunConfig cfg = replay_config();
    ReplayExecBackend backend(toyproj() / "logs", entry.source_root);
    ScriptedProvider provider(toy_script);

    RunResult result = run_case(entry, cfg, backend, provider);
    CHECK(result.outcome.variant == RunOutcomeKind::kDataOperationFailure);
}

TEST_CASE("budget ceiling halts the run with bounded overshoot")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();
    cfg.max_rounds = 3;
    cfg.budget_usd = 1.0;
    // every call costs $0.30: usage 20000+10000 tokens at $0.01/1k
    cfg.price_table = { { "scripted", { 0.01, 0.01 } } };
    ReplayExecBackend backend(toyproj() / "logs", entry.source_root);
    ScriptedProvider provider(toy_script, Usage { 20000, 10000 });

    RunResult result = run_case(entry, cfg, backend, provider);
    CHECK(result.outcome.variant == RunOutcomeKind::kBudgetExceeded);
    // 3 samples in round 1 ($0.90), one refine sample lands ($1.20), stop
    CHECK(provider.calls == 4);
    double spent = result.summaries.empty() ? 1.2 : result.summaries.back().budget_spent;
    CHECK(spent <= cfg.budget_usd + 0.30 + 1e-9);
    // round 1 completed and was scored before the ceiling hit
    REQUIRE(result.summaries.size() == 1);
    CHECK(result.metrics.detection == 1.0);
}

TEST_CASE("run_case trace is identical across repeated replay executions")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();

    auto run_once = [&]() {
        ReplayExecBackend backend(toyproj() / "logs", entry.source_root);
        ScriptedProvider provider(toy_script);
        return run_case(entry, cfg, backend, provider);
    };
    RunResult a = run_once();
    RunResult b = run_once();

    CHECK(a.outcome.variant == b.outcome.variant);
    CHECK(a.metrics.detection == b.metrics.detection);
    CHECK(a.metrics.localization == b.metrics.localization);
    REQUIRE(a.summaries.size() == b.summaries.size());
    for (size_t i = 0; i < a.summaries.size(); ++i) {
        CHECK(a.summaries[i].new_candidates == b.summaries[i].new_candidates);
        CHECK(a.summaries[i].best_confidence == b.summaries[i].best_confidence);
        CHECK(a.summaries[i].budget_spent == b.summaries[i].budget_spent);
        CHECK(a.summaries[i].decision == b.summaries[i].decision);
    }
}

TEST_CASE("baseline_run: single evidence-free guess, scored identically")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();

    SUBCASE("wrong-file guess scores zero but succeeds")
    {
        ScriptedProvider provider([](const Prompt& prompt, const SamplingParams&) {
            CHECK(prompt.mode == PromptMode::kBaseline);
            return std::string(
                R"([{"file":"src/util.c","start_line":4,"end_line":6,"confidence":0.4}])");
        });
        RunResult result = baseline_run(entry, cfg, provider);
        CHECK(result.outcome.variant == RunOutcomeKind::kSuccess);
        CHECK(result.metrics.detection == 0.0);
        CHECK(result.metrics.localization == 0.0);
        CHECK(provider.calls == 1); // no divergence, no refinement
    }

    SUBCASE("baseline never beats the full pipeline on the same recordings")
    {
        ScriptedProvider baseline_provider([](const Prompt&, const SamplingParams&) {
            return std::string(
                R"([{"file":"src/decoder.c","start_line":22,"end_line":23,"confidence":0.6}])");
        });
        RunResult base = baseline_run(entry, cfg, baseline_provider);

        ReplayExecBackend backend(toyproj() / "logs", entry.source_root);
        ScriptedProvider full_provider(toy_script);
        RunResult full = run_case(entry, cfg, backend, full_provider);

        CHECK(base.metrics.detection <= full.metrics.detection);
        CHECK(base.metrics.localization <= full.metrics.localization);
    }

    SUBCASE("undecodable single response")
    {
        ScriptedProvider provider(
            [](const Prompt&, const SamplingParams&) { return std::string("no idea"); });
        RunResult result = baseline_run(entry, cfg, provider);
        CHECK(result.outcome.variant == RunOutcomeKind::kNoActionableCandidates);
    }

    SUBCASE("case without usable ground truth is a DataOperationFailure")
    {
        CaseEntry broken = entry;
        broken.ground_truth_diff = toyproj() / "manifest.json";
        ScriptedProvider provider(
            [](const Prompt&, const SamplingParams&) { return std::string("[]"); });
        RunResult result = baseline_run(broken, cfg, provider);
        CHECK(result.outcome.variant == RunOutcomeKind::kDataOperationFailure);
    }
}

TEST_CASE("refine_round contract")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();
    BudgetLedger ledger(cfg.budget_usd, { { "scripted", { 0.0, 0.0 } } });

    // build a round-1-shaped state by hand
    RunState state;
    {
        ChunkSet chunks = chunk_source_tree(entry.source_root);
        std::ifstream diff_in(entry.ground_truth_diff);
        std::stringstream buf;
        buf << diff_in.rdbuf();
        PatchModel patch = parse_unified_diff(buf.str());
        state.index = build_diff_index(patch);
        state.gt = ground_truth_from(state.index);
        state.marked = mark_diff(std::move(chunks), state.index).chunks;
    }
    Candidate partial;
    partial.file = "src/decoder.c";
    partial.symbol = "read_count";
    partial.start_line = 9;
    partial.end_line = 10;
    partial.confidence = 0.7;
    state.pool = { partial };
    state.verified = verify_candidates(state.pool, state.marked, entry.source_root);
    auto [m, idx] = compare_case(state.verified, state.marked, state.gt,
        std::move(state.index), cfg.tau_solved);
    state.index = std::move(idx);
    state.metrics = m;
    state.metrics_computed = true;
    state.summaries.push_back({ 1, 1, 1, 0.7, 0.0, "continue" });

    SUBCASE("a productive refine strictly increases localization")
    {
        CHECK(state.metrics.localization == doctest::Approx(0.5));
        ScriptedProvider provider(toy_script);
        bool ran = refine_round(state, entry, cfg, provider, ledger);
        CHECK(ran);
        CHECK(state.metrics.localization == 1.0);
        CHECK(state.summaries.size() == 2);
        CHECK(state.summaries.back().round == 2);
    }

    SUBCASE("zero slices available: state unchanged, decision stop")
    {
        // strand the pool in a file that does not exist on disk
        state.pool[0].file = "src/phantom.c";
        state.pool[0].symbol = std::nullopt;
        state.verified = verify_candidates(state.pool, state.marked, entry.source_root);
        size_t pool_before = state.pool.size();
        ScriptedProvider provider(toy_script);
        bool ran = refine_round(state, entry, cfg, provider, ledger);
        CHECK_FALSE(ran);
        CHECK(provider.calls == 0);
        CHECK(state.pool.size() == pool_before);
        CHECK(state.summaries.back().decision == "stop");
    }

    SUBCASE("budget exhausted before the call: unchanged state, budget flag")
    {
        BudgetLedger broke(0.01, { { "scripted", { 1.0, 1.0 } } });
        broke.charge("scripted", { 1000, 1000 }); // now exceeded
        ScriptedProvider provider(toy_script);
        bool ran = refine_round(state, entry, cfg, provider, broke);
        CHECK_FALSE(ran);
        CHECK(provider.calls == 0);
        CHECK(state.budget_hit);
        CHECK(state.summaries.size() == 1);
        CHECK(state.metrics.localization == doctest::Approx(0.5));
    }
}

TEST_CASE("run artifacts land in the configured directory")
{
    CaseEntry entry = toy_case();
    RunConfig cfg = replay_config();
    auto dir = std::filesystem::temp_directory_path() / "t2l_artifacts_test";
    std::filesystem::remove_all(dir);
    cfg.artifacts_dir = dir / entry.id;

    ReplayExecBackend backend(toyproj() / "logs", entry.source_root);
    ScriptedProvider provider(toy_script);
    RunResult result = run_case(entry, cfg, backend, provider);
    CHECK(result.outcome.variant == RunOutcomeKind::kSuccess);

    for (const char* f : { "1/prompt.txt", "1/response_0.txt", "1/response_2.txt",
             "1/candidates.json", "1/verified_locations.json", "1/summary.json",
             "2/prompt.txt", "metrics.json", "outcome.json" })
        CHECK(std::filesystem::exists(cfg.artifacts_dir / f));
}
