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

#include "t2l/orchestrator.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "t2l/error.hpp"
#include "t2l/evidence.hpp"
#include "t2l/providers.hpp"

namespace t2l {

std::string to_string(RunOutcomeKind kind)
{
    switch (kind) {
    case RunOutcomeKind::kSuccess:
        return "Success";
    case RunOutcomeKind::kBudgetExceeded:
        return "BudgetExceeded";
    case RunOutcomeKind::kExecutionError:
        return "ExecutionError";
    case RunOutcomeKind::kNoActionableCandidates:
        return "NoActionableCandidates";
    case RunOutcomeKind::kDataOperationFailure:
        return "DataOperationFailure";
    }
    return "?";
}

RunOutcome classify_outcome(const RunFlags& flags)
{
    RunOutcome outcome;
    outcome.detail = flags.detail;
    if (flags.budget_exceeded)
        outcome.variant = RunOutcomeKind::kBudgetExceeded;
    else if (flags.execution_error)
        outcome.variant = RunOutcomeKind::kExecutionError;
    else if (flags.data_failure)
        outcome.variant = RunOutcomeKind::kDataOperationFailure;
    else if (flags.decodable_candidates == 0)
        outcome.variant = RunOutcomeKind::kNoActionableCandidates;
    else
        outcome.variant = RunOutcomeKind::kSuccess;
    return outcome;
}

bool planner_decide(const std::vector<RoundSummary>& summaries, const RunConfig& cfg)
{
    if (summaries.empty())
        throw ContractViolation("planner_decide needs at least one round summary");
    const RoundSummary& last = summaries.back();
    if (last.round >= cfg.max_rounds)
        return false;
    if (last.budget_spent > cfg.budget_usd)
        return false;
    if (last.new_candidates >= 1)
        return true;
    double previous_best = summaries.size() >= 2
        ? summaries[summaries.size() - 2].best_confidence
        : 0.0;
    return last.best_confidence - previous_best >= 0.05;
}

namespace {

    std::string read_text_file(const std::filesystem::path& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw IoError("cannot read " + path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    void write_text_file(const std::filesystem::path& path, const std::string& text)
    {
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        out << text;
    }

    class ArtifactSink {
    public:
        explicit ArtifactSink(std::filesystem::path dir)
            : dir_(std::move(dir))
        {
        }

        bool enabled() const { return !dir_.empty(); }

        void write_round(const RunState& state) const
        {
            if (!enabled() || state.summaries.empty())
                return;
            const RoundSummary& summary = state.summaries.back();
            std::filesystem::path round_dir = dir_ / std::to_string(summary.round);
            write_text_file(round_dir / "prompt.txt",
                "SYSTEM:\n" + state.last_prompt.system + "\n\nUSER:\n"
                    + render_prompt(state.last_prompt));
            for (size_t i = 0; i < state.last_responses.size(); ++i)
                write_text_file(round_dir / ("response_" + std::to_string(i) + ".txt"),
                    state.last_responses[i]);
            write_text_file(round_dir / "candidates.json", candidates_to_json(state.pool));
            write_text_file(round_dir / "verified_locations.json",
                verified_to_json(state.verified));
            nlohmann::ordered_json j;
            j["round"] = summary.round;
            j["new_candidates"] = summary.new_candidates;
            j["verified_count"] = summary.verified_count;
            j["best_confidence"] = summary.best_confidence;
            j["budget_spent"] = summary.budget_spent;
            j["decision"] = summary.decision;
            write_text_file(round_dir / "summary.json", j.dump(2));
        }

        void write_final(const CaseMetrics& metrics, bool metrics_computed,
            const RunOutcome& outcome) const
        {
            if (!enabled())
                return;
            if (metrics_computed)
                write_text_file(dir_ / "metrics.json", metrics_to_json(metrics));
            nlohmann::ordered_json j;
            j["variant"] = to_string(outcome.variant);
            j["detail"] = outcome.detail;
            write_text_file(dir_ / "outcome.json", j.dump(2));
        }

    private:
        std::filesystem::path dir_;
    };

    // Chunks the tree and indexes the ground-truth patch. Throws t2l::Error
    // subtypes on any data failure.
    void prepare_case_data(const CaseEntry& entry, RunState& state)
    {
        ChunkSet chunks = chunk_source_tree(entry.source_root);
        PatchModel patch = parse_unified_diff(read_text_file(entry.ground_truth_diff));
        state.index = build_diff_index(patch);
        state.gt = ground_truth_from(state.index);
        if (state.gt.total_lines() == 0)
            throw NoGroundTruth("case " + entry.id + ": patch touches no old-file lines");
        MarkDiffResult mark = mark_diff(std::move(chunks), state.index);
        state.marked = std::move(mark.chunks);
    }

    std::vector<std::string> file_listing(const ChunkSet& chunks)
    {
        std::set<std::string> files;
        for (const Chunk& c : chunks.chunks)
            files.insert(c.file_path);
        return { files.begin(), files.end() };
    }

    SamplingParams sampling_params(const RunConfig& cfg)
    {
        SamplingParams p;
        p.model = cfg.model;
        p.temperature = cfg.temperature;
        p.seed = cfg.seed;
        p.reasoning_effort = cfg.reasoning_effort;
        return p;
    }

    std::map<std::string, PriceEntry> effective_prices(const RunConfig& cfg)
    {
        std::map<std::string, PriceEntry> prices = cfg.price_table;
        prices.try_emplace(cfg.model, PriceEntry { 0.0, 0.0 });
        return prices;
    }

    int count_verified(const std::vector<VerifiedCandidate>& verified)
    {
        int n = 0;
        for (const auto& v : verified)
            if (v.verified)
                ++n;
        return n;
    }

    double best_confidence(const std::vector<VerifiedCandidate>& verified)
    {
        double best = 0.0;
        for (const auto& v : verified)
            best = std::max(best, v.confidence);
        return best;
    }

    // Appends debugger frames the sanitizer trace does not already cover.
    void fold_backtrace(CrashReport& report, const std::vector<Frame>& bt)
    {
        std::set<std::pair<std::string, long>> seen;
        for (const Frame& f : report.frames)
            if (f.file && f.line)
                seen.emplace(*f.file, *f.line);
        int next_index = static_cast<int>(report.frames.size());
        for (const Frame& f : bt) {
            if (!f.in_project || !f.file || !f.line)
                continue;
            if (!seen.emplace(*f.file, *f.line).second)
                continue;
            Frame copy = f;
            copy.index = next_index++;
            report.frames.push_back(std::move(copy));
        }
    }

    std::vector<SourceSlice> build_slices(const std::vector<VerifiedCandidate>& ranked,
        const ChunkSet& chunks, const CaseEntry& entry, const RunConfig& cfg)
    {
        std::vector<SourceSlice> slices;
        std::set<std::tuple<std::string, long, long>> seen;
        int taken = 0;
        for (const VerifiedCandidate& cand : ranked) {
            if (taken >= cfg.refine_top_m)
                break;
            long lo = cand.start_line;
            long hi = cand.end_line;
            if (const Chunk* chunk = chunks.lookup(cand.file, cand.start_line)) {
                lo = chunk->start_line;
                hi = chunk->end_line;
            }
            lo = std::max(1L, lo - cfg.slice_context);
            hi = hi + cfg.slice_context;

            NumberedSnapshot snap;
            try {
                snap = numbered_snapshot(entry.source_root, cand.file);
            } catch (const IoError&) {
                continue; // hallucinated path; nothing to reread
            }
            if (snap.lines.empty())
                continue;
            hi = std::min(hi, static_cast<long>(snap.lines.size()));
            if (lo > hi)
                continue;
            if (!seen.emplace(cand.file, lo, hi).second)
                continue;
            SourceSlice slice;
            slice.file_path = cand.file;
            for (long n = lo; n <= hi; ++n)
                slice.lines.push_back(snap.lines[static_cast<size_t>(n - 1)]);
            slices.push_back(std::move(slice));
            ++taken;
        }
        return slices;
    }

    // Issues the round's completions, merges the decoded hypotheses into the
    // pool, re-verifies and rescores. Returns false when the budget ceiling
    // aborted the round (prior state preserved).
    bool execute_round(RunState& state, const CaseEntry& entry, const RunConfig& cfg,
        LlmProvider& provider, BudgetLedger& ledger, const Prompt& prompt, int round)
    {
        DivergeHooks hooks;
        hooks.before_sample = [&state, &ledger]() {
            if (ledger.exceeded()) {
                state.budget_hit = true;
                return false;
            }
            return true;
        };
        hooks.after_sample = [&state, &ledger, &cfg](const Completion& completion) {
            if (ledger.charge(cfg.model, completion.usage))
                state.budget_hit = true;
        };

        int k = cfg.divergence_enabled ? cfg.k_divergence : 1;
        state.last_prompt = prompt;
        state.last_responses.clear();
        std::vector<Candidate> decoded;
        try {
            decoded = diverge(provider, prompt, k, sampling_params(cfg), hooks,
                &state.last_responses);
            state.decodable_candidates += static_cast<long>(decoded.size());
        } catch (const AllSamplesFailed&) {
            // a fully undecodable round still gets scored; the planner stops
        }

        if (state.budget_hit)
            return false;

        size_t pool_before = state.pool.size();
        state.pool = state.pool.empty() && round == 1
            ? merge_candidates(std::move(decoded), state.seeds)
            : merge_candidates(std::move(decoded), std::move(state.pool));
        state.verified = verify_candidates(state.pool, state.marked, entry.source_root);

        auto [metrics, updated_index] = compare_case(state.verified, state.marked, state.gt,
            std::move(state.index), cfg.tau_solved);
        state.index = std::move(updated_index);
        state.metrics = metrics;
        state.metrics_computed = true;

        RoundSummary summary;
        summary.round = round;
        // interval unions can fold two old groups into one; the pool's
        // coverage only ever grows, but its count may dip
        summary.new_candidates = std::max(0,
            static_cast<int>(state.pool.size()) - static_cast<int>(pool_before));
        summary.verified_count = count_verified(state.verified);
        summary.best_confidence = best_confidence(state.verified);
        summary.budget_spent = ledger.spent_usd();
        state.summaries.push_back(summary);
        return true;
    }

} // namespace

bool refine_round(RunState& state, const CaseEntry& entry, const RunConfig& cfg,
    LlmProvider& provider, BudgetLedger& ledger)
{
    if (ledger.exceeded()) {
        state.budget_hit = true;
        return false;
    }

    const std::vector<VerifiedCandidate>& basis = state.verified.empty()
        ? (state.verified = verify_candidates(state.seeds, state.marked, entry.source_root))
        : state.verified;
    std::vector<SourceSlice> slices = build_slices(basis, state.marked, entry, cfg);
    if (slices.empty()) {
        if (!state.summaries.empty())
            state.summaries.back().decision = "stop";
        return false;
    }

    Prompt prompt = build_prompt(state.have_report ? &state.report : nullptr, {},
        PromptMode::kRefine, slices);
    int round = state.summaries.empty() ? 1 : state.summaries.back().round + 1;
    return execute_round(state, entry, cfg, provider, ledger, prompt, round);
}

RunResult run_case(const CaseEntry& entry, const RunConfig& cfg, ExecutionBackend& backend,
    LlmProvider& provider)
{
    RunResult result;
    RunFlags flags;
    RunState state;
    BudgetLedger ledger(cfg.budget_usd, effective_prices(cfg));
    ArtifactSink artifacts(cfg.artifacts_dir);

    auto finalize = [&]() {
        flags.decodable_candidates = state.decodable_candidates;
        flags.metrics_computed = state.metrics_computed;
        if (state.budget_hit || ledger.exceeded())
            flags.budget_exceeded = true;
        result.metrics = state.metrics;
        result.summaries = state.summaries;
        result.outcome = classify_outcome(flags);
        artifacts.write_final(result.metrics, flags.metrics_computed, result.outcome);
        return result;
    };

    try {
        prepare_case_data(entry, state);
    } catch (const Error& e) {
        flags.data_failure = true;
        flags.detail = e.what();
        return finalize();
    }

    StaticFindingsResult findings;
    if (cfg.ata_enabled) {
        try {
            std::string log = run_sanitized(backend, entry);
            state.report = parse_sanitizer_report(log, entry.source_root);
            state.have_report = true;
            try {
                std::string transcript = run_debugger_script(backend, entry.vulnerable_ref,
                    entry.reproducer, { "run", "bt" }, kDefaultExecTimeout, entry.id);
                fold_backtrace(state.report, parse_backtrace(transcript, entry.source_root));
            } catch (const Error&) {
                // debugger evidence is optional
            }
            EvidenceGraph graph = correlate_evidence(state.report, state.marked);
            try {
                state.seeds = seed_candidates(graph, state.marked, cfg.top_n_seeds);
            } catch (const EmptyEvidence&) {
                // no frame landed in a chunk; the crash log alone must do
            }
        } catch (const Error& e) {
            flags.execution_error = true;
            flags.detail = e.what();
            return finalize();
        }
        if (cfg.static_findings_enabled) {
            try {
                findings = collect_static_findings(backend, entry.source_root, true,
                    cfg.analyzers);
            } catch (const Error&) {
                // advisory only
            }
        }
    }

    try {
        // round 1: crash evidence when available, a bare listing otherwise
        Prompt first = state.have_report
            ? build_prompt(&state.report, findings.findings, PromptMode::kInitial, {})
            : build_prompt(nullptr, findings.findings, PromptMode::kBaseline, {},
                  file_listing(state.marked));
        bool completed = execute_round(state, entry, cfg, provider, ledger, first, 1);
        if (completed) {
            bool keep_going = cfg.refinement_enabled && planner_decide(state.summaries, cfg);
            state.summaries.back().decision = keep_going ? "continue" : "stop";
            artifacts.write_round(state);

            while (keep_going) {
                if (!refine_round(state, entry, cfg, provider, ledger))
                    break;
                keep_going = planner_decide(state.summaries, cfg);
                state.summaries.back().decision = keep_going ? "continue" : "stop";
                artifacts.write_round(state);
            }
        }
    } catch (const ProviderError& e) {
        flags.execution_error = true;
        flags.detail = e.what();
    } catch (const NoGroundTruth& e) {
        flags.data_failure = true;
        flags.detail = e.what();
    } catch (const Error& e) {
        flags.data_failure = true;
        flags.detail = e.what();
    }

    return finalize();
}

RunResult baseline_run(const CaseEntry& entry, const RunConfig& cfg, LlmProvider& provider)
{
    RunResult result;
    RunFlags flags;
    BudgetLedger ledger(cfg.budget_usd, effective_prices(cfg));
    ArtifactSink artifacts(cfg.artifacts_dir);
    RunState state;

    try {
        prepare_case_data(entry, state);
    } catch (const Error& e) {
        flags.data_failure = true;
        flags.detail = e.what();
        result.outcome = classify_outcome(flags);
        artifacts.write_final(result.metrics, false, result.outcome);
        return result;
    }

    Prompt prompt = build_prompt(nullptr, {}, PromptMode::kBaseline, {},
        file_listing(state.marked));

    std::vector<Candidate> decoded;
    std::vector<std::string> raw_responses;
    try {
        Completion completion = provider.complete(prompt, sampling_params(cfg));
        raw_responses.push_back(completion.text);
        if (ledger.charge(cfg.model, completion.usage))
            flags.budget_exceeded = true;
        decoded = extract_candidates(completion.text);
        flags.decodable_candidates = static_cast<long>(decoded.size());
    } catch (const ExtractionFailed&) {
        // zero decodable candidates
    } catch (const ProviderError& e) {
        flags.execution_error = true;
        flags.detail = e.what();
    }

    // no verification pass: original lines stand as claimed
    std::vector<VerifiedCandidate> wrapped;
    for (const Candidate& c : decoded) {
        VerifiedCandidate v;
        static_cast<Candidate&>(v) = c;
        v.anchored_by = AnchorKind::kFallbackOriginal;
        v.verified = false;
        v.original_interval = { c.start_line, c.end_line };
        wrapped.push_back(std::move(v));
    }

    if (!flags.execution_error) {
        try {
            auto [metrics, updated_index] = compare_case(wrapped, state.marked, state.gt,
                std::move(state.index), cfg.tau_solved);
            result.metrics = metrics;
            flags.metrics_computed = true;
        } catch (const NoGroundTruth& e) {
            flags.data_failure = true;
            flags.detail = e.what();
        }
    }

    state.pool = decoded;
    state.verified = wrapped;
    state.last_prompt = prompt;
    state.last_responses = raw_responses;
    RoundSummary summary;
    summary.round = 1;
    summary.new_candidates = static_cast<int>(decoded.size());
    summary.verified_count = 0;
    summary.best_confidence = best_confidence(wrapped);
    summary.budget_spent = ledger.spent_usd();
    summary.decision = "stop";
    state.summaries.push_back(summary);
    result.summaries = state.summaries;

    result.outcome = classify_outcome(flags);
    artifacts.write_round(state);
    artifacts.write_final(result.metrics, flags.metrics_computed, result.outcome);
    return result;
}

} // namespace t2l
