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

#ifndef T2L_ORCHESTRATOR_HPP_
#define T2L_ORCHESTRATOR_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "t2l/backend.hpp"
#include "t2l/llm.hpp"
#include "t2l/metrics.hpp"

namespace t2l {

struct RunConfig {
    std::string model = "replay";
    double temperature = 0.2;
    long seed = 1;
    std::optional<std::string> reasoning_effort;
    int k_divergence = 3;
    int max_rounds = 3;
    double tau_solved = 0.5;
    double budget_usd = 1.0;
    bool ata_enabled = true;
    bool refinement_enabled = true;
    bool divergence_enabled = true;
    bool static_findings_enabled = false;
    int top_n_seeds = 10;
    long slice_context = 10;
    int refine_top_m = 5;
    std::map<std::string, PriceEntry> price_table;
    std::vector<std::vector<std::string>> analyzers;
    // per-run artifact directory (runs/<case_id>/...); empty disables writes
    std::filesystem::path artifacts_dir;
};

enum class RunOutcomeKind {
    kSuccess,
    kBudgetExceeded,
    kExecutionError,
    kNoActionableCandidates,
    kDataOperationFailure,
};

std::string to_string(RunOutcomeKind kind);

struct RunOutcome {
    RunOutcomeKind variant = RunOutcomeKind::kSuccess;
    std::string detail;
};

struct RoundSummary {
    int round = 0;
    int new_candidates = 0;
    int verified_count = 0;
    double best_confidence = 0.0;
    double budget_spent = 0.0;
    std::string decision; // "continue" | "stop"
};

struct RunResult {
    CaseMetrics metrics;
    RunOutcome outcome;
    std::vector<RoundSummary> summaries;
};

// Aggregated failure signals a finished (or aborted) run classifies from.
struct RunFlags {
    bool budget_exceeded = false;
    bool execution_error = false;
    bool data_failure = false;
    long decodable_candidates = 0;
    bool metrics_computed = false;
    std::string detail;
};

// Fixed precedence: BudgetExceeded > ExecutionError > DataOperationFailure >
// NoActionableCandidates > Success.
RunOutcome classify_outcome(const RunFlags& flags);

// Mutable state threaded through the planner-executor loop. Ground-truth
// data (index, marked chunks) lives here for scoring only and never reaches
// a prompt.
struct RunState {
    ChunkSet marked;
    GroundTruth gt;
    DiffIndex index;
    CrashReport report;
    bool have_report = false;
    std::vector<Candidate> seeds;
    std::vector<Candidate> pool;
    std::vector<VerifiedCandidate> verified;
    CaseMetrics metrics;
    bool metrics_computed = false;
    std::vector<RoundSummary> summaries;
    bool budget_hit = false;
    long decodable_candidates = 0;
    // last round's artifacts, for persistence
    Prompt last_prompt;
    std::vector<std::string> last_responses;
};

// One refinement pass: slices around the top candidates are reread, new
// hypotheses merge into the pool, candidates are re-verified and the case is
// rescored. Returns false without touching the state when no slices are
// available or the budget is already exhausted (the latter also marks
// budget_hit).
bool refine_round(RunState& state, const CaseEntry& entry, const RunConfig& cfg,
    LlmProvider& provider, BudgetLedger& ledger);

// continue iff round < max_rounds, budget not exceeded, and the last round
// either added a verified candidate or improved best confidence by >= 0.05.
bool planner_decide(const std::vector<RoundSummary>& summaries, const RunConfig& cfg);

// Runs one case end to end: chunk, index the ground-truth diff, collect
// runtime evidence (when ata_enabled), analyze with divergence, verify,
// score, refine under planner control and budget. Failures surface as
// outcome variants, never as exceptions.
RunResult run_case(const CaseEntry& entry, const RunConfig& cfg, ExecutionBackend& backend,
    LlmProvider& provider);

// Single evidence-free guess (file listing only): one completion, one
// extraction, no verification or refinement, scored identically.
RunResult baseline_run(const CaseEntry& entry, const RunConfig& cfg, LlmProvider& provider);

} // namespace t2l

#endif // T2L_ORCHESTRATOR_HPP_
