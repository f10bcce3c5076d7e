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

#ifndef T2L_LLM_HPP_
#define T2L_LLM_HPP_

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "t2l/ata.hpp"
#include "t2l/backend.hpp"

namespace t2l {

enum class PromptMode { kInitial, kRefine, kBaseline };

std::string to_string(PromptMode mode);

struct Attachment {
    std::string label;
    std::string text;
};

struct Prompt {
    std::string system;
    std::string user;
    PromptMode mode = PromptMode::kInitial;
    std::vector<Attachment> attachments; // ordered: crash log, findings, slices
};

// A numbered excerpt of one source file handed to refine prompts.
struct SourceSlice {
    std::string file_path;
    std::vector<std::pair<long, std::string>> lines; // (1-based number, text)
};

enum class CandidateSource { kAtaSeed, kLlm };

std::string to_string(CandidateSource source);

// A proposed vulnerability location. Intervals are 1-based inclusive line
// spans; confidence is clamped to [0,1] on ingest.
struct Candidate {
    std::string file;
    std::optional<std::string> symbol;
    long start_line = 1;
    long end_line = 1;
    double confidence = 0.0;
    std::string rationale;
    int votes = 1;
    bool verified = false;
    CandidateSource source = CandidateSource::kLlm;

    long length() const { return end_line - start_line + 1; }
};

struct Usage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct Completion {
    std::string text;
    Usage usage;
};

struct SamplingParams {
    std::string model;
    double temperature = 0.2;
    double top_p = 1.0;
    long seed = 0;
    std::optional<std::string> reasoning_effort;
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    // Must tolerate concurrent in-flight calls; retries and transport
    // concerns live behind this interface.
    virtual Completion complete(const Prompt& prompt, const SamplingParams& params) = 0;
    virtual std::string name() const = 0;
};

struct PriceEntry {
    double usd_per_1k_prompt = 0.0;
    double usd_per_1k_completion = 0.0;
};

// Tracks spend against a hard dollar ceiling. charge() is the only mutator
// and is safe to call from concurrent samples.
class BudgetLedger {
public:
    BudgetLedger(double limit_usd, std::map<std::string, PriceEntry> price_table)
        : limit_usd_(limit_usd)
        , price_table_(std::move(price_table))
    {
    }

    // spent += prompt/1000 * p_in + completion/1000 * p_out. Returns the
    // exceeded flag after charging. Throws UnknownModelPrice.
    bool charge(const std::string& model, const Usage& usage);

    bool exceeded() const;
    double spent_usd() const;
    double limit_usd() const { return limit_usd_; }
    long calls() const;

private:
    double limit_usd_;
    std::map<std::string, PriceEntry> price_table_;
    mutable std::mutex mu_;
    double spent_usd_ = 0.0;
    long calls_ = 0;
};

// Assembles the analysis prompt. initial mode requires a crash report;
// refine mode requires at least one slice; baseline mode carries no runtime
// evidence (only a file listing). Violations throw ContractViolation.
Prompt build_prompt(const CrashReport* report, const std::vector<StaticFinding>& findings,
    PromptMode mode, const std::vector<SourceSlice>& slices,
    const std::vector<std::string>& file_listing = {});

// The full user text sent over the wire: instructions plus attachments in
// order.
std::string render_prompt(const Prompt& prompt);

// Deterministic key for replay recordings: a 64-bit digest of the canonical
// prompt text plus the sampling parameters that shape the response.
std::string prompt_digest(const Prompt& prompt, const SamplingParams& params);

// Finds the first balanced bracketed array of records in a raw model reply
// (code fences and prose tolerated) and decodes it. Records missing required
// fields are dropped with a note. Throws ExtractionFailed when nothing
// decodes. With merge_with given, the result is merge_candidates(decoded,
// *merge_with).
std::vector<Candidate> extract_candidates(std::string_view raw,
    const std::vector<Candidate>* merge_with = nullptr,
    std::vector<std::string>* notes = nullptr);

// Groups candidates from a∪b that share a file and overlap by at least half
// of the shorter interval; a group merges to its union span with max
// confidence and summed votes. Output sorted by (votes desc, confidence
// desc, file, start_line). Order-insensitive over the input multiset and
// idempotent.
std::vector<Candidate> merge_candidates(std::vector<Candidate> a, std::vector<Candidate> b);

struct DivergeHooks {
    // Called before each sample; returning false stops issuing further
    // samples (already-decoded results are kept).
    std::function<bool()> before_sample;
    // Called with each landed completion (budget accounting).
    std::function<void(const Completion&)> after_sample;
};

// Issues k completions with seeds seed+0..k-1 and folds the decoded lists
// through merge_candidates. Per-sample extraction failures are skipped;
// throws AllSamplesFailed when nothing decodes at all.
std::vector<Candidate> diverge(LlmProvider& provider, const Prompt& prompt, int k,
    const SamplingParams& params, const DivergeHooks& hooks = {},
    std::vector<std::string>* raw_responses = nullptr);

// Candidate list <-> the wire schema array
// [{"file","symbol","start_line","end_line","confidence","rationale"}] (plus
// votes/source bookkeeping fields on output).
std::string candidates_to_json(const std::vector<Candidate>& candidates);

} // namespace t2l

#endif // T2L_LLM_HPP_
