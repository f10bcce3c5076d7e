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

#ifndef T2L_PROVIDERS_HPP_
#define T2L_PROVIDERS_HPP_

#include <filesystem>
#include <string>

#include "t2l/llm.hpp"

namespace t2l {

// Chat-completions HTTP bridge. Reads T2L_API_BASE / T2L_API_KEY when the
// constructor arguments are empty. Transient transport failures are retried
// up to 3 attempts with backoff; 401/403 raise AuthError.
class HttpProvider : public LlmProvider {
public:
    explicit HttpProvider(std::string base_url = {}, std::string api_key = {});

    Completion complete(const Prompt& prompt, const SamplingParams& params) override;
    std::string name() const override { return "http"; }

private:
    std::string base_url_;
    std::string api_key_;
};

// Serves canned responses keyed by prompt_digest(). Unknown digests are a
// hard error so prompt drift cannot go unnoticed. A recording is the raw
// response text, optionally preceded by a "#usage prompt=N completion=M"
// first line.
class ReplayProvider : public LlmProvider {
public:
    explicit ReplayProvider(std::filesystem::path dir);

    Completion complete(const Prompt& prompt, const SamplingParams& params) override;
    std::string name() const override { return "replay"; }

    static std::string recording_file_name(const std::string& digest);

private:
    std::filesystem::path dir_;
};

// Pass-through wrapper that records every completion of the inner provider
// into `dir` in the ReplayProvider format.
class RecordingProvider : public LlmProvider {
public:
    RecordingProvider(LlmProvider& inner, std::filesystem::path dir);

    Completion complete(const Prompt& prompt, const SamplingParams& params) override;
    std::string name() const override { return "recording(" + inner_.name() + ")"; }

private:
    LlmProvider& inner_;
    std::filesystem::path dir_;
};

} // namespace t2l

#endif // T2L_PROVIDERS_HPP_
