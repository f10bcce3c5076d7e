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

#ifndef T2L_TESTS_SUPPORT_FAKES_HPP_
#define T2L_TESTS_SUPPORT_FAKES_HPP_

#include <functional>
#include <string>
#include <vector>

#include "t2l/backend.hpp"
#include "t2l/error.hpp"
#include "t2l/llm.hpp"

namespace t2l::testing {

inline std::filesystem::path fixture_dir() { return T2L_FIXTURE_DIR; }
inline std::filesystem::path data_dir() { return T2L_DATA_DIR; }
inline std::string cli_bin() { return T2L_CLI_BIN; }

// Provider driven by a callback; usage is fixed per instance.
class ScriptedProvider : public LlmProvider {
public:
    using Script = std::function<std::string(const Prompt&, const SamplingParams&)>;

    explicit ScriptedProvider(Script script, Usage usage = { 1000, 200 })
        : script_(std::move(script))
        , usage_(usage)
    {
    }

    Completion complete(const Prompt& prompt, const SamplingParams& params) override
    {
        ++calls;
        return { script_(prompt, params), usage_ };
    }
    std::string name() const override { return "scripted"; }

    int calls = 0;

private:
    Script script_;
    Usage usage_;
};

// Counts every execution request; optionally delegates to recorded logs.
class CountingBackend : public ExecutionBackend {
public:
    explicit CountingBackend(std::filesystem::path root, ExecutionBackend* delegate = nullptr)
        : root_(std::move(root))
        , delegate_(delegate)
    {
    }

    ExecResult run(const std::vector<std::string>& argv, double timeout_s) override
    {
        ++run_calls;
        if (delegate_)
            return delegate_->run(argv, timeout_s);
        throw BackendUnavailable("counting backend has no delegate");
    }

    std::optional<std::string> recorded_log(const std::string& kind,
        const std::string& case_id) override
    {
        if (kind == "san")
            ++san_requests;
        else if (kind == "gdb")
            ++gdb_requests;
        if (delegate_)
            return delegate_->recorded_log(kind, case_id);
        return std::nullopt;
    }

    std::filesystem::path root() const override { return root_; }
    std::string name() const override { return "counting"; }

    int run_calls = 0;
    int san_requests = 0;
    int gdb_requests = 0;

private:
    std::filesystem::path root_;
    ExecutionBackend* delegate_;
};

// Backend whose every operation fails; models a dead container runtime.
class FailingBackend : public ExecutionBackend {
public:
    explicit FailingBackend(std::filesystem::path root)
        : root_(std::move(root))
    {
    }

    ExecResult run(const std::vector<std::string>&, double) override
    {
        throw BackendUnavailable("backend intentionally down");
    }
    std::filesystem::path root() const override { return root_; }
    std::string name() const override { return "failing"; }

private:
    std::filesystem::path root_;
};

} // namespace t2l::testing

#endif // T2L_TESTS_SUPPORT_FAKES_HPP_
