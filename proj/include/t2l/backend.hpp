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

#ifndef T2L_BACKEND_HPP_
#define T2L_BACKEND_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "t2l/corpus.hpp"

namespace t2l {

struct ExecResult {
    std::string stdout_text;
    std::string stderr_text;
    int exit_code = 0;
    double duration_s = 0.0;
    bool timed_out = false;

    std::string combined() const { return stdout_text + stderr_text; }
};

inline constexpr double kDefaultExecTimeout = 120.0;

// Where case binaries run. One backend instance serves one case; instances
// are not shared across concurrently running cases.
class ExecutionBackend {
public:
    virtual ~ExecutionBackend() = default;

    // Runs argv to completion (or timeout). Nonzero exits are reported in the
    // result, never thrown.
    virtual ExecResult run(const std::vector<std::string>& argv, double timeout_s) = 0;

    // Directory case-relative refs (binaries, reproducers) resolve against.
    virtual std::filesystem::path root() const = 0;

    virtual std::string name() const = 0;

    // Replay backends return recorded text for kind "san" / "gdb"; live
    // backends return nullopt and actually execute.
    virtual std::optional<std::string> recorded_log(const std::string& kind,
        const std::string& case_id)
    {
        (void)kind;
        (void)case_id;
        return std::nullopt;
    }
};

// Runs processes directly on the host with cwd = root. Used for fixture
// cases and tests.
class LocalProcessBackend : public ExecutionBackend {
public:
    explicit LocalProcessBackend(std::filesystem::path root);

    ExecResult run(const std::vector<std::string>& argv, double timeout_s) override;
    std::filesystem::path root() const override { return root_; }
    std::string name() const override { return "local"; }

private:
    std::filesystem::path root_;
};

// Shells out to an OCI container runtime CLI ("docker"/"podman" compatible):
// every run() becomes `<runtime> exec <container> argv...`.
class ContainerBackend : public ExecutionBackend {
public:
    // runtime: CLI binary (falls back to $T2L_CONTAINER_RUNTIME, then
    // "docker"). container: a created container name or id.
    ContainerBackend(std::string runtime, std::string container,
        std::filesystem::path in_container_root = "/src");

    ExecResult run(const std::vector<std::string>& argv, double timeout_s) override;
    std::filesystem::path root() const override { return in_container_root_; }
    std::string name() const override { return "container"; }

    // Starts a detached container from an image; returns the backend bound to
    // it. Throws BackendUnavailable when the runtime CLI is missing.
    static ContainerBackend start(const std::string& runtime, const std::string& image,
        const std::string& container_name);

    std::vector<std::string> exec_argv(const std::vector<std::string>& argv) const;

private:
    std::string runtime_;
    std::string container_;
    std::filesystem::path in_container_root_;
};

// Serves recorded `<case_id>.san.log` / `<case_id>.gdb.log` files instead of
// executing anything.
class ReplayExecBackend : public ExecutionBackend {
public:
    ReplayExecBackend(std::filesystem::path log_dir, std::filesystem::path source_root);

    ExecResult run(const std::vector<std::string>& argv, double timeout_s) override;
    std::filesystem::path root() const override { return source_root_; }
    std::string name() const override { return "replay"; }
    std::optional<std::string> recorded_log(const std::string& kind,
        const std::string& case_id) override;

private:
    std::filesystem::path log_dir_;
    std::filesystem::path source_root_;
};

// Thin wrapper over backend.run that callers use for ad-hoc commands.
ExecResult exec_run(ExecutionBackend& backend, const std::vector<std::string>& argv,
    double timeout_s = kDefaultExecTimeout);

// Executes the case's vulnerable binary on its reproducer and returns the
// combined stdout+stderr. Throws BuildMissing when the binary is absent and
// BackendUnavailable when the backend cannot execute at all.
std::string run_sanitized(ExecutionBackend& backend, const CaseEntry& entry,
    double timeout_s = kDefaultExecTimeout);

// Runs the debugger non-interactively (`gdb -batch -ex <cmd>... --args
// binary input`) and returns the transcript. Throws DebuggerMissing when no
// debugger can be launched. `record_key` names the replay recording to
// consult (the case id); it defaults to the binary's filename.
std::string run_debugger_script(ExecutionBackend& backend, const std::filesystem::path& binary,
    const std::filesystem::path& input, const std::vector<std::string>& commands,
    double timeout_s = kDefaultExecTimeout, const std::string& record_key = "");

struct StaticFinding {
    std::string file;
    long line = 0;
    std::string message;
};

struct StaticFindingsResult {
    std::vector<StaticFinding> findings;
    std::vector<std::string> notices; // missing analyzers etc., never fatal
};

// Runs the configured analyzer commands under `root` and parses
// "file:line: message" lines from their output. Advisory context only; when
// disabled returns an empty result.
StaticFindingsResult collect_static_findings(ExecutionBackend& backend,
    const std::filesystem::path& root, bool enabled,
    const std::vector<std::vector<std::string>>& analyzer_commands);

} // namespace t2l

#endif // T2L_BACKEND_HPP_
