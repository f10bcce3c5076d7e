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

#include "t2l/backend.hpp"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "t2l/error.hpp"

namespace t2l {

namespace {

    // fork/exec with both output streams captured and a hard deadline.
    // Timeout kills the child with SIGKILL; exit_code then reads 128+9 the
    // way shells report it.
    ExecResult spawn_and_wait(const std::vector<std::string>& argv,
        const std::filesystem::path& cwd, double timeout_s)
    {
        if (argv.empty())
            throw BackendUnavailable("empty argv");

        int out_pipe[2];
        int err_pipe[2];
        if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
            throw BackendUnavailable("pipe() failed");

        pid_t pid = fork();
        if (pid < 0)
            throw BackendUnavailable("fork() failed");

        if (pid == 0) {
            dup2(out_pipe[1], STDOUT_FILENO);
            dup2(err_pipe[1], STDERR_FILENO);
            close(out_pipe[0]);
            close(out_pipe[1]);
            close(err_pipe[0]);
            close(err_pipe[1]);
            if (!cwd.empty() && chdir(cwd.c_str()) != 0) {
                std::string msg = "cannot chdir to " + cwd.string() + "\n";
                (void)!write(STDERR_FILENO, msg.c_str(), msg.size());
                _exit(126);
            }
            std::vector<char*> cargv;
            cargv.reserve(argv.size() + 1);
            for (const std::string& a : argv)
                cargv.push_back(const_cast<char*>(a.c_str()));
            cargv.push_back(nullptr);
            execvp(cargv[0], cargv.data());
            // exec failed; mimic the shell's "command not found"
            std::string msg = std::string("exec failed: ") + argv[0] + ": " + std::strerror(errno) + "\n";
            (void)!write(STDERR_FILENO, msg.c_str(), msg.size());
            _exit(127);
        }

        close(out_pipe[1]);
        close(err_pipe[1]);
        fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
        fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

        ExecResult result;
        auto start = std::chrono::steady_clock::now();
        auto deadline = start + std::chrono::duration<double>(timeout_s);
        bool killed = false;
        bool out_open = true, err_open = true;

        auto drain = [&](int fd, std::string& sink, bool& open_flag) {
            char buf[4096];
            for (;;) {
                ssize_t n = read(fd, buf, sizeof buf);
                if (n > 0) {
                    sink.append(buf, static_cast<size_t>(n));
                } else if (n == 0) {
                    open_flag = false;
                    return;
                } else {
                    return; // EAGAIN
                }
            }
        };

        int status = 0;
        bool exited = false;
        while (!exited || out_open || err_open) {
            if (!exited) {
                pid_t r = waitpid(pid, &status, WNOHANG);
                if (r == pid)
                    exited = true;
            }
            if (!exited && !killed && std::chrono::steady_clock::now() >= deadline) {
                kill(pid, SIGKILL);
                killed = true;
            }

            struct pollfd fds[2];
            nfds_t nfds = 0;
            if (out_open)
                fds[nfds++] = { out_pipe[0], POLLIN, 0 };
            if (err_open)
                fds[nfds++] = { err_pipe[0], POLLIN, 0 };
            if (nfds > 0)
                poll(fds, nfds, 20);
            if (out_open)
                drain(out_pipe[0], result.stdout_text, out_open);
            if (err_open)
                drain(err_pipe[0], result.stderr_text, err_open);
            if (exited && !out_open && !err_open)
                break;
        }
        close(out_pipe[0]);
        close(err_pipe[0]);

        result.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.timed_out = killed;
        if (killed)
            result.exit_code = 128 + SIGKILL;
        else if (WIFEXITED(status))
            result.exit_code = WEXITSTATUS(status);
        else if (WIFSIGNALED(status))
            result.exit_code = 128 + WTERMSIG(status);
        else
            result.exit_code = -1;
        return result;
    }

} // namespace

LocalProcessBackend::LocalProcessBackend(std::filesystem::path root)
    : root_(std::move(root))
{
    if (!root_.empty() && !std::filesystem::is_directory(root_))
        throw BackendUnavailable("backend root " + root_.string() + " is not a directory");
}

ExecResult LocalProcessBackend::run(const std::vector<std::string>& argv, double timeout_s)
{
    return spawn_and_wait(argv, root_, timeout_s);
}

ContainerBackend::ContainerBackend(std::string runtime, std::string container,
    std::filesystem::path in_container_root)
    : runtime_(std::move(runtime))
    , container_(std::move(container))
    , in_container_root_(std::move(in_container_root))
{
    if (runtime_.empty()) {
        const char* env = std::getenv("T2L_CONTAINER_RUNTIME");
        runtime_ = env && *env ? env : "docker";
    }
}

std::vector<std::string> ContainerBackend::exec_argv(const std::vector<std::string>& argv) const
{
    std::vector<std::string> full = { runtime_, "exec", container_ };
    full.insert(full.end(), argv.begin(), argv.end());
    return full;
}

ExecResult ContainerBackend::run(const std::vector<std::string>& argv, double timeout_s)
{
    ExecResult result = spawn_and_wait(exec_argv(argv), {}, timeout_s);
    if (result.exit_code == 127 && result.stderr_text.find("exec failed") != std::string::npos)
        throw BackendUnavailable("container runtime \"" + runtime_ + "\" not found");
    return result;
}

ContainerBackend ContainerBackend::start(const std::string& runtime, const std::string& image,
    const std::string& container_name)
{
    ContainerBackend backend(runtime, container_name);
    ExecResult created = spawn_and_wait(
        { backend.runtime_, "run", "-d", "--name", container_name, image, "sleep", "infinity" },
        {}, kDefaultExecTimeout);
    if (created.exit_code == 127)
        throw BackendUnavailable("container runtime \"" + backend.runtime_ + "\" not found");
    if (created.exit_code != 0)
        throw BackendUnavailable("could not start container from " + image + ": "
            + created.stderr_text);
    return backend;
}

ReplayExecBackend::ReplayExecBackend(std::filesystem::path log_dir, std::filesystem::path source_root)
    : log_dir_(std::move(log_dir))
    , source_root_(std::move(source_root))
{
}

ExecResult ReplayExecBackend::run(const std::vector<std::string>& argv, double timeout_s)
{
    (void)argv;
    (void)timeout_s;
    throw BackendUnavailable("replay backend cannot execute commands");
}

std::optional<std::string> ReplayExecBackend::recorded_log(const std::string& kind,
    const std::string& case_id)
{
    std::filesystem::path path = log_dir_ / (case_id + "." + kind + ".log");
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ExecResult exec_run(ExecutionBackend& backend, const std::vector<std::string>& argv,
    double timeout_s)
{
    return backend.run(argv, timeout_s);
}

std::string run_sanitized(ExecutionBackend& backend, const CaseEntry& entry, double timeout_s)
{
    if (auto recorded = backend.recorded_log("san", entry.id))
        return *recorded;

    std::filesystem::path binary = backend.root() / entry.vulnerable_ref;
    if (backend.name() == "local" && !std::filesystem::exists(binary))
        throw BuildMissing("case " + entry.id + ": binary " + binary.string() + " not found");

    std::vector<std::string> argv = { binary.string() };
    if (!entry.reproducer.empty())
        argv.push_back(entry.reproducer.string());
    ExecResult result = backend.run(argv, timeout_s);
    if (result.exit_code == 127)
        throw BuildMissing("case " + entry.id + ": could not execute " + binary.string());
    return result.combined();
}

std::string run_debugger_script(ExecutionBackend& backend, const std::filesystem::path& binary,
    const std::filesystem::path& input, const std::vector<std::string>& commands,
    double timeout_s, const std::string& record_key)
{
    std::string key = record_key.empty() ? binary.filename().string() : record_key;
    if (auto recorded = backend.recorded_log("gdb", key))
        return *recorded;

    std::vector<std::string> argv = { "gdb", "-batch", "-nx" };
    for (const std::string& cmd : commands) {
        argv.push_back("-ex");
        argv.push_back(cmd);
    }
    argv.push_back("--args");
    argv.push_back((backend.root() / binary).string());
    if (!input.empty())
        argv.push_back(input.string());

    ExecResult result = backend.run(argv, timeout_s);
    if (result.exit_code == 127)
        throw DebuggerMissing("gdb not available in backend " + backend.name());
    return result.combined();
}

StaticFindingsResult collect_static_findings(ExecutionBackend& backend,
    const std::filesystem::path& root, bool enabled,
    const std::vector<std::vector<std::string>>& analyzer_commands)
{
    StaticFindingsResult result;
    if (!enabled)
        return result;
    if (analyzer_commands.empty()) {
        result.notices.push_back("static analysis enabled but no analyzers configured");
        return result;
    }

    static const std::regex finding_re(R"(^([^:\s]+):(\d+):\s*(.+)$)");
    for (const auto& argv : analyzer_commands) {
        if (argv.empty())
            continue;
        ExecResult run;
        try {
            run = backend.run(argv, kDefaultExecTimeout);
        } catch (const Error& e) {
            result.notices.push_back("analyzer " + argv[0] + " unavailable: " + e.what());
            continue;
        }
        if (run.exit_code == 127) {
            result.notices.push_back("analyzer " + argv[0] + " missing");
            continue;
        }
        std::istringstream lines(run.stdout_text + run.stderr_text);
        std::string line;
        while (std::getline(lines, line)) {
            std::smatch m;
            if (std::regex_match(line, m, finding_re)) {
                std::string file = m[1].str();
                std::string root_str = root.generic_string();
                if (!root_str.empty() && file.rfind(root_str + "/", 0) == 0)
                    file = file.substr(root_str.size() + 1);
                result.findings.push_back({ file, std::stol(m[2].str()), m[3].str() });
            }
        }
    }
    return result;
}

} // namespace t2l
