#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "mdlab/decomp.hpp"

namespace mdlab::decomp {

namespace {

std::filesystem::path scratch_file() {
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("mdlab-ext-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir / "input.mjc";
}

std::string substitute(const std::string& tmpl, const std::string& input) {
    std::string out = tmpl;
    const std::string key = "{input}";
    for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + input.size()))
        out.replace(pos, key.size(), input);
    return out;
}

}  // namespace

std::string run_external(const DecompilerSpec& spec, const vm::BytecodeClass& bc, std::string& note, bool& ok) {
    ok = false;
    auto input = scratch_file();
    {
        std::ofstream f(input);
        f << vm::serialize(bc);
        if (!f) throw ToolError("cannot write adapter input " + input.string());
    }
    auto cleanup = [&] {
        std::error_code ec;
        std::filesystem::remove_all(input.parent_path(), ec);
    };
    std::string cmd = substitute(spec.command, "'" + input.string() + "'");

    int fds[2];
    if (::pipe(fds) != 0) {
        cleanup();
        throw ToolError("pipe failed");
    }
    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        cleanup();
        throw ToolError("fork failed");
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(fds[1], STDOUT_FILENO);
        ::close(fds[0]);
        ::close(fds[1]);
        ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(fds[1]);
    std::string out;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(spec.ext_timeout_secs);
    bool timed_out = false;
    char buf[4096];
    while (true) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
        if (left <= 0) {
            timed_out = true;
            break;
        }
        pollfd p{fds[0], POLLIN, 0};
        int r = ::poll(&p, 1, static_cast<int>(std::min<long long>(left, 1000)));
        if (r < 0) break;
        if (r == 0) continue;
        auto n = ::read(fds[0], buf, sizeof buf);
        if (n <= 0) break;
        out.append(buf, static_cast<std::size_t>(n));
    }
    ::close(fds[0]);
    if (timed_out) ::kill(-pid, SIGKILL);
    int status = 0;
    ::waitpid(pid, &status, 0);
    cleanup();
    if (timed_out) {
        note = "timed out";
        return {};
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        note = "exit status " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1);
        return {};
    }
    if (out.empty()) {
        note = "no output";
        return {};
    }
    ok = true;
    return out;
}

}  // namespace mdlab::decomp
