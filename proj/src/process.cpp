#include "worldmark/process.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

namespace worldmark::proc {

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void exec_child(const std::vector<std::string>& argv) {
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    std::fprintf(stderr, "exec failed: %s: %s\n", args[0], std::strerror(errno));
    ::_exit(127);
}

/// Poll-wait with a deadline; kills the child on timeout.
Result wait_with_timeout(pid_t pid, double timeout_seconds) {
    Result result;
    const auto deadline =
        Clock::now() + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(timeout_seconds));
    while (true) {
        int status = 0;
        pid_t got = ::waitpid(pid, &status, WNOHANG);
        if (got == pid) {
            if (WIFEXITED(status)) {
                result.exit_code = WEXITSTATUS(status);
            } else if (WIFSIGNALED(status)) {
                result.signaled = true;
                result.exit_code = 128 + WTERMSIG(status);
            }
            return result;
        }
        if (got < 0) throw IoError("waitpid failed");
        if (Clock::now() >= deadline) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            result.timed_out = true;
            result.exit_code = -1;
            return result;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
}

}  // namespace

Result run_capture(const std::vector<std::string>& argv,
                   const std::string& stdin_data, double timeout_seconds) {
    if (argv.empty()) throw ValidationError("empty command line");
    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0)
        throw IoError("pipe failed");

    pid_t pid = ::fork();
    if (pid < 0) throw IoError("fork failed");
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        exec_child(argv);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);

    // Feed stdin fully, then close so the child sees EOF.
    size_t written = 0;
    while (written < stdin_data.size()) {
        ssize_t n = ::write(in_pipe[1], stdin_data.data() + written,
                            stdin_data.size() - written);
        if (n <= 0) break;
        written += static_cast<size_t>(n);
    }
    ::close(in_pipe[1]);

    std::string output;
    {
        // Read concurrently with the child's lifetime so large outputs
        // cannot deadlock the pipe.
        char buf[1 << 14];
        const auto deadline =
            Clock::now() + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(timeout_seconds));
        int flags = ::fcntl(out_pipe[0], F_GETFL, 0);
        ::fcntl(out_pipe[0], F_SETFL, flags | O_NONBLOCK);
        bool open = true;
        while (open) {
            ssize_t n = ::read(out_pipe[0], buf, sizeof(buf));
            if (n > 0) {
                output.append(buf, static_cast<size_t>(n));
                continue;
            }
            if (n == 0) break;  // EOF
            if (errno != EAGAIN && errno != EWOULDBLOCK) break;
            if (Clock::now() >= deadline) {
                ::kill(pid, SIGKILL);
                open = false;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    }
    ::close(out_pipe[0]);

    Result result = wait_with_timeout(pid, timeout_seconds);
    result.output = std::move(output);
    return result;
}

Result run_redirected(const std::vector<std::string>& argv,
                      const fs::path& log_path, double timeout_seconds) {
    if (argv.empty()) throw ValidationError("empty command line");
    if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
    int log_fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (log_fd < 0) throw IoError("cannot open log file: " + log_path.string());

    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(log_fd);
        throw IoError("fork failed");
    }
    if (pid == 0) {
        ::dup2(log_fd, STDOUT_FILENO);
        ::dup2(log_fd, STDERR_FILENO);
        ::close(log_fd);
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) {
            ::dup2(devnull, STDIN_FILENO);
            ::close(devnull);
        }
        exec_child(argv);
    }
    ::close(log_fd);
    return wait_with_timeout(pid, timeout_seconds);
}

}  // namespace worldmark::proc
