#include "hfprep/subprocess.hpp"

#include <atomic>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "hfprep/error.hpp"

namespace hfprep {

namespace {
constexpr size_t kStderrKeep = 8192;
std::atomic<uint64_t> g_invocations{0};

void drain(int fd, std::string& sink, size_t cap) {
    char buf[4096];
    for (;;) {
        const ssize_t n = read(fd, buf, sizeof(buf));
        if (n <= 0) break;
        sink.append(buf, static_cast<size_t>(n));
        if (cap && sink.size() > cap) sink.erase(0, sink.size() - cap);
    }
}

} // namespace

uint64_t command_invocation_count() { return g_invocations.load(); }

CommandResult run_command(const std::string& shell_cmd, double timeout_s) {
    g_invocations.fetch_add(1);

    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0)
        throw SubprocessError(std::string("pipe() failed: ") + std::strerror(errno));
    if (pipe(err_pipe) != 0) {
        close(out_pipe[0]);
        close(out_pipe[1]);
        throw SubprocessError(std::string("pipe() failed: ") + std::strerror(errno));
    }

    const pid_t pid = fork();
    if (pid < 0) {
        for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
        throw SubprocessError(std::string("fork() failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        setpgid(0, 0); // own process group so a timeout kills the whole tree
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
        execl("/bin/sh", "sh", "-c", shell_cmd.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(out_pipe[1]);
    close(err_pipe[1]);

    CommandResult result;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout_s > 0 ? timeout_s : 0));

    struct Stream {
        int fd;
        std::string* sink;
        size_t cap;
        bool open = true;
    };
    Stream streams[2] = {{out_pipe[0], &result.out, 0},
                         {err_pipe[0], &result.stderr_tail, kStderrKeep}};

    char buf[4096];
    while (streams[0].open || streams[1].open) {
        int wait_ms = 200;
        if (timeout_s > 0) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  deadline - std::chrono::steady_clock::now())
                                  .count();
            if (left <= 0) {
                result.timed_out = true;
                kill(-pid, SIGKILL);
                break;
            }
            wait_ms = static_cast<int>(std::min<long long>(left, 200));
        }
        struct pollfd pfds[2];
        int npfd = 0;
        for (auto& s : streams)
            if (s.open) pfds[npfd++] = {s.fd, POLLIN, 0};
        if (poll(pfds, static_cast<nfds_t>(npfd), wait_ms) <= 0) continue;
        for (int i = 0; i < npfd; ++i) {
            if (!(pfds[i].revents & (POLLIN | POLLHUP))) continue;
            for (auto& s : streams) {
                if (s.fd != pfds[i].fd) continue;
                const ssize_t n = read(s.fd, buf, sizeof(buf));
                if (n > 0) {
                    s.sink->append(buf, static_cast<size_t>(n));
                    if (s.cap && s.sink->size() > s.cap)
                        s.sink->erase(0, s.sink->size() - s.cap);
                } else {
                    s.open = false;
                }
            }
        }
    }
    drain(out_pipe[0], result.out, 0);
    drain(err_pipe[0], result.stderr_tail, kStderrKeep);
    close(out_pipe[0]);
    close(err_pipe[0]);

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = -WTERMSIG(status);
    return result;
}

} // namespace hfprep
