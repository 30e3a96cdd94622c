#include "intentc/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "intentc/errors.hpp"

namespace intentc {

namespace {

void drain(int fd, std::string& out) {
  char buf[4096];
  for (;;) {
    ssize_t n = ::read(fd, buf, sizeof(buf));
    if (n <= 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
}

}  // namespace

ExecResult run_sandboxed(const std::string& command, std::chrono::milliseconds timeout,
                         const std::filesystem::path& cwd) {
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
    throw SandboxUnavailable(std::string("pipe: ") + std::strerror(errno));
  }

  auto started = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    throw SandboxUnavailable(std::string("fork: ") + std::strerror(errno));
  }

  if (pid == 0) {
    ::setpgid(0, 0);
    // Best effort: drop network access. Requires unprivileged user
    // namespaces; ignore failure so the bench still works without them.
    ::unshare(CLONE_NEWUSER | CLONE_NEWNET);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) _exit(127);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[0]);
    ::close(err_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  ::fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
  ::fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

  ExecResult result;
  auto deadline = started + timeout;
  bool killed = false;
  int status = 0;
  int open_fds = 2;

  struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  for (;;) {
    auto now = std::chrono::steady_clock::now();
    if (!killed && now >= deadline) {
      ::kill(-pid, SIGKILL);
      killed = true;
    }
    int wait_ms = killed ? 50
                         : static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                deadline - now)
                                                .count()) +
                               1;
    if (wait_ms < 1) wait_ms = 1;
    if (wait_ms > 100) wait_ms = 100;

    if (open_fds > 0) {
      int rc = ::poll(fds, 2, wait_ms);
      if (rc > 0) {
        for (auto& f : fds) {
          if (f.fd < 0) continue;
          if (f.revents & (POLLIN | POLLHUP)) {
            std::string& sink = f.fd == out_pipe[0] ? result.stdout_text : result.stderr_text;
            char buf[4096];
            ssize_t n;
            while ((n = ::read(f.fd, buf, sizeof(buf))) > 0) sink.append(buf, static_cast<std::size_t>(n));
            if (n == 0) {
              ::close(f.fd);
              f.fd = -1;
              --open_fds;
            }
          }
        }
      }
    }

    pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) break;
    if (open_fds == 0 && done == 0) {
      // Output closed but the child lingers; keep enforcing the deadline.
      ::usleep(1000);
    }
  }

  // Flush whatever remains after exit.
  if (fds[0].fd >= 0) {
    drain(fds[0].fd, result.stdout_text);
    ::close(fds[0].fd);
  }
  if (fds[1].fd >= 0) {
    drain(fds[1].fd, result.stderr_text);
    ::close(fds[1].fd);
  }
  // Reap any process-group stragglers.
  if (killed) ::kill(-pid, SIGKILL);

  result.timed_out = killed;
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  result.wall = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
  return result;
}

}  // namespace intentc
