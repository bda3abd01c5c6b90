#include "htnagent/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "htnagent/errors.hpp"

namespace htnagent {

namespace {

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

void make_pipe(Fd& r, Fd& w) {
  int p[2];
  if (::pipe2(p, O_CLOEXEC) != 0) throw Error(std::string("pipe2: ") + std::strerror(errno));
  r.fd = p[0];
  w.fd = p[1];
}

// Appends up to the cap, reports whether anything was dropped.
bool drain(int fd, std::string& into, std::size_t cap, bool& eof) {
  char buf[8192];
  ssize_t n = ::read(fd, buf, sizeof buf);
  if (n < 0) {
    if (errno == EINTR || errno == EAGAIN) return false;
    eof = true;
    return false;
  }
  if (n == 0) {
    eof = true;
    return false;
  }
  const std::size_t room = into.size() < cap ? cap - into.size() : 0;
  const std::size_t take = std::min(room, static_cast<std::size_t>(n));
  into.append(buf, take);
  return take < static_cast<std::size_t>(n);
}

}  // namespace

ProcessOutcome run_process(const std::vector<std::string>& argv, const ProcessOptions& opts) {
  if (argv.empty()) throw ConfigError("empty command line");

  Fd out_r, out_w, err_r, err_w, exec_r, exec_w;
  make_pipe(out_r, out_w);
  make_pipe(err_r, err_w);
  make_pipe(exec_r, exec_w);

  std::vector<std::string> env_strings;
  for (const auto& [k, v] : opts.env) env_strings.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::vector<std::string> args = argv;
  std::vector<char*> argp;
  for (auto& s : args) argp.push_back(s.data());
  argp.push_back(nullptr);
  const std::string cwd = opts.working_dir.string();

  const auto start = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(out_w.fd, STDOUT_FILENO);
    ::dup2(err_w.fd, STDERR_FILENO);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    int err = 0;
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
      err = errno;
    } else {
      ::execvpe(argp[0], argp.data(), envp.data());
      err = errno;
    }
    ssize_t ignored = ::write(exec_w.fd, &err, sizeof err);
    (void)ignored;
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  out_w.reset();
  err_w.reset();
  exec_w.reset();

  int exec_errno = 0;
  ssize_t got = ::read(exec_r.fd, &exec_errno, sizeof exec_errno);
  if (got == static_cast<ssize_t>(sizeof exec_errno)) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    throw ConfigError("cannot start '" + argv[0] + "': " + std::strerror(exec_errno));
  }

  ProcessOutcome outcome;
  bool out_eof = false, err_eof = false;
  const auto deadline = start + std::chrono::duration<double>(opts.timeout_s);
  while (!out_eof || !err_eof) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      outcome.timed_out = true;
      ::kill(-pid, SIGKILL);
      break;
    }
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    pollfd fds[2];
    int nfds = 0;
    int out_idx = -1, err_idx = -1;
    if (!out_eof) {
      fds[nfds] = {out_r.fd, POLLIN, 0};
      out_idx = nfds++;
    }
    if (!err_eof) {
      fds[nfds] = {err_r.fd, POLLIN, 0};
      err_idx = nfds++;
    }
    int rc = ::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(std::max<long long>(remaining, 1)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (out_idx >= 0 && (fds[out_idx].revents & (POLLIN | POLLHUP | POLLERR))) {
      outcome.truncated |= drain(out_r.fd, outcome.stdout_text, opts.max_capture, out_eof);
    }
    if (err_idx >= 0 && (fds[err_idx].revents & (POLLIN | POLLHUP | POLLERR))) {
      outcome.truncated |= drain(err_r.fd, outcome.stderr_text, opts.max_capture, err_eof);
    }
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  // Reap anything the solver left running in its group.
  ::kill(-pid, SIGKILL);
  outcome.duration_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(status)) {
    outcome.exit_status = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    outcome.exit_status = 128 + WTERMSIG(status);
  }
  return outcome;
}

}  // namespace htnagent
