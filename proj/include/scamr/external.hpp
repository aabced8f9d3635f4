#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <span>
#include <string>

#include "scamr/types.hpp"

namespace scamr {

/// A model backed by a child process speaking a line protocol: one request
/// line of space-separated coordinates on its stdin, one response line with
/// a single decimal value on its stdout. Requests are serialized.
class ExternalEvaluator {
 public:
  ExternalEvaluator(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(60))
      : command_(std::move(command)), timeout_(timeout) {
    ::signal(SIGPIPE, SIG_IGN);
    int in[2], out[2];
    if (::pipe(in) != 0 || ::pipe(out) != 0) throw ScamrError("external evaluator: pipe failed");
    pid_ = ::fork();
    if (pid_ < 0) throw ScamrError("external evaluator: fork failed");
    if (pid_ == 0) {
      ::dup2(in[0], STDIN_FILENO);
      ::dup2(out[1], STDOUT_FILENO);
      ::close(in[0]);
      ::close(in[1]);
      ::close(out[0]);
      ::close(out[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in[0]);
    ::close(out[1]);
    to_child_ = in[1];
    from_child_ = out[0];
    ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  }

  ExternalEvaluator(const ExternalEvaluator&) = delete;
  ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

  ~ExternalEvaluator() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
      int status = 0;
      // give a well-behaved child a moment to exit on EOF
      for (int k = 0; k < 50; ++k) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) return;
        ::usleep(2000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }

  double operator()(std::span<const double> x) {
    std::lock_guard lock(mutex_);
    std::string line;
    char buf[32];
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", x[i]);
      if (i) line += ' ';
      line += buf;
    }
    line += '\n';
    for (std::size_t off = 0; off < line.size();) {
      const ssize_t w = ::write(to_child_, line.data() + off, line.size() - off);
      if (w < 0) {
        if (errno == EINTR) continue;
        fail(x, "cannot write request (child gone?)");
      }
      off += static_cast<std::size_t>(w);
    }
    const std::string reply = read_line(x);
    char* end = nullptr;
    const double v = std::strtod(reply.c_str(), &end);
    while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
    if (end == reply.c_str() || (end && *end != '\0')) fail(x, "unparsable response '" + reply + "'");
    if (!std::isfinite(v)) fail(x, "non-finite response '" + reply + "'");
    return v;
  }

  const std::string& command() const noexcept { return command_; }

 private:
  [[noreturn]] void fail(std::span<const double> x, const std::string& what) const {
    throw EvaluationError(Point(x.begin(), x.end()), "external evaluator '" + command_ + "': " + what);
  }

  std::string read_line(std::span<const double> x) {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
      if (auto nl = pending_.find('\n'); nl != std::string::npos) {
        std::string line = pending_.substr(0, nl);
        pending_.erase(0, nl + 1);
        return line;
      }
      const auto left =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) fail(x, "timed out");
      pollfd p{from_child_, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(left.count()));
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) fail(x, "timed out");
      char buf[4096];
      const ssize_t got = ::read(from_child_, buf, sizeof buf);
      if (got < 0 && errno == EINTR) continue;
      if (got <= 0) fail(x, "child exited");
      pending_.append(buf, static_cast<std::size_t>(got));
    }
  }

  std::string command_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string pending_;
  std::mutex mutex_;
};

/// Adapts a shared evaluator into a Model.
inline Model external_model(std::shared_ptr<ExternalEvaluator> ev) {
  return [ev = std::move(ev)](std::span<const double> x) { return (*ev)(x); };
}

}  // namespace scamr
