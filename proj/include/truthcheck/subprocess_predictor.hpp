/*
 * Copyright 2026 The truthcheck Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstdio>
#include <mutex>
#include <string>

#include "truthcheck/datamodel.hpp"
#include "truthcheck/errors.hpp"
#include "truthcheck/models.hpp"

namespace truthcheck {

// Talks to an external model over its standard streams. Each request is one
// line of comma-separated feature values; the child answers with one line
// holding a decimal probability. The child is started with /bin/sh -c.
class SubprocessPredictor final : public Predictor {
 public:
  SubprocessPredictor(std::size_t arity, std::string command)
      : Predictor(arity), command_(std::move(command)) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      throw LoadError("cannot create pipes for '" + command_ + "'");
    }
    pid_ = fork();
    if (pid_ < 0) throw LoadError("cannot fork for '" + command_ + "'");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    to_ = fdopen(to_child[1], "w");
    from_ = fdopen(from_child[0], "r");
    if (!to_ || !from_) throw LoadError("cannot open streams for '" + command_ + "'");
  }

  SubprocessPredictor(const SubprocessPredictor&) = delete;
  SubprocessPredictor& operator=(const SubprocessPredictor&) = delete;

  ~SubprocessPredictor() override {
    if (to_) std::fclose(to_);
    if (from_) std::fclose(from_);
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  std::string kind() const override { return "subprocess"; }

 protected:
  double evaluate(std::span<const double> x) const override {
    std::lock_guard<std::mutex> lock(mu_);
    std::string line;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j) line += ',';
      line += internal::format_double(x[j]);
    }
    line += '\n';
    if (std::fputs(line.c_str(), to_) < 0 || std::fflush(to_) != 0) {
      throw Error("subprocess '" + command_ + "' closed its input");
    }
    std::string reply;
    int c;
    while ((c = std::fgetc(from_)) != EOF && c != '\n') reply.push_back(static_cast<char>(c));
    if (reply.empty() && c == EOF) throw Error("subprocess '" + command_ + "' exited");
    const auto p = internal::parse_double(reply);
    if (!p) throw Error("subprocess '" + command_ + "' replied '" + reply + "'");
    return *p;
  }

 private:
  std::string command_;
  pid_t pid_ = -1;
  std::FILE* to_ = nullptr;
  std::FILE* from_ = nullptr;
  mutable std::mutex mu_;
};

}  // namespace truthcheck
