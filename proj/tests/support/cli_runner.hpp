#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "support.hpp"

namespace sse::test {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') {
      q += "'\\''";
    } else {
      q += c;
    }
  }
  return q + "'";
}

// Runs the CLI binary with `args`, capturing stdout and stderr separately.
inline CliResult run_cli(const std::string& binary, const std::vector<std::string>& args,
                         const TempDir& scratch) {
  static int counter = 0;
  const auto err_path = scratch / ("stderr-" + std::to_string(counter++) + ".txt");
  std::string cmd = shell_quote(binary);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " 2>" + shell_quote(err_path.string());

  CliResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

}  // namespace sse::test
