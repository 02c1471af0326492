// Copyright 2026 The Wavemux Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef WAVEMUX_SRC_SUBPROCESS_HPP_
#define WAVEMUX_SRC_SUBPROCESS_HPP_

#include <chrono>
#include <string>

namespace wavemux::detail {

struct ShellResult {
  int exit_code = -1;  // -1 when killed or not exited normally
  bool timed_out = false;
  std::string output;  // merged stdout and stderr, truncated
};

// Runs `command` with /bin/sh -c in its own process group; the group is
// killed once `timeout` elapses.
ShellResult run_shell(const std::string& command, std::chrono::milliseconds timeout);

// Single-quotes s for the shell.
std::string shell_quote(const std::string& s);

}  // namespace wavemux::detail

#endif  // WAVEMUX_SRC_SUBPROCESS_HPP_
