// Copyright 2026 The dcsurv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace dcsurv {

// Non-fatal diagnostics (zero-variance columns, quasi-separation, dropped
// rows...). By default they go to stderr; a ScopedWarningCapture installed on
// the current thread collects them instead.
void warn(std::string_view message);

class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(std::string_view needle) const;

 private:
  friend void warn(std::string_view message);
  std::vector<std::string> messages_;
  ScopedWarningCapture* previous_;
};

// Silences stderr output process-wide (used by the experiment harness, where
// per-repetition warnings would flood the terminal).
void set_quiet(bool quiet);

}  // namespace dcsurv
