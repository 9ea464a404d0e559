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

#include "dcsurv/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace dcsurv {
namespace {

thread_local ScopedWarningCapture* g_capture = nullptr;
std::atomic<bool> g_quiet{false};
std::mutex g_stderr_mutex;

}  // namespace

void warn(std::string_view message) {
  if (g_capture != nullptr) {
    g_capture->messages_.emplace_back(message);
    return;
  }
  if (g_quiet.load()) return;
  std::lock_guard lock(g_stderr_mutex);
  std::cerr << "warning: " << message << '\n';
}

ScopedWarningCapture::ScopedWarningCapture() : previous_(g_capture) {
  g_capture = this;
}

ScopedWarningCapture::~ScopedWarningCapture() { g_capture = previous_; }

bool ScopedWarningCapture::contains(std::string_view needle) const {
  for (const auto& m : messages_) {
    if (m.find(needle) != std::string::npos) return true;
  }
  return false;
}

void set_quiet(bool quiet) { g_quiet.store(quiet); }

}  // namespace dcsurv
