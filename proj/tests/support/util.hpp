// Copyright 2026 The surfdice Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SURFDICE_TESTS_UTIL_HPP
#define SURFDICE_TESTS_UTIL_HPP

#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <string>

#include "support/process.hpp"
#include "surfdice/error.hpp"

namespace testutil {

/// Code of the surfdice::Error thrown by `fn`; fails the test if none is.
inline surfdice::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const surfdice::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a surfdice::Error";
  return surfdice::ErrorCode::Parse;
}

inline std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected an exception";
  return {};
}

}  // namespace testutil

#endif  // SURFDICE_TESTS_UTIL_HPP
