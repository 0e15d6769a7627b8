/* Copyright 2026 The Lowlight Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef LOWLIGHT_ERROR_HPP_
#define LOWLIGHT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace lowlight {

// Bad parameters or malformed input content. The CLI maps these to exit 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Anything that went wrong talking to the filesystem. The CLI maps these to
// exit 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FileNotFoundError : public IoError {
 public:
  explicit FileNotFoundError(const std::string& path)
      : IoError("file not found: " + path) {}
};

// The file exists but is not a PNG/JPEG we can decode, or it is truncated.
class DecodeError : public IoError {
 public:
  using IoError::IoError;
};

class WriteError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace lowlight

#endif  // LOWLIGHT_ERROR_HPP_
