/*
 * Copyright 2026 The lgmml Authors.
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
#ifndef LGMML_ERRORS_HPP_
#define LGMML_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace lgmml {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric / linear-algebra failures.
class InvalidMatrix : public Error {
 public:
  using Error::Error;
};
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};
class DimMismatch : public Error {
 public:
  using Error::Error;
};

// Ranking-data failures.
class EmptyCandidateSet : public Error {
 public:
  using Error::Error;
};
class NoPositives : public Error {
 public:
  using Error::Error;
};
class NoNegatives : public Error {
 public:
  using Error::Error;
};
class InvalidIndex : public Error {
 public:
  using Error::Error;
};
class InvalidSample : public Error {
 public:
  using Error::Error;
};
class EmptyRanking : public Error {
 public:
  using Error::Error;
};
class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// Input-text failure; carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, long line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class ModelFormatError : public Error {
 public:
  using Error::Error;
};

/// Filesystem-level failure (missing file, unwritable sink).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bad user-supplied configuration (mostly surfaced through the CLI).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgmml

#endif  // LGMML_ERRORS_HPP_
