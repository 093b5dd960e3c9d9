/*
 * Copyright 2026 The geostream Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace geostream {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A location lies outside the configured spatial domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parameters violate their invariants (weights, smoothing, capacities...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad argument to a query-time operation, e.g. k == 0.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A computation was requested on state that cannot support it
/// (empty corpus, image without terms).
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// An image arrived for a time slice that has already expired.
class LateArrivalError : public Error {
 public:
  using Error::Error;
};

/// Duplicate id, malformed record, unreadable file.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace geostream
