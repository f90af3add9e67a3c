// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace drivegen {

// Error taxonomy mapped to CLI exit codes: config -> 2, data -> 3,
// everything else -> 4.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class GeometryError : public std::runtime_error {
public:
  explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

class NotFoundError : public std::runtime_error {
public:
  explicit NotFoundError(const std::string& msg) : std::runtime_error(msg) {}
};

class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class CalibrationError : public std::runtime_error {
public:
  explicit CalibrationError(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public ValidationError {
public:
  explicit ParseError(const std::string& msg) : ValidationError(msg) {}
};

class TransportError : public std::runtime_error {
public:
  explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised after the VLM retry budget is exhausted; callers fall back to the
// template captioner.
class CaptionUnavailableError : public std::runtime_error {
public:
  explicit CaptionUnavailableError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace drivegen
