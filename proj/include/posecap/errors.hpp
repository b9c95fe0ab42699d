// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace posecap {

// Root of every error thrown by the library. The CLI maps any of these to a
// nonzero exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; the message carries the offending field path.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A specification struct (rig, motion, filter, corruption) is invalid.
class SpecError : public Error {
 public:
  using Error::Error;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class LengthError : public Error {
 public:
  using Error::Error;
};

class StructuralError : public Error {
 public:
  using Error::Error;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class BehindCameraError : public Error {
 public:
  using Error::Error;
};

// Fewer than two detections of a joint in a frame (or a missing marker).
class GapError : public Error {
 public:
  GapError(const std::string& what, int joint, std::int64_t frame)
      : Error(what), joint_(joint), frame_(frame) {}

  int joint() const { return joint_; }
  std::int64_t frame() const { return frame_; }

 private:
  int joint_;
  std::int64_t frame_;
};

}  // namespace posecap
