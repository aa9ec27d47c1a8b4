#pragma once

#include <stdexcept>
#include <string>

namespace grasp {

// Bad values fed to a pure function (angle out of range, motor value too big).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration (empty sample ranges, non-positive sizes).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or image dimensions do not match what a consumer expects.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Object cannot be rasterized into the requested scene bounds.
class RenderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed serialized input: wire frames, filenames, image headers.
// `offending` carries the rejected text (or the violated component name).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string offending)
      : std::runtime_error(what + ": \"" + offending + "\""),
        offending_(std::move(offending)) {}
  const std::string& offending() const { return offending_; }

 private:
  std::string offending_;
};

// Model container violated its format; `field` names the failing part.
class LoadError : public std::runtime_error {
 public:
  LoadError(std::string field, const std::string& what)
      : std::runtime_error("model load: field '" + field + "': " + what),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Dataset directory problems: missing provisional, duplicate counter, io.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training aborted (empty dataset, non-finite loss).
class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Peer unreachable, broken stream, unreadable handshake files.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace grasp
