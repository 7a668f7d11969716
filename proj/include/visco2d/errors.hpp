#ifndef VISCO2D_ERRORS_HPP
#define VISCO2D_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace visco2d {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizeMismatch : public Error {
 public:
  SizeMismatch(std::ptrdiff_t expected, std::ptrdiff_t got)
      : Error("size mismatch: expected " + std::to_string(expected) + ", got " + std::to_string(got)) {}
};

/// A configuration value outside its admissible range.
class OutOfRange : public Error {
 public:
  OutOfRange(std::string field, const std::string& why)
      : Error("out of range: " + field + " (" + why + ")"), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IncompatibleOptions : public Error {
 public:
  IncompatibleOptions(std::string field, const std::string& why)
      : Error("incompatible options: " + field + " (" + why + ")"), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Pointwise failure of a tensor field at grid point (i, j).
class PointwiseError : public Error {
 public:
  PointwiseError(const std::string& what, int i, int j)
      : Error(what + " at grid point (" + std::to_string(i) + ", " + std::to_string(j) + ")"), i_(i), j_(j) {}
  int i() const noexcept { return i_; }
  int j() const noexcept { return j_; }

 private:
  int i_;
  int j_;
};

class NonPositiveDeterminant : public PointwiseError {
 public:
  NonPositiveDeterminant(int i, int j) : PointwiseError("non-positive determinant", i, j) {}
};

class NonSPD : public PointwiseError {
 public:
  NonSPD(int i, int j) : PointwiseError("tensor not positive definite", i, j) {}
};

class Singular : public PointwiseError {
 public:
  Singular(int i, int j) : PointwiseError("singular tensor", i, j) {}
};

class NonFinite : public Error {
 public:
  explicit NonFinite(long step)
      : Error("non-finite value after step " + std::to_string(step)), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& why) : Error("io error: " + path + ": " + why), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class CorruptSnapshot : public Error {
 public:
  CorruptSnapshot(const std::string& path, const std::string& why)
      : Error("corrupt snapshot: " + path + ": " + why) {}
};

}  // namespace visco2d

#endif  // VISCO2D_ERRORS_HPP
