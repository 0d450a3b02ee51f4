#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace samm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the caller's data or parameters was violated.
class InvalidInput : public Error
{
public:
  using Error::Error;
};

/// The local Gram matrix at a design point could not be inverted.
class SingularSystem : public Error
{
public:
  SingularSystem(std::size_t point, const std::string& what)
    : Error(what), point_(point)
  {}

  std::size_t point() const noexcept { return point_; }

private:
  std::size_t point_;
};

/// A dense numerical routine (eigendecomposition, factorization) failed.
class NumericError : public Error
{
public:
  using Error::Error;
};

} // namespace samm
