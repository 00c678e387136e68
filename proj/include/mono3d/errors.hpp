#ifndef MONO3D_ERRORS_HPP_
#define MONO3D_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mono3d {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A box (or one of its corners) lies at or behind the camera plane.
struct NonPositiveDepthError : Error {
  using Error::Error;
};

// Rotation bin outside [0, pi).
struct InvalidBinError : Error {
  using Error::Error;
};

// Score maps with incompatible levels, shapes or channel counts.
struct ShapeMismatchError : Error {
  using Error::Error;
};

// Both width distances or both height distances are zero.
struct DegenerateBoxError : Error {
  using Error::Error;
};

// Malformed or constraint-violating dataset file. `where` is a
// path-like locator ("scenes[2].annotations[0].size").
struct SchemaError : Error {
  SchemaError(const std::string& where, const std::string& what)
      : Error(where + ": " + what), where(where) {}
  std::string where;
};

struct VersionMismatchError : Error {
  using Error::Error;
};

}  // namespace mono3d

#endif  // MONO3D_ERRORS_HPP_
