#pragma once

#include <doctest.h>

#include "blochdegen/core_model.hpp"
#include "blochdegen/errors.hpp"

namespace test_support {

/// Kind of the blochdegen::Error thrown by `f`; fails the test if none is thrown.
template <class F>
blochdegen::ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const blochdegen::Error& e) {
    return e.kind();
  }
  FAIL("expected a blochdegen::Error");
  return blochdegen::ErrorKind::ConfigError;
}

/// Columns a1, a2, a3 of the default triclinic cell, written out independently.
inline Eigen::Matrix3d default_direct() {
  Eigen::Matrix3d a;
  a.col(0) = Eigen::Vector3d(1.0, 0.0, 0.0);
  a.col(1) = Eigen::Vector3d(0.5, 1.1, 0.0);
  a.col(2) = Eigen::Vector3d(0.2, 0.3, 1.3);
  return a;
}

}  // namespace test_support
