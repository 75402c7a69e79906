#pragma once

#include <gtest/gtest.h>

#include "dthread/core/error.hpp"

namespace dthread::testing {

template <typename Fn>
Errc code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::kIo;
}

}  // namespace dthread::testing
