#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dthread {

enum class Errc {
  kUnknownNamespace,
  kUnregisteredUid,
  kDuplicateBinding,
  kDuplicateEdge,
  kDanglingEndpoint,
  kInvalidArgument,
  kInvalidEncoding,
  kEmptyDocument,
  kAdapterFailure,
  kSyntax,
  kUnitMismatch,
  kUnknownAttribute,
  kUnresolvedReference,
  kMissingHeader,
  kCyclicAssembly,
  kUnknownProduct,
  kNonRigidTransform,
  kDuplicateName,
  kIntegrity,
  kIo,
  kUnknownVersion,
  kSchema,
  kOverflow,
  kConflict,
};

std::string_view to_string(Errc code) noexcept;

// All library failures are reported through this exception; `code()` is
// stable and is what tests and the service layer dispatch on.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dthread
