#include "dthread/core/error.hpp"

namespace dthread {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::kUnknownNamespace: return "unknown-namespace";
    case Errc::kUnregisteredUid: return "unregistered-uid";
    case Errc::kDuplicateBinding: return "duplicate-binding";
    case Errc::kDuplicateEdge: return "duplicate-edge";
    case Errc::kDanglingEndpoint: return "dangling-endpoint";
    case Errc::kInvalidArgument: return "invalid-argument";
    case Errc::kInvalidEncoding: return "invalid-encoding";
    case Errc::kEmptyDocument: return "empty-document";
    case Errc::kAdapterFailure: return "adapter-failure";
    case Errc::kSyntax: return "syntax";
    case Errc::kUnitMismatch: return "unit-mismatch";
    case Errc::kUnknownAttribute: return "unknown-attribute";
    case Errc::kUnresolvedReference: return "unresolved-reference";
    case Errc::kMissingHeader: return "missing-header";
    case Errc::kCyclicAssembly: return "cyclic-assembly";
    case Errc::kUnknownProduct: return "unknown-product";
    case Errc::kNonRigidTransform: return "non-rigid-transform";
    case Errc::kDuplicateName: return "duplicate-name";
    case Errc::kIntegrity: return "integrity";
    case Errc::kIo: return "io";
    case Errc::kUnknownVersion: return "unknown-version";
    case Errc::kSchema: return "schema";
    case Errc::kOverflow: return "overflow";
    case Errc::kConflict: return "conflict";
  }
  return "unknown";
}

}  // namespace dthread
