#pragma once

#include <memory>

#include "homlp/block_angular.hpp"
#include "homlp/kkt.hpp"

namespace homlp {

/// Backend selected by opt.backend; throws UnsupportedMatrixKind when the
/// backend cannot use A's representation.
template <class T>
std::unique_ptr<KKTSolver<T>> make_kkt_solver(std::shared_ptr<const AbstractMatrix<T>> A, const KKTOptions& opt) {
  switch (opt.backend) {
    case KKTBackend::Ldl: return std::make_unique<SparseLDLSolver<T>>(std::move(A), opt);
    case KKTBackend::Dense: return std::make_unique<DenseNormalSolver<T>>(std::move(A), opt);
    case KKTBackend::BlockAngular: return std::make_unique<BlockAngularSolver<T>>(std::move(A), opt);
  }
  throw PreconditionError("unknown backend");
}

}  // namespace homlp
