// Explicit instantiations for the two supported scalars, so that template
// errors surface when the library itself is built.

#include "homlp/block_angular.hpp"
#include "homlp/kkt.hpp"
#include "homlp/pipeline.hpp"
#include "homlp/presolve.hpp"

namespace homlp {

template class SparseMatrix<double>;
template class SparseMatrix<Quad>;
template class SparseLDLSolver<double>;
template class SparseLDLSolver<Quad>;
template class DenseNormalSolver<double>;
template class DenseNormalSolver<Quad>;
template class NewtonSystem<double>;
template class NewtonSystem<Quad>;
template class UnitBlockAngularMatrix<double>;
template class UnitBlockAngularMatrix<Quad>;
template class BlockAngularFactor<double>;
template class BlockAngularFactor<Quad>;
template class PresolveState<double>;
template class PresolveState<Quad>;

template PipelineResult<double> solve_lp(const GeneralLP<double>&, const PipelineOptions<double>&, std::ostream*,
                                         const Observer<double>&);
template PipelineResult<Quad> solve_lp(const GeneralLP<Quad>&, const PipelineOptions<Quad>&, std::ostream*,
                                       const Observer<Quad>&);

}  // namespace homlp
