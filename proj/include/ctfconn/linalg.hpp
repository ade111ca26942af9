#pragma once

#include "ctfconn/tensor.hpp"

namespace ctfconn {

struct SvdResult {
  ComplexMatrix U;  // rows x r, orthonormal columns
  RealVector s;     // r = min(rows, cols), nonincreasing
  ComplexMatrix V;  // cols x r, orthonormal columns
};

/// Thin SVD, M = U diag(s) V^H. Throws InvalidInput on non-finite entries.
SvdResult thin_svd(const ComplexMatrix& m);

enum class Solution {
  complex,  // unconstrained complex minimiser
  real,     // minimiser over real-valued X
};

/// Minimum-norm argmin_X ||A X - B||_F.
///
/// With Solution::real the stacked system [Re A; Im A] X = [Re B; Im B] is
/// solved, which yields the exact real minimiser; the returned matrix then
/// has an identically zero imaginary part. Singular values below
/// 1e-12 * s_max are treated as zero.
ComplexMatrix lstsq(const ComplexMatrix& a, const ComplexMatrix& b, Solution mode = Solution::complex);

/// Real-valued least squares with the same cutoff rule.
RealMatrix lstsq(const RealMatrix& a, const RealMatrix& b);

/// X = rhs * G^+ for a Hermitian positive semidefinite Gram matrix G,
/// pseudo-inverse with eigenvalue cutoff 1e-12 * lambda_max.
ComplexMatrix solve_gram_right(const ComplexMatrix& rhs, const ComplexMatrix& gram);
RealMatrix solve_gram_right(const RealMatrix& rhs, const RealMatrix& gram);

/// X = G^+ * rhs for a Hermitian positive semidefinite G.
ComplexMatrix solve_gram_left(const ComplexMatrix& gram, const ComplexMatrix& rhs);

/// Orthonormal Q minimising ||Q - C||_F, i.e. Q = U V^H from C = U S V^H.
ComplexMatrix procrustes(const ComplexMatrix& c);

bool all_finite(const ComplexMatrix& m);
bool all_finite(const RealMatrix& m);

}  // namespace ctfconn
