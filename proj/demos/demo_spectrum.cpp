// Prints the spectral invariants of a sample Hessian: eigenvalues, the
// Lagrangian angle through both computation paths, and the 2-convexity
// margins.

#include <cstdio>

#include "lagflow/spectral.hpp"

int main() {
  using namespace lagflow;
  const SymMatrix b = SymMatrix::from_rows({{2.0, 1.0, 0.0},
                                            {1.0, 2.0, 0.5},
                                            {0.0, 0.5, 1.0}});
  const Spectrum s = eigen_sym(b);
  std::printf("eigenvalues      :");
  for (int i = 0; i < s.n; ++i) std::printf(" %.12g", s.lambdas[i]);
  std::printf("\nangle (eigen)    : %.15g\n", lagrangian_angle(s));
  std::printf("angle (complex)  : %.15g\n", angle_via_complex_det(b));
  std::printf("*Omega           : %.15g\n", s.star_omega);
  std::printf("detS             : %.15g\n", s.det_s_frak);
  std::printf("min pair sum     : %.15g\n", s.min_pair_sum);
  std::printf("min pair product : %.15g\n", s.min_pair_prod);
  return 0;
}
