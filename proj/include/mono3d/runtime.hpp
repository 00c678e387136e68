#ifndef MONO3D_RUNTIME_HPP_
#define MONO3D_RUNTIME_HPP_

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mono3d {

// Thread-count control for the parallel kernels. All kernels write to
// disjoint slots, so results are identical for any thread count.

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline double wall_time() {
#ifdef _OPENMP
  return omp_get_wtime();
#else
  return 0.0;
#endif
}

}  // namespace mono3d

#endif  // MONO3D_RUNTIME_HPP_
