#include "inbetween/core/allocator.hpp"

#if __has_include(<malloc.h>)
#include <malloc.h>
#endif

namespace inbetween {

void tune_allocator() {
#if defined(M_MMAP_THRESHOLD) && defined(M_TRIM_THRESHOLD)
  // glibc rejects mmap thresholds above 32 MiB on 64-bit targets.
  constexpr int kMmapThreshold = 32 << 20;
  constexpr int kTrimThreshold = 1 << 30;
  mallopt(M_MMAP_THRESHOLD, kMmapThreshold);
  mallopt(M_TRIM_THRESHOLD, kTrimThreshold);
#endif
}

}  // namespace inbetween
