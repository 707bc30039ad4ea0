#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace sacn::harness {

/// Keeps glibc from returning large matrix buffers to the OS after every
/// update (mmap/munmap churn roughly doubled the step time). No-op elsewhere.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 256 * 1024 * 1024);
  mallopt(M_TOP_PAD, 64 * 1024 * 1024);
#endif
}

}  // namespace sacn::harness
