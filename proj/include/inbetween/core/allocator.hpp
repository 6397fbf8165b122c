#pragma once

namespace inbetween {

/// Training allocates and frees multi-megabyte matrices every iteration. With
/// glibc defaults each one is a fresh mmap, so page faults and zeroing dominate
/// the runtime. Raising the mmap and trim thresholds keeps those blocks on the
/// heap. Call once from main before any large allocation; no-op elsewhere.
void tune_allocator();

}  // namespace inbetween
