#pragma once

#include <algorithm>

#ifdef MAIL_HAVE_OPENMP
#include <omp.h>
#endif

namespace mail::diff {

namespace detail {
inline int& thread_setting() {
  static int threads = 1;
  return threads;
}
}  // namespace detail

/// Worker threads used by the parallel kernels. 1 selects the serial
/// reference kernels, which is the deterministic default.
inline int num_threads() { return detail::thread_setting(); }

inline void set_num_threads(int n) { detail::thread_setting() = std::max(1, n); }

inline bool openmp_available() {
#ifdef MAIL_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

/// Restores the previous thread count on scope exit.
class ThreadScope {
 public:
  explicit ThreadScope(int n) : saved_(num_threads()) { set_num_threads(n); }
  ~ThreadScope() { set_num_threads(saved_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int saved_;
};

}  // namespace mail::diff
