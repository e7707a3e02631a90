#ifndef INTRADAY_PARALLEL_HPP_
#define INTRADAY_PARALLEL_HPP_

#include <cstddef>
#include <exception>
#include <vector>

namespace intraday {

/// Runs fn(i) for i in [0, n). With threads <= 1 this is a plain loop, the
/// reference path; otherwise iterations are spread over an OpenMP team.
/// Results must be written to per-index slots so the outcome does not depend
/// on scheduling. The exception of the lowest failing index is rethrown.
template <typename Fn> void parallel_for(std::size_t n, int threads, Fn &&fn) {
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto &error : errors) {
    if (error) {
      std::rethrow_exception(error);
    }
  }
}

} // namespace intraday

#endif // INTRADAY_PARALLEL_HPP_
