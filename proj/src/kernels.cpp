#include "domcheck/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>

namespace domcheck::kernels {
namespace {

constexpr double absent = std::numeric_limits<double>::quiet_NaN();

// Exceptions may not leave an OpenMP region. The error of the lowest row is
// kept and rethrown afterwards, matching the serial reference.
class FirstError {
 public:
  void record(std::size_t row, std::exception_ptr e) {
#pragma omp critical(domcheck_first_error)
    {
      if (!error_ || row < row_) {
        error_ = e;
        row_ = row;
      }
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
  std::size_t row_ = 0;
};

void merge(std::span<double> acc, std::span<const double> row, Reduce op) {
  for (std::size_t j = 0; j < acc.size(); ++j) {
    const double v = row[j];
    if (std::isnan(v)) continue;
    if (std::isnan(acc[j])) {
      acc[j] = v;
    } else if (op == Reduce::max) {
      acc[j] = std::max(acc[j], v);
    } else {
      acc[j] = std::min(acc[j], v);
    }
  }
}

std::vector<double> reduce_serial(std::size_t rows, std::size_t width, const RowFn& fn,
                                  Reduce op) {
  std::vector<double> acc(width, absent);
  std::vector<double> buf(width);
  for (std::size_t r = 0; r < rows; ++r) {
    std::fill(buf.begin(), buf.end(), absent);
    fn(r, buf);
    merge(acc, buf, op);
  }
  return acc;
}

// max/min are exact and order independent, so per-thread partials merged in
// thread order give the serial answer bit for bit.
std::vector<double> reduce_parallel(std::size_t rows, std::size_t width, const RowFn& fn,
                                    Reduce op) {
  const int nthreads = omp_get_max_threads();
  std::vector<std::vector<double>> partial(nthreads, std::vector<double>(width, absent));
  const auto n = static_cast<long long>(rows);
  FirstError errors;
#pragma omp parallel num_threads(nthreads)
  {
    const int tid = omp_get_thread_num();
    std::vector<double> buf(width);
#pragma omp for schedule(dynamic, 16)
    for (long long r = 0; r < n; ++r) {
      std::fill(buf.begin(), buf.end(), absent);
      try {
        fn(static_cast<std::size_t>(r), buf);
      } catch (...) {
        errors.record(static_cast<std::size_t>(r), std::current_exception());
        continue;
      }
      merge(partial[tid], buf, op);
    }
  }
  errors.rethrow();
  std::vector<double> acc(width, absent);
  for (const auto& p : partial) merge(acc, p, op);
  return acc;
}

}  // namespace

std::vector<double> evaluate_rows(std::size_t rows, std::size_t width, const RowFn& fn,
                                  Backend backend) {
  std::vector<double> table(rows * width, absent);
  if (backend == Backend::serial) {
    for (std::size_t r = 0; r < rows; ++r) fn(r, std::span<double>(table).subspan(r * width, width));
    return table;
  }
  const auto n = static_cast<long long>(rows);
  FirstError errors;
#pragma omp parallel for schedule(dynamic, 16)
  for (long long r = 0; r < n; ++r) {
    const auto row = static_cast<std::size_t>(r);
    try {
      fn(row, std::span<double>(table).subspan(row * width, width));
    } catch (...) {
      errors.record(row, std::current_exception());
    }
  }
  errors.rethrow();
  return table;
}

std::vector<double> reduce_rows(std::size_t rows, std::size_t width, const RowFn& fn,
                                Reduce op, Backend backend) {
  if (backend == Backend::serial) return reduce_serial(rows, width, fn, op);
  return reduce_parallel(rows, width, fn, op);
}

void apply_thread_cap_from_env() {
  static const bool applied = [] {
    if (const char* env = std::getenv("DOMCHECK_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0) omp_set_num_threads(std::min(cap, omp_get_num_procs()));
    }
    return true;
  }();
  (void)applied;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace domcheck::kernels
