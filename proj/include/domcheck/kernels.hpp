#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace domcheck::kernels {

/// Serial is the reference implementation; Parallel distributes rows over
/// OpenMP threads. Both produce bit-identical results.
enum class Backend { serial, parallel };

enum class Reduce { max, min };

/// Fills out[0..width) for one row. NaN marks an entry as absent
/// (e.g. a window that leaves a segment).
using RowFn = std::function<void(std::size_t row, std::span<double> out)>;

/// Row-major rows x width table of every row's values.
std::vector<double> evaluate_rows(std::size_t rows, std::size_t width, const RowFn& fn,
                                  Backend backend);

/// Column-wise max (or min) over rows, skipping NaN. A column with no value
/// is NaN in the result.
std::vector<double> reduce_rows(std::size_t rows, std::size_t width, const RowFn& fn,
                                Reduce op, Backend backend);

/// Thread cap from DOMCHECK_THREADS (0 = no cap). Applied once per process.
void apply_thread_cap_from_env();

int max_threads();

}  // namespace domcheck::kernels
