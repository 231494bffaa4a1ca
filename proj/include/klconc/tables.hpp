#pragma once

// Shared lookup tables for log(i) and log(i!).  The hot summation loops
// (Bernstein polynomials, exact binomial/multinomial masses) are pure table
// arithmetic plus one exp per term once these are available.
//
// Each entry is computed independently with libm (no running sums), so the
// absolute error per entry stays at the ulp level instead of accumulating.

#include <cstddef>
#include <memory>
#include <vector>

namespace klconc::tables {

// log(i) for i in [0, size); entry 0 is -inf and must not be used as a factor.
std::shared_ptr<const std::vector<double>> log_table(std::size_t min_size);

// log(i!) = lgamma(i + 1) for i in [0, size).
std::shared_ptr<const std::vector<double>> log_factorial_table(std::size_t min_size);

}  // namespace klconc::tables
