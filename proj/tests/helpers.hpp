#pragma once

#include "nmd/matcore.hpp"
#include "nmd/synth.hpp"

namespace nmd::testing {

inline Matrix random_matrix(long rows, long cols, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    return m;
}

// Max |a - b| over entries; shapes must agree.
inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace nmd::testing
