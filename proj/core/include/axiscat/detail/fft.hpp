#pragma once

#include <span>

#include "axiscat/common.hpp"

namespace axiscat::detail {

// 1-D complex FFTs, no normalization (forward: sum of x_j e^{-2pi i jk/n}).
// Plans are cached per thread; creation is serialized (FFTW planner is not
// thread-safe), execution is concurrent.
void fft_forward(std::span<Complex> data);
void fft_inverse(std::span<Complex> data);

}  // namespace axiscat::detail
