#pragma once

#include "qns/core.hpp"

namespace qns {

/// Unscaled DFT with kernel e^{-2πi jm/n}.
CVec dft_forward(const CVec& x);

/// Unscaled DFT with kernel e^{+2πi jm/n} (no 1/n).
CVec dft_backward(const CVec& x);

/// Smallest integer >= n whose only prime factors are 2, 3 and 5.
Index fast_fft_size(Index n);

} // namespace qns
