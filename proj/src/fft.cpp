#include "qns/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace qns {

namespace {

// Plans are cached per thread; Eigen's FFT object is not safe to share.
Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

} // namespace

CVec dft_forward(const CVec& x) {
  if (x.size() == 0) return {};
  std::vector<cplx> in(x.data(), x.data() + x.size());
  std::vector<cplx> out;
  engine().fwd(out, in);
  return Eigen::Map<CVec>(out.data(), static_cast<Index>(out.size()));
}

CVec dft_backward(const CVec& x) {
  if (x.size() == 0) return {};
  // conj(F[conj x]) flips the kernel sign without the 1/n of inv().
  std::vector<cplx> in(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) in[static_cast<std::size_t>(i)] = std::conj(x[i]);
  std::vector<cplx> out;
  engine().fwd(out, in);
  CVec y(x.size());
  for (Index i = 0; i < x.size(); ++i) y[i] = std::conj(out[static_cast<std::size_t>(i)]);
  return y;
}

Index fast_fft_size(Index n) {
  if (n <= 1) return 1;
  for (Index m = n;; ++m) {
    Index r = m;
    for (Index p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

} // namespace qns
