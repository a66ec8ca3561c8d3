#pragma once
// Thin RAII wrapper around FFTW double-precision r2c/c2r transforms.
// Plans are created with FFTW_ESTIMATE so the chosen algorithm, and hence
// the exact floating-point result, is reproducible from run to run. The
// FFTW planner is not thread-safe, so plan creation and destruction are
// serialized by a global mutex; execution uses only this object's buffers,
// so distinct engines may run concurrently.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace nfh {

class RealFftEngine {
 public:
  explicit RealFftEngine(std::vector<int> shape) : shape_(std::move(shape)) {
    if (shape_.empty()) throw std::invalid_argument("fft: empty shape");
    n_real_ = 1;
    for (int d : shape_) {
      if (d < 2) throw std::invalid_argument("fft: axis length must be >= 2");
      n_real_ *= static_cast<std::size_t>(d);
    }
    n_spec_ = n_real_ / static_cast<std::size_t>(shape_.back()) *
              (static_cast<std::size_t>(shape_.back()) / 2 + 1);
    in_ = fftw_alloc_real(n_real_);
    spec_ = fftw_alloc_complex(n_spec_);
    out_ = fftw_alloc_real(n_real_);
    if (!in_ || !spec_ || !out_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c(static_cast<int>(shape_.size()), shape_.data(), in_, spec_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r(static_cast<int>(shape_.size()), shape_.data(), spec_, out_, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw std::runtime_error("fft: planning failed");
  }

  RealFftEngine(const RealFftEngine&) = delete;
  RealFftEngine& operator=(const RealFftEngine&) = delete;

  ~RealFftEngine() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_) fftw_destroy_plan(fwd_);
    if (bwd_) fftw_destroy_plan(bwd_);
    fftw_free(in_);
    fftw_free(spec_);
    fftw_free(out_);
  }

  std::size_t real_size() const { return n_real_; }
  std::size_t spectrum_size() const { return n_spec_; }

  // Unnormalized forward transform of a real array.
  std::vector<std::complex<double>> forward(std::span<const double> v) {
    check_size(v.size());
    for (std::size_t i = 0; i < n_real_; ++i) in_[i] = v[i];
    fftw_execute(fwd_);
    std::vector<std::complex<double>> s(n_spec_);
    for (std::size_t i = 0; i < n_spec_; ++i) s[i] = {spec_[i][0], spec_[i][1]};
    return s;
  }

  // out = scale * IFFT(ku .* FFT(v)); the 1/N of the inverse is folded into
  // scale by the caller. Destroys nothing outside this engine.
  void multiply_inverse(std::span<const std::complex<double>> ku, std::span<const double> v, double scale,
                        std::span<double> result) {
    check_size(v.size());
    if (ku.size() != n_spec_ || result.size() != n_real_)
      throw std::invalid_argument("fft: spectrum/result size mismatch");
    for (std::size_t i = 0; i < n_real_; ++i) in_[i] = v[i];
    fftw_execute(fwd_);
    for (std::size_t i = 0; i < n_spec_; ++i) {
      const std::complex<double> p = ku[i] * std::complex<double>{spec_[i][0], spec_[i][1]};
      spec_[i][0] = p.real();
      spec_[i][1] = p.imag();
    }
    fftw_execute(bwd_);
    for (std::size_t i = 0; i < n_real_; ++i) result[i] = scale * out_[i];
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  void check_size(std::size_t n) const {
    if (n != n_real_) throw std::invalid_argument("fft: input size mismatch");
  }

  std::vector<int> shape_;
  std::size_t n_real_ = 0;
  std::size_t n_spec_ = 0;
  double* in_ = nullptr;
  fftw_complex* spec_ = nullptr;
  double* out_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

}  // namespace nfh
