#ifndef NUFHT_FFT_HPP
#define NUFHT_FFT_HPP

// Thin layer over FFTW: an aligned complex buffer and a process-wide cache of
// in-place 1-D plans. FFTW's planner is not thread-safe, so plan creation is
// serialized; executing an existing plan on new arrays is safe from any
// thread.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <new>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace nufht {

class FftBuffer {
 public:
  FftBuffer() = default;
  explicit FftBuffer(std::size_t n) : size_(n) {
    if (n == 0) return;
    data_ = static_cast<std::complex<double>*>(fftw_malloc(n * sizeof(std::complex<double>)));
    if (data_ == nullptr) throw std::bad_alloc();
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  FftBuffer(FftBuffer&& other) noexcept
      : data_(std::exchange(other.data_, nullptr)), size_(std::exchange(other.size_, 0)) {}
  FftBuffer& operator=(FftBuffer&& other) noexcept {
    if (this != &other) {
      release();
      data_ = std::exchange(other.data_, nullptr);
      size_ = std::exchange(other.size_, 0);
    }
    return *this;
  }
  ~FftBuffer() { release(); }

  std::complex<double>* data() { return data_; }
  const std::complex<double>* data() const { return data_; }
  std::size_t size() const { return size_; }
  std::complex<double>& operator[](std::size_t i) { return data_[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return data_[i]; }

 private:
  void release() {
    if (data_ != nullptr) fftw_free(data_);
    data_ = nullptr;
  }

  std::complex<double>* data_ = nullptr;
  std::size_t size_ = 0;
};

namespace detail {

class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int direction, bool aligned) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(n, direction, aligned);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    FftBuffer scratch(n);
    unsigned flags = FFTW_ESTIMATE;
    if (!aligned) flags |= FFTW_UNALIGNED;
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, direction, flags);
    if (plan == nullptr) throw std::runtime_error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

 private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<std::size_t, int, bool>, fftw_plan> plans_;
};

}  // namespace detail

// Unnormalized in-place transform: data[q] <- sum_l data[l] exp(sign 2 pi i l q / n).
inline void fft_inplace(std::complex<double>* data, std::size_t n, int sign) {
  if (n == 0) return;
  auto* p = reinterpret_cast<fftw_complex*>(data);
  const int direction = sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD;
  const bool aligned = fftw_alignment_of(reinterpret_cast<double*>(p)) == 0;
  fftw_plan plan = detail::FftPlanCache::instance().get(n, direction, aligned);
  fftw_execute_dft(plan, p, p);
}

}  // namespace nufht

#endif  // NUFHT_FFT_HPP
