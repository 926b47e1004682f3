#pragma once

// RAII wrappers over FFTW buffers and plans. Plan creation is not
// thread-safe in FFTW, so every planner call goes through plan_mutex().

#include <fftw3.h>

#include <cstddef>
#include <memory>
#include <mutex>
#include <new>

namespace ns3dvar::detail {

inline std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t n)
      : n_(n), data_(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (!data_) throw std::bad_alloc();
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  FftwBuffer(FftwBuffer&& o) noexcept : n_(o.n_), data_(o.data_) {
    o.data_ = nullptr;
    o.n_ = 0;
  }
  ~FftwBuffer() { fftw_free(data_); }

  T* data() { return data_; }
  const T* data() const { return data_; }
  std::size_t size() const { return n_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

 private:
  std::size_t n_;
  T* data_;
};

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(plan_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

/// `howmany` contiguous complex-to-real 2D transforms of size m x m.
inline Plan plan_c2r(int m, int howmany, fftw_complex* in, double* out) {
  std::lock_guard lock(plan_mutex());
  const int dims[2] = {m, m};
  return Plan(fftw_plan_many_dft_c2r(2, dims, howmany, in, nullptr, 1,
                                     m * (m / 2 + 1), out, nullptr, 1, m * m,
                                     FFTW_ESTIMATE));
}

/// `howmany` contiguous real-to-complex 2D transforms of size m x m.
inline Plan plan_r2c(int m, int howmany, double* in, fftw_complex* out) {
  std::lock_guard lock(plan_mutex());
  const int dims[2] = {m, m};
  return Plan(fftw_plan_many_dft_r2c(2, dims, howmany, in, nullptr, 1, m * m,
                                     out, nullptr, 1, m * (m / 2 + 1),
                                     FFTW_ESTIMATE));
}

}  // namespace ns3dvar::detail
