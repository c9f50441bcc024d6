#pragma once

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "fiolab/types.hpp"

namespace fiolab {

/// Owning handle for an FFTW plan.
class FftPlan {
 public:
  FftPlan(const std::vector<int>& dims, int sign) : dims_(dims) {
    std::size_t total = 1;
    for (int n : dims) total *= static_cast<std::size_t>(n);
    // Plans are created on scratch buffers; execution goes through the new-array interface.
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    plan_ = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), in, out, sign,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (!plan_) throw Error("FFTW plan creation failed");
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() { fftw_destroy_plan(plan_); }

  /// Out-of-place execution; `in` and `out` must not alias.
  void execute(const cplx* in, cplx* out) const {
    fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

 private:
  std::vector<int> dims_;
  fftw_plan plan_;
};

/// Process-wide plan cache. FFTW planning is not thread-safe, so creation is serialized;
/// execution of an existing plan on distinct arrays is safe.
class FftCache {
 public:
  static FftCache& instance() {
    static FftCache cache;
    return cache;
  }

  const FftPlan& plan(const std::vector<int>& dims, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(dims, sign);
    auto it = plans_.find(key);
    if (it == plans_.end()) it = plans_.emplace(key, std::make_unique<FftPlan>(dims, sign)).first;
    return *it->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::vector<int>, int>, std::unique_ptr<FftPlan>> plans_;
};

/// Unnormalized DFT over a row-major array of shape `dims`:
/// out[m] = sum_k in[k] exp(sign * 2 pi i <k, m / dims>).
inline std::vector<cplx> dft(const std::vector<cplx>& in, const std::vector<int>& dims, int sign) {
  std::vector<cplx> out(in.size());
  FftCache::instance().plan(dims, sign).execute(in.data(), out.data());
  return out;
}

inline void dft_inplace(cplx* data, std::size_t size, const std::vector<int>& dims, int sign,
                        std::vector<cplx>& scratch) {
  scratch.resize(size);
  FftCache::instance().plan(dims, sign).execute(data, scratch.data());
  std::copy(scratch.begin(), scratch.end(), data);
}

inline CVec dft1(const CVec& in, int sign) {
  CVec out(in.size());
  FftCache::instance().plan({static_cast<int>(in.size())}, sign).execute(in.data(), out.data());
  return out;
}

}  // namespace fiolab
