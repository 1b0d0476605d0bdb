#include "fft_backend.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "doalab/errors.hpp"

namespace doalab::detail {
namespace {

enum class PlanKind { Forward, Backward, RealForward, RealBackward };

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(PlanKind kind, std::size_t n) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(kind, n);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    // The planner is not thread-safe, hence the lock around creation as well as lookup.
    const int len = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    auto* cin = fftw_alloc_complex(n);
    auto* cout = fftw_alloc_complex(n);
    auto* rbuf = fftw_alloc_real(n);
    switch (kind) {
      case PlanKind::Forward:
        plan = fftw_plan_dft_1d(len, cin, cout, FFTW_FORWARD, flags);
        break;
      case PlanKind::Backward:
        plan = fftw_plan_dft_1d(len, cin, cout, FFTW_BACKWARD, flags);
        break;
      case PlanKind::RealForward:
        plan = fftw_plan_dft_r2c_1d(len, rbuf, cout, flags);
        break;
      case PlanKind::RealBackward:
        plan = fftw_plan_dft_c2r_1d(len, cin, rbuf, flags);
        break;
    }
    fftw_free(cin);
    fftw_free(cout);
    fftw_free(rbuf);
    if (plan == nullptr) throw Error("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<PlanKind, std::size_t>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

fftw_complex* as_fftw_mut(const std::complex<double>* p) {
  // FFTW's out-of-place c2c transforms never write their input.
  return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
}

void check_sizes(std::size_t in, std::size_t out) {
  if (in == 0 || in != out) throw InvalidArgument("fft: size mismatch or empty input");
}

}  // namespace

void fft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  check_sizes(in.size(), out.size());
  fftw_execute_dft(cache().get(PlanKind::Forward, in.size()), as_fftw_mut(in.data()),
                   as_fftw(out.data()));
}

void ifft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  check_sizes(in.size(), out.size());
  fftw_execute_dft(cache().get(PlanKind::Backward, in.size()), as_fftw_mut(in.data()),
                   as_fftw(out.data()));
}

void rfft(std::span<const double> in, std::span<std::complex<double>> out) {
  if (in.empty() || out.size() != in.size() / 2 + 1) throw InvalidArgument("rfft: size mismatch");
  fftw_execute_dft_r2c(cache().get(PlanKind::RealForward, in.size()),
                       const_cast<double*>(in.data()), as_fftw(out.data()));
}

void irfft(std::span<const std::complex<double>> in, std::span<double> out) {
  if (out.empty() || in.size() != out.size() / 2 + 1) throw InvalidArgument("irfft: size mismatch");
  // c2r overwrites its input.
  thread_local std::vector<std::complex<double>> scratch;
  scratch.assign(in.begin(), in.end());
  fftw_execute_dft_c2r(cache().get(PlanKind::RealBackward, out.size()), as_fftw(scratch.data()),
                       out.data());
}

std::size_t fast_length(std::size_t min_length) {
  std::size_t n = std::max<std::size_t>(min_length, 1);
  for (;; ++n) {
    std::size_t m = n;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (m % p == 0) m /= p;
    }
    if (m == 1) return n;
  }
}

}  // namespace doalab::detail
