#include "axiscat/detail/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace axiscat::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanBuffer {
  fftw_plan plan = nullptr;
  fftw_complex* buf = nullptr;
  int n = 0;

  PlanBuffer() = default;
  PlanBuffer(const PlanBuffer&) = delete;
  PlanBuffer& operator=(const PlanBuffer&) = delete;
  PlanBuffer(PlanBuffer&& o) noexcept : plan(o.plan), buf(o.buf), n(o.n) {
    o.plan = nullptr;
    o.buf = nullptr;
  }
  ~PlanBuffer() {
    if (plan || buf) {
      std::scoped_lock lock(planner_mutex());
      if (plan) fftw_destroy_plan(plan);
      if (buf) fftw_free(buf);
    }
  }
};

PlanBuffer make_plan(int n, int sign) {
  PlanBuffer pb;
  std::scoped_lock lock(planner_mutex());
  pb.n = n;
  pb.buf = fftw_alloc_complex(static_cast<size_t>(n));
  pb.plan = fftw_plan_dft_1d(n, pb.buf, pb.buf, sign, FFTW_ESTIMATE);
  return pb;
}

void execute(std::span<Complex> data, int sign) {
  const int n = static_cast<int>(data.size());
  if (n <= 1) return;
  thread_local std::map<std::pair<int, int>, PlanBuffer> cache;
  auto it = cache.find({n, sign});
  if (it == cache.end()) it = cache.emplace(std::make_pair(n, sign), make_plan(n, sign)).first;
  PlanBuffer& pb = it->second;
  std::memcpy(pb.buf, data.data(), sizeof(Complex) * n);
  fftw_execute(pb.plan);
  std::memcpy(data.data(), pb.buf, sizeof(Complex) * n);
}

}  // namespace

void fft_forward(std::span<Complex> data) { execute(data, FFTW_FORWARD); }
void fft_inverse(std::span<Complex> data) { execute(data, FFTW_BACKWARD); }

}  // namespace axiscat::detail
