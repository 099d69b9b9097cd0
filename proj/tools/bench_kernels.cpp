#include <omp.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "binquant/common.hpp"
#include "binquant/kernels.hpp"

// Times every kernel twice -- serial reference vs OpenMP -- and reports the
// largest element difference, which must be exactly zero by construction.

namespace {

using binquant::make_rng;
using binquant::mix64;
using binquant::next_uniform;

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  auto rng = make_rng(mix64(seed));
  std::vector<double> v(n);
  for (double& x : v) x = next_uniform(rng, -1.0, 1.0);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <typename F>
double time_ms(F&& run, int reps) {
  run();  // warm up
  double t0 = omp_get_wtime();
  for (int r = 0; r < reps; ++r) run();
  return (omp_get_wtime() - t0) * 1000.0 / reps;
}

struct Row {
  const char* name;
  double serial_ms, omp_ms, diff;
};

void print_rows(const std::vector<Row>& rows) {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-16s %12s %12s %9s %10s\n", "kernel", "serial-ms", "omp-ms", "speedup",
              "max-diff");
  for (const Row& r : rows)
    std::printf("%-16s %12.3f %12.3f %8.2fx %10.3g\n", r.name, r.serial_ms, r.omp_ms,
                r.serial_ms / r.omp_ms, r.diff);
}

}  // namespace

int main() {
  namespace k = binquant::kernels;
  std::vector<Row> rows;
  const int reps = 20;

  {  // dense: the shapes the image preset actually runs
    const std::size_t B = 128, I = 784, O = 128;
    auto x = random_vec(B * I, 1), wt = random_vec(I * O, 2), bias = random_vec(O, 3);
    auto dy = random_vec(B * O, 4);
    std::vector<double> y_ref(B * O), y_omp(B * O);
    rows.push_back({"dense_forward",
                    time_ms([&] { k::ref::dense_forward(x.data(), wt.data(), bias.data(),
                                                        y_ref.data(), B, I, O); },
                            reps),
                    time_ms([&] { k::dense_forward(x.data(), wt.data(), bias.data(),
                                                   y_omp.data(), B, I, O); },
                            reps),
                    max_diff(y_ref, y_omp)});

    std::vector<double> dw_ref(I * O), dw_omp(I * O);
    rows.push_back({"dense_dw",
                    time_ms([&] { k::ref::dense_backward_dw(x.data(), dy.data(),
                                                            dw_ref.data(), B, I, O); },
                            reps),
                    time_ms([&] { k::dense_backward_dw(x.data(), dy.data(),
                                                       dw_omp.data(), B, I, O); },
                            reps),
                    max_diff(dw_ref, dw_omp)});

    std::vector<double> dx_ref(B * I), dx_omp(B * I);
    rows.push_back({"dense_dx",
                    time_ms([&] { k::ref::dense_backward_dx(dy.data(), wt.data(),
                                                            dx_ref.data(), B, I, O); },
                            reps),
                    time_ms([&] { k::dense_backward_dx(dy.data(), wt.data(),
                                                       dx_omp.data(), B, I, O); },
                            reps),
                    max_diff(dx_ref, dx_omp)});
  }

  {  // conv
    const std::size_t B = 8, C = 8, H = 28, W = 28, OC = 16, K = 3;
    const std::size_t OH = H - K + 1, OW = W - K + 1;
    auto x = random_vec(B * C * H * W, 5), w = random_vec(OC * C * K * K, 6),
         bias = random_vec(OC, 7), dy = random_vec(B * OC * OH * OW, 8);
    std::vector<double> y_ref(B * OC * OH * OW), y_omp(y_ref.size());
    rows.push_back(
        {"conv2d_forward",
         time_ms([&] { k::ref::conv2d_forward(x.data(), w.data(), bias.data(),
                                              y_ref.data(), B, C, H, W, OC, K); },
                 reps),
         time_ms([&] { k::conv2d_forward(x.data(), w.data(), bias.data(), y_omp.data(),
                                         B, C, H, W, OC, K); },
                 reps),
         max_diff(y_ref, y_omp)});

    std::vector<double> dw_ref(OC * C * K * K), dw_omp(dw_ref.size());
    rows.push_back(
        {"conv2d_dw",
         time_ms([&] { k::ref::conv2d_backward_dw(x.data(), dy.data(), dw_ref.data(), B,
                                                  C, H, W, OC, K); },
                 reps),
         time_ms([&] { k::conv2d_backward_dw(x.data(), dy.data(), dw_omp.data(), B, C, H,
                                             W, OC, K); },
                 reps),
         max_diff(dw_ref, dw_omp)});

    std::vector<double> dx_ref(B * C * H * W), dx_omp(dx_ref.size());
    rows.push_back(
        {"conv2d_dx",
         time_ms([&] { k::ref::conv2d_backward_dx(dy.data(), w.data(), dx_ref.data(), B,
                                                  C, H, W, OC, K); },
                 reps),
         time_ms([&] { k::conv2d_backward_dx(dy.data(), w.data(), dx_omp.data(), B, C, H,
                                             W, OC, K); },
                 reps),
         max_diff(dx_ref, dx_omp)});
  }

  {  // relu
    const std::size_t n = 1 << 22;
    auto x = random_vec(n, 9);
    std::vector<double> y_ref(n), y_omp(n);
    rows.push_back(
        {"relu_forward",
         time_ms([&] { k::ref::relu_forward(x.data(), y_ref.data(), n); }, reps),
         time_ms([&] { k::relu_forward(x.data(), y_omp.data(), n); }, reps),
         max_diff(y_ref, y_omp)});
  }

  print_rows(rows);
  for (const Row& r : rows)
    if (r.diff != 0.0) {
      std::fprintf(stderr, "FAIL: %s differs from the serial reference\n", r.name);
      return 1;
    }
  return 0;
}
