// Serial vs OpenMP gemm throughput and whole-model prediction speed.
//   bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "fixtures.hpp"
#include "morph/num/kernels.hpp"
#include "morph/train.hpp"

using namespace morph;
namespace k = morph::num::kernels;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double seconds(int repeats, F&& f) {
  const auto start = Clock::now();
  for (int r = 0; r < repeats; ++r) f();
  return std::chrono::duration<double>(Clock::now() - start).count() / repeats;
}

void bench_gemm(std::size_t m, std::size_t n, std::size_t kk, int repeats) {
  num::Rng rng(1);
  std::vector<float> a(m * kk), b(kk * n), c(m * n), d(m * n);
  for (auto& v : a) v = static_cast<float>(rng.uniform(-1, 1));
  for (auto& v : b) v = static_cast<float>(rng.uniform(-1, 1));
  const double ts = seconds(repeats, [&] { k::serial::gemm_nn(m, n, kk, a.data(), b.data(), c.data(), false); });
  const double tp = seconds(repeats, [&] { k::parallel::gemm_nn(m, n, kk, a.data(), b.data(), d.data(), false); });
  const double flops = 2.0 * static_cast<double>(m * n * kk);
  std::printf("gemm_nn %4zux%4zux%4zu  serial %8.3f ms %6.2f GFLOP/s  parallel %8.3f ms %6.2f GFLOP/s  %s\n", m, n,
              kk, ts * 1e3, flops / ts * 1e-9, tp * 1e3, flops / tp * 1e-9, c == d ? "identical" : "DIFFERENT");
}

void bench_predict(int repeats) {
  auto train = fixtures::surface_corpus(50, 1);
  auto dev = fixtures::surface_corpus(20, 2);
  TrainRequest req;
  req.train.max_epochs = 1;
  const auto sys = train_system(train, dev, {}, req, {}, fixtures::small_dictionary());
  auto test = fixtures::surface_corpus(200, 3);
  const auto view = sentence_view(test);
  const double ts = seconds(repeats, [&] { predict_corpus(*sys.analyzer, view, false); });
  const double tp = seconds(repeats, [&] { predict_corpus(*sys.analyzer, view, true); });
  const double tokens = static_cast<double>(test.token_count());
  std::printf("predict %zu sentences  serial %.0f tok/s  parallel %.0f tok/s\n", test.sentences.size(), tokens / ts,
              tokens / tp);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("openmp %s, %d threads\n", k::openmp_available() ? "on" : "off", k::max_threads());
  for (std::size_t s : {64, 256, 512}) bench_gemm(s, s, s, repeats);
  bench_gemm(800, 40, 314, repeats);
  bench_predict(repeats);
  return 0;
}
