#include <gtest/gtest.h>

#include "mail/core/rng.hpp"
#include "mail/diff/kernels.hpp"

namespace k = mail::diff::kernels;

namespace {

std::vector<float> random_vec(mail::Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

void expect_close(const std::vector<float>& a, const std::vector<float>& b, float tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

k::ConvGeom encoder_layer(std::size_t batch) {
  k::ConvGeom g;
  g.batch = batch;
  g.in_channels = 4;
  g.height = g.width = 32;
  g.out_channels = 16;
  g.stride = 2;
  return g;
}

}  // namespace

TEST(Kernels, GemmMatchesTripleLoop) {
  mail::Rng rng(1);
  const std::vector<std::size_t> ms{1, 3, 4, 9}, ns{1, 17}, ks{1, 5};
  for (std::size_t m : ms)
    for (std::size_t n : ns)
      for (std::size_t kk : ks) {
        auto a = random_vec(rng, m * kk), b = random_vec(rng, kk * n);
        std::vector<float> c(m * n, 0.0f), ref(m * n, 0.0f);
        k::serial::gemm_nn(m, n, kk, a.data(), b.data(), c.data());
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < kk; ++p) ref[i * n + j] += a[i * kk + p] * b[p * n + j];
        expect_close(c, ref, 1e-5f);
      }
}

TEST(Kernels, ParallelConvForwardIsBitwiseSerial) {
  mail::Rng rng(2);
  auto g = encoder_layer(6);
  auto x = random_vec(rng, g.batch * g.in_sample());
  auto w = random_vec(rng, g.out_channels * g.patch());
  auto b = random_vec(rng, g.out_channels);
  std::vector<float> ys(g.batch * g.out_sample()), yp(ys.size());
  k::serial::conv2d_forward(g, x.data(), w.data(), b.data(), ys.data());
  mail::diff::ThreadScope threads(4);
  k::parallel::conv2d_forward(g, x.data(), w.data(), b.data(), yp.data());
  EXPECT_EQ(ys, yp);
}

TEST(Kernels, ParallelConvBackwardMatchesSerial) {
  mail::Rng rng(3);
  auto g = encoder_layer(5);
  auto x = random_vec(rng, g.batch * g.in_sample());
  auto w = random_vec(rng, g.out_channels * g.patch());
  auto dy = random_vec(rng, g.batch * g.out_sample());
  std::vector<float> dxs(x.size()), dws(w.size()), dbs(g.out_channels);
  std::vector<float> dxp(x.size()), dwp(w.size()), dbp(g.out_channels);
  k::serial::conv2d_backward(g, x.data(), w.data(), dy.data(), dxs.data(), dws.data(), dbs.data());
  mail::diff::ThreadScope threads(3);
  k::parallel::conv2d_backward(g, x.data(), w.data(), dy.data(), dxp.data(), dwp.data(), dbp.data());
  EXPECT_EQ(dxs, dxp);
  expect_close(dws, dwp, 1e-3f);
  expect_close(dbs, dbp, 1e-3f);
}

TEST(Kernels, ParallelDenseIsBitwiseSerial) {
  mail::Rng rng(4);
  const std::vector<std::size_t> dims{37, 64, 24};
  const std::size_t n = dims[0], in = dims[1], out = dims[2];
  auto x = random_vec(rng, n * in), w = random_vec(rng, in * out), b = random_vec(rng, out);
  auto dy = random_vec(rng, n * out);
  std::vector<float> ys(n * out), yp(n * out);
  std::vector<float> dxs(n * in), dws(in * out), dbs(out), dxp(n * in), dwp(in * out), dbp(out);
  k::serial::dense_forward(n, in, out, x.data(), w.data(), b.data(), ys.data());
  k::serial::dense_backward(n, in, out, x.data(), w.data(), dy.data(), dxs.data(), dws.data(), dbs.data());
  mail::diff::ThreadScope threads(4);
  k::parallel::dense_forward(n, in, out, x.data(), w.data(), b.data(), yp.data());
  k::parallel::dense_backward(n, in, out, x.data(), w.data(), dy.data(), dxp.data(), dwp.data(), dbp.data());
  EXPECT_EQ(ys, yp);
  EXPECT_EQ(dxs, dxp);
  EXPECT_EQ(dws, dwp);
  EXPECT_EQ(dbs, dbp);
}

TEST(Kernels, DispatchDefaultsToSerial) {
  EXPECT_EQ(mail::diff::num_threads(), 1);
  {
    mail::diff::ThreadScope threads(2);
    EXPECT_EQ(mail::diff::num_threads(), 2);
  }
  EXPECT_EQ(mail::diff::num_threads(), 1);
}
