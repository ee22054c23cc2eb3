#pragma once

// Dense and 3x3 convolution kernels. `serial` is the reference path and the
// deterministic default; `parallel` splits independent rows or samples across
// OpenMP threads. All kernels accumulate into their outputs unless noted.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "mail/diff/threading.hpp"

namespace mail::diff::kernels {

/// Geometry of a batched 3x3, zero-pad-1 convolution in NCHW layout.
struct ConvGeom {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t height = 3;
  std::size_t width = 3;
  std::size_t out_channels = 1;
  std::size_t stride = 1;

  std::size_t out_height() const { return (height + stride - 1) / stride; }
  std::size_t out_width() const { return (width + stride - 1) / stride; }
  std::size_t patch() const { return in_channels * 9; }
  std::size_t in_sample() const { return in_channels * height * width; }
  std::size_t out_pixels() const { return out_height() * out_width(); }
  std::size_t out_sample() const { return out_channels * out_pixels(); }
};

namespace serial {

/// c[m,n] += a[m,k] * b[k,n], all row-major.
template <class T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* __restrict a, const T* __restrict b,
             T* __restrict c) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    T* c0 = c + i * n;
    T* c1 = c0 + n;
    T* c2 = c1 + n;
    T* c3 = c2 + n;
    const T* a0 = a + i * k;
    const T* a1 = a0 + k;
    const T* a2 = a1 + k;
    const T* a3 = a2 + k;
    for (std::size_t p = 0; p < k; ++p) {
      const T* bp = b + p * n;
      const T x0 = a0[p], x1 = a1[p], x2 = a2[p], x3 = a3[p];
      for (std::size_t j = 0; j < n; ++j) {
        const T bj = bp[j];
        c0[j] += x0 * bj;
        c1[j] += x1 * bj;
        c2[j] += x2 * bj;
        c3[j] += x3 * bj;
      }
    }
  }
  for (; i < m; ++i) {
    T* ci = c + i * n;
    const T* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T* bp = b + p * n;
      const T x = ai[p];
      for (std::size_t j = 0; j < n; ++j) ci[j] += x * bp[j];
    }
  }
}

/// dst[cols,rows] = src[rows,cols]^T (overwrites).
template <class T>
void transpose(std::size_t rows, std::size_t cols, const T* __restrict src, T* __restrict dst) {
  constexpr std::size_t kBlock = 16;
  for (std::size_t r0 = 0; r0 < rows; r0 += kBlock) {
    const std::size_t r1 = std::min(rows, r0 + kBlock);
    for (std::size_t c0 = 0; c0 < cols; c0 += kBlock) {
      const std::size_t c1 = std::min(cols, c0 + kBlock);
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t c = c0; c < c1; ++c) dst[c * rows + r] = src[r * cols + c];
    }
  }
}

/// Unfolds one CHW sample into cols[c*9, oh*ow] (overwrites).
template <class T>
void im2col(const ConvGeom& g, const T* __restrict src, T* __restrict cols) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), s = g.stride;
  const long h = static_cast<long>(g.height), w = static_cast<long>(g.width);
  T* out = cols;
  for (std::size_t ch = 0; ch < g.in_channels; ++ch) {
    const T* plane = src + ch * g.height * g.width;
    for (long ky = 0; ky < 3; ++ky) {
      for (long kx = 0; kx < 3; ++kx) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const long iy = static_cast<long>(oy * s) + ky - 1;
          if (iy < 0 || iy >= h) {
            std::fill(out, out + ow, T(0));
            out += ow;
            continue;
          }
          const T* row = plane + iy * w;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const long ix = static_cast<long>(ox * s) + kx - 1;
            *out++ = (ix >= 0 && ix < w) ? row[ix] : T(0);
          }
        }
      }
    }
  }
}

/// Folds cols[c*9, oh*ow] back onto a CHW sample, adding into dst.
template <class T>
void col2im_add(const ConvGeom& g, const T* __restrict cols, T* __restrict dst) {
  const std::size_t oh = g.out_height(), ow = g.out_width(), s = g.stride;
  const long h = static_cast<long>(g.height), w = static_cast<long>(g.width);
  const T* in = cols;
  for (std::size_t ch = 0; ch < g.in_channels; ++ch) {
    T* plane = dst + ch * g.height * g.width;
    for (long ky = 0; ky < 3; ++ky) {
      for (long kx = 0; kx < 3; ++kx) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const long iy = static_cast<long>(oy * s) + ky - 1;
          if (iy < 0 || iy >= h) {
            in += ow;
            continue;
          }
          T* row = plane + iy * w;
          for (std::size_t ox = 0; ox < ow; ++ox, ++in) {
            const long ix = static_cast<long>(ox * s) + kx - 1;
            if (ix >= 0 && ix < w) row[ix] += *in;
          }
        }
      }
    }
  }
}

/// y[n,o,oh,ow] = conv(x, kernel[o,c,3,3]) + bias[o] (overwrites y).
template <class T>
void conv2d_forward(const ConvGeom& g, const T* x, const T* kernel, const T* bias, T* y) {
  const std::size_t pix = g.out_pixels();
  std::vector<T> cols(g.patch() * pix);
  for (std::size_t s = 0; s < g.batch; ++s) {
    T* ys = y + s * g.out_sample();
    for (std::size_t o = 0; o < g.out_channels; ++o) std::fill(ys + o * pix, ys + (o + 1) * pix, bias ? bias[o] : T(0));
    im2col(g, x + s * g.in_sample(), cols.data());
    gemm_nn(g.out_channels, pix, g.patch(), kernel, cols.data(), ys);
  }
}

/// Accumulates whichever of dx, dkernel, dbias are non-null from dy.
template <class T>
void conv2d_backward(const ConvGeom& g, const T* x, const T* kernel, const T* dy, T* dx, T* dkernel, T* dbias) {
  const std::size_t pix = g.out_pixels(), patch = g.patch();
  std::vector<T> cols(patch * pix), cols_t(pix * patch), kernel_t(patch * g.out_channels);
  transpose(g.out_channels, patch, kernel, kernel_t.data());
  for (std::size_t s = 0; s < g.batch; ++s) {
    const T* dys = dy + s * g.out_sample();
    if (dbias) {
      for (std::size_t o = 0; o < g.out_channels; ++o) {
        T acc = 0;
        for (std::size_t p = 0; p < pix; ++p) acc += dys[o * pix + p];
        dbias[o] += acc;
      }
    }
    if (dkernel) {
      im2col(g, x + s * g.in_sample(), cols.data());
      transpose(patch, pix, cols.data(), cols_t.data());
      gemm_nn(g.out_channels, patch, pix, dys, cols_t.data(), dkernel);
    }
    if (dx) {
      std::fill(cols.begin(), cols.end(), T(0));
      gemm_nn(patch, pix, g.out_channels, kernel_t.data(), dys, cols.data());
      col2im_add(g, cols.data(), dx + s * g.in_sample());
    }
  }
}

/// y[n,out] = x[n,in] * w[in,out] + b[out] (overwrites y).
template <class T>
void dense_forward(std::size_t n, std::size_t in, std::size_t out, const T* x, const T* w, const T* b, T* y) {
  for (std::size_t r = 0; r < n; ++r) {
    T* yr = y + r * out;
    if (b) {
      std::copy(b, b + out, yr);
    } else {
      std::fill(yr, yr + out, T(0));
    }
  }
  gemm_nn(n, out, in, x, w, y);
}

/// Accumulates whichever of dx, dw, db are non-null from dy.
template <class T>
void dense_backward(std::size_t n, std::size_t in, std::size_t out, const T* x, const T* w, const T* dy, T* dx, T* dw,
                    T* db) {
  if (dx) {
    std::vector<T> w_t(in * out);
    transpose(in, out, w, w_t.data());
    gemm_nn(n, in, out, dy, w_t.data(), dx);
  }
  if (dw) {
    std::vector<T> x_t(in * n);
    transpose(n, in, x, x_t.data());
    gemm_nn(in, out, n, x_t.data(), dy, dw);
  }
  if (db) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < out; ++j) db[j] += dy[r * out + j];
  }
}

}  // namespace serial

namespace parallel {

/// Row-partitioned gemm; each output row is written by exactly one thread.
template <class T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
#ifdef MAIL_HAVE_OPENMP
  const int threads = num_threads();
  if (threads > 1 && m >= 8) {
    const std::size_t chunk = std::max<std::size_t>(4, ((m + threads - 1) / threads + 3) / 4 * 4);
    const long blocks = static_cast<long>((m + chunk - 1) / chunk);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long blk = 0; blk < blocks; ++blk) {
      const std::size_t start = static_cast<std::size_t>(blk) * chunk;
      const std::size_t rows = std::min(chunk, m - start);
      serial::gemm_nn(rows, n, k, a + start * k, b, c + start * n);
    }
    return;
  }
#endif
  serial::gemm_nn(m, n, k, a, b, c);
}

template <class T>
void conv2d_forward(const ConvGeom& g, const T* x, const T* kernel, const T* bias, T* y) {
#ifdef MAIL_HAVE_OPENMP
  const int threads = num_threads();
  if (threads > 1 && g.batch > 1) {
#pragma omp parallel num_threads(threads)
    {
      ConvGeom one = g;
      one.batch = 1;
#pragma omp for schedule(static)
      for (long s = 0; s < static_cast<long>(g.batch); ++s) {
        serial::conv2d_forward(one, x + s * g.in_sample(), kernel, bias, y + s * g.out_sample());
      }
    }
    return;
  }
#endif
  serial::conv2d_forward(g, x, kernel, bias, y);
}

/// Samples are split into one contiguous block per thread; per-thread kernel
/// and bias gradients are reduced in thread order, so results are
/// reproducible for a fixed thread count.
template <class T>
void conv2d_backward(const ConvGeom& g, const T* x, const T* kernel, const T* dy, T* dx, T* dkernel, T* dbias) {
#ifdef MAIL_HAVE_OPENMP
  const int threads = static_cast<int>(std::min<std::size_t>(num_threads(), g.batch));
  if (threads > 1) {
    const std::size_t kernel_len = g.out_channels * g.patch();
    std::vector<std::vector<T>> dk(threads, std::vector<T>(kernel_len, T(0)));
    std::vector<std::vector<T>> db(threads, std::vector<T>(g.out_channels, T(0)));
#pragma omp parallel num_threads(threads)
    {
      const int t = omp_get_thread_num();
      const std::size_t begin = g.batch * t / threads, end = g.batch * (t + 1) / threads;
      ConvGeom part = g;
      part.batch = end - begin;
      if (part.batch > 0) {
        serial::conv2d_backward(part, x + begin * g.in_sample(), kernel, dy + begin * g.out_sample(),
                                dx ? dx + begin * g.in_sample() : nullptr, dkernel ? dk[t].data() : nullptr,
                                dbias ? db[t].data() : nullptr);
      }
    }
    for (int t = 0; t < threads; ++t) {
      if (dkernel)
        for (std::size_t i = 0; i < kernel_len; ++i) dkernel[i] += dk[t][i];
      if (dbias)
        for (std::size_t o = 0; o < g.out_channels; ++o) dbias[o] += db[t][o];
    }
    return;
  }
#endif
  serial::conv2d_backward(g, x, kernel, dy, dx, dkernel, dbias);
}

template <class T>
void dense_forward(std::size_t n, std::size_t in, std::size_t out, const T* x, const T* w, const T* b, T* y) {
  for (std::size_t r = 0; r < n; ++r) {
    T* yr = y + r * out;
    if (b) {
      std::copy(b, b + out, yr);
    } else {
      std::fill(yr, yr + out, T(0));
    }
  }
  gemm_nn(n, out, in, x, w, y);
}

template <class T>
void dense_backward(std::size_t n, std::size_t in, std::size_t out, const T* x, const T* w, const T* dy, T* dx, T* dw,
                    T* db) {
  if (dx) {
    std::vector<T> w_t(in * out);
    serial::transpose(in, out, w, w_t.data());
    gemm_nn(n, in, out, dy, w_t.data(), dx);
  }
  if (dw) {
    std::vector<T> x_t(in * n);
    serial::transpose(n, in, x, x_t.data());
    gemm_nn(in, out, n, x_t.data(), dy, dw);
  }
  if (db) {
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < out; ++j) db[j] += dy[r * out + j];
  }
}

}  // namespace parallel

// Dispatch: serial reference unless more than one thread is configured.

template <class T>
void conv2d_forward(const ConvGeom& g, const T* x, const T* kernel, const T* bias, T* y) {
  if (num_threads() > 1) {
    parallel::conv2d_forward(g, x, kernel, bias, y);
  } else {
    serial::conv2d_forward(g, x, kernel, bias, y);
  }
}

template <class T>
void conv2d_backward(const ConvGeom& g, const T* x, const T* kernel, const T* dy, T* dx, T* dkernel, T* dbias) {
  if (num_threads() > 1) {
    parallel::conv2d_backward(g, x, kernel, dy, dx, dkernel, dbias);
  } else {
    serial::conv2d_backward(g, x, kernel, dy, dx, dkernel, dbias);
  }
}

template <class T>
void dense_forward(std::size_t n, std::size_t in, std::size_t out, const T* x, const T* w, const T* b, T* y) {
  if (num_threads() > 1) {
    parallel::dense_forward(n, in, out, x, w, b, y);
  } else {
    serial::dense_forward(n, in, out, x, w, b, y);
  }
}

template <class T>
void dense_backward(std::size_t n, std::size_t in, std::size_t out, const T* x, const T* w, const T* dy, T* dx, T* dw,
                    T* db) {
  if (num_threads() > 1) {
    parallel::dense_backward(n, in, out, x, w, dy, dx, dw, db);
  } else {
    serial::dense_backward(n, in, out, x, w, dy, dx, dw, db);
  }
}

}  // namespace mail::diff::kernels
