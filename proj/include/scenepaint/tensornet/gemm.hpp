#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <type_traits>

#if defined(__AVX2__) || defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace scenepaint::nn {

namespace detail {

// Every output element is produced as acc = bias; acc = fma(in[k], w[k], acc)
// for k = 0..K-1 with a single rounding per step, whichever path handles it.
// A row's result therefore does not depend on its position, on the other
// rows, or on the instruction set.
template <typename T>
inline void affine_scalar(const T* in, const T* w, const T* bias, T* out, std::size_t rows, std::size_t k_dim,
                          std::size_t n_dim) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t n = 0; n < n_dim; ++n) {
      T acc = bias ? bias[n] : T(0);
      for (std::size_t k = 0; k < k_dim; ++k) acc = std::fma(in[r * k_dim + k], w[k * n_dim + n], acc);
      out[r * n_dim + n] = acc;
    }
  }
}

#if defined(__AVX512F__)

template <int Rows, int Vecs>
inline void affine_tile_f32(const float* in, const float* w, const float* bias, float* out, std::size_t k_dim,
                            std::size_t n_dim, std::size_t n0, __mmask16 last_mask) {
  __m512 acc[Rows][Vecs];
  for (int v = 0; v < Vecs; ++v) {
    const __mmask16 m = v + 1 == Vecs ? last_mask : __mmask16(0xffff);
    const __m512 b = bias ? _mm512_maskz_loadu_ps(m, bias + n0 + 16 * v) : _mm512_setzero_ps();
    for (int r = 0; r < Rows; ++r) acc[r][v] = b;
  }
  for (std::size_t k = 0; k < k_dim; ++k) {
    __m512 wv[Vecs];
    const float* wk = w + k * n_dim + n0;
    for (int v = 0; v < Vecs; ++v) {
      const __mmask16 m = v + 1 == Vecs ? last_mask : __mmask16(0xffff);
      wv[v] = _mm512_maskz_loadu_ps(m, wk + 16 * v);
    }
    for (int r = 0; r < Rows; ++r) {
      const __m512 a = _mm512_set1_ps(in[r * k_dim + k]);
      for (int v = 0; v < Vecs; ++v) acc[r][v] = _mm512_fmadd_ps(a, wv[v], acc[r][v]);
    }
  }
  for (int r = 0; r < Rows; ++r) {
    for (int v = 0; v < Vecs; ++v) {
      const __mmask16 m = v + 1 == Vecs ? last_mask : __mmask16(0xffff);
      _mm512_mask_storeu_ps(out + r * n_dim + n0 + 16 * v, m, acc[r][v]);
    }
  }
}

template <int Rows>
inline void affine_rows_f32(const float* in, const float* w, const float* bias, float* out, std::size_t k_dim,
                            std::size_t n_dim) {
  std::size_t n = 0;
  for (; n + 64 <= n_dim; n += 64) affine_tile_f32<Rows, 4>(in, w, bias, out, k_dim, n_dim, n, 0xffff);
  const std::size_t rem = n_dim - n;
  if (rem == 0) return;
  const int vecs = static_cast<int>((rem + 15) / 16);
  const __mmask16 mask = static_cast<__mmask16>(rem % 16 == 0 ? 0xffff : (1u << (rem % 16)) - 1u);
  switch (vecs) {
    case 1: affine_tile_f32<Rows, 1>(in, w, bias, out, k_dim, n_dim, n, mask); break;
    case 2: affine_tile_f32<Rows, 2>(in, w, bias, out, k_dim, n_dim, n, mask); break;
    case 3: affine_tile_f32<Rows, 3>(in, w, bias, out, k_dim, n_dim, n, mask); break;
    default: affine_tile_f32<Rows, 4>(in, w, bias, out, k_dim, n_dim, n, mask); break;
  }
}

inline void affine_f32(const float* in, const float* w, const float* bias, float* out, std::size_t rows,
                       std::size_t k_dim, std::size_t n_dim) {
  std::size_t p = 0;
  for (; p + 4 <= rows; p += 4) affine_rows_f32<4>(in + p * k_dim, w, bias, out + p * n_dim, k_dim, n_dim);
  for (; p < rows; ++p) affine_rows_f32<1>(in + p * k_dim, w, bias, out + p * n_dim, k_dim, n_dim);
}

#elif defined(__AVX2__) && defined(__FMA__)

template <int Rows, int Vecs>
inline void affine_tile_f32(const float* in, const float* w, const float* bias, float* out, std::size_t k_dim,
                            std::size_t n_dim, std::size_t n0, __m256i last_mask) {
  const __m256i full = _mm256_set1_epi32(-1);
  __m256 acc[Rows][Vecs];
  for (int v = 0; v < Vecs; ++v) {
    const __m256i m = v + 1 == Vecs ? last_mask : full;
    const __m256 b = bias ? _mm256_maskload_ps(bias + n0 + 8 * v, m) : _mm256_setzero_ps();
    for (int r = 0; r < Rows; ++r) acc[r][v] = b;
  }
  for (std::size_t k = 0; k < k_dim; ++k) {
    __m256 wv[Vecs];
    const float* wk = w + k * n_dim + n0;
    for (int v = 0; v < Vecs; ++v) wv[v] = _mm256_maskload_ps(wk + 8 * v, v + 1 == Vecs ? last_mask : full);
    for (int r = 0; r < Rows; ++r) {
      const __m256 a = _mm256_set1_ps(in[r * k_dim + k]);
      for (int v = 0; v < Vecs; ++v) acc[r][v] = _mm256_fmadd_ps(a, wv[v], acc[r][v]);
    }
  }
  for (int r = 0; r < Rows; ++r) {
    for (int v = 0; v < Vecs; ++v) {
      _mm256_maskstore_ps(out + r * n_dim + n0 + 8 * v, v + 1 == Vecs ? last_mask : full, acc[r][v]);
    }
  }
}

template <int Rows>
inline void affine_rows_f32(const float* in, const float* w, const float* bias, float* out, std::size_t k_dim,
                            std::size_t n_dim) {
  const __m256i full = _mm256_set1_epi32(-1);
  std::size_t n = 0;
  for (; n + 16 <= n_dim; n += 16) affine_tile_f32<Rows, 2>(in, w, bias, out, k_dim, n_dim, n, full);
  const std::size_t rem = n_dim - n;
  if (rem == 0) return;
  const int tail = static_cast<int>(rem % 8 == 0 ? 8 : rem % 8);
  alignas(32) std::int32_t lanes[8];
  for (int i = 0; i < 8; ++i) lanes[i] = i < tail ? -1 : 0;
  const __m256i mask = _mm256_load_si256(reinterpret_cast<const __m256i*>(lanes));
  if (rem > 8) {
    affine_tile_f32<Rows, 2>(in, w, bias, out, k_dim, n_dim, n, mask);
  } else {
    affine_tile_f32<Rows, 1>(in, w, bias, out, k_dim, n_dim, n, mask);
  }
}

inline void affine_f32(const float* in, const float* w, const float* bias, float* out, std::size_t rows,
                       std::size_t k_dim, std::size_t n_dim) {
  std::size_t p = 0;
  for (; p + 4 <= rows; p += 4) affine_rows_f32<4>(in + p * k_dim, w, bias, out + p * n_dim, k_dim, n_dim);
  for (; p < rows; ++p) affine_rows_f32<1>(in + p * k_dim, w, bias, out + p * n_dim, k_dim, n_dim);
}

#endif

}  // namespace detail

/// out[p, :] = bias + in[p, :] * w for a (P x K) input and (K x N) weights,
/// all row-major. `bias` may be null. Position-invariant per row.
template <typename T>
void row_affine(const T* in, const T* w, const T* bias, T* out, std::size_t rows, std::size_t k_dim,
                std::size_t n_dim) {
#if defined(__AVX512F__) || (defined(__AVX2__) && defined(__FMA__))
  if constexpr (std::is_same_v<T, float>) {
    detail::affine_f32(in, w, bias, out, rows, k_dim, n_dim);
    return;
  }
#endif
  detail::affine_scalar(in, w, bias, out, rows, k_dim, n_dim);
}

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

/// out (K x N) += a^T (K x P) * b (P x N).
template <typename T>
void accumulate_at_b(const T* a, const T* b, T* out, std::size_t rows, std::size_t k_dim, std::size_t n_dim) {
  ConstMatrixMap<T> am(a, rows, k_dim);
  ConstMatrixMap<T> bm(b, rows, n_dim);
  MatrixMap<T> om(out, k_dim, n_dim);
  om.noalias() += am.transpose() * bm;
}

/// out (P x K) = g (P x N) * w^T (N x K).
template <typename T>
void multiply_a_bt(const T* g, const T* w, T* out, std::size_t rows, std::size_t k_dim, std::size_t n_dim) {
  ConstMatrixMap<T> gm(g, rows, n_dim);
  ConstMatrixMap<T> wm(w, k_dim, n_dim);
  MatrixMap<T> om(out, rows, k_dim);
  om.noalias() = gm * wm.transpose();
}

}  // namespace scenepaint::nn
