// SPDX-License-Identifier: Apache-2.0

#include "memlab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Core>

#include "memlab/errors.hpp"

namespace memlab::ops {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

template <typename T>
bool tracking(GradTape<T>* tape, std::initializer_list<const Tensor<T>*> inputs) {
  if (tape == nullptr) return false;
  for (const auto* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw UsageError(msg);
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw UsageError(std::string(op) + ": shape mismatch " + shape_to_string(a) + " vs " +
                     shape_to_string(b));
  }
}

template <typename T>
void require_matrix(const Tensor<T>& t, const char* op) {
  if (t.rank() != 2) throw UsageError(std::string(op) + ": expected a matrix, got " + shape_to_string(t.shape()));
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b, GradTape<T>* tape) {
  require_same_shape(a.shape(), b.shape(), "add");
  const bool track = tracking(tape, {&a, &b});
  Tensor<T> out(a.shape(), track);
  auto y = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  if (track) {
    tape->record([a, b, out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b, GradTape<T>* tape) {
  require_same_shape(a.shape(), b.shape(), "mul");
  const bool track = tracking(tape, {&a, &b});
  Tensor<T> out(a.shape(), track);
  auto y = out.values();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  if (track) {
    tape->record([a, b, out]() mutable {
      auto g = out.grad();
      auto av = std::as_const(a).values();
      auto bv = std::as_const(b).values();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor, GradTape<T>* tape) {
  const bool track = tracking(tape, {&a});
  Tensor<T> out(a.shape(), track);
  auto y = out.values();
  auto av = a.values();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * factor;
  if (track) {
    tape->record([a, out, factor]() mutable {
      auto g = out.grad();
      auto ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
    });
  }
  return out;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a, GradTape<T>* tape) {
  const bool track = tracking(tape, {&a});
  Tensor<T> out(Shape{1}, track);
  T acc = 0;
  for (T v : a.values()) acc += v;
  out.values()[0] = acc;
  if (track) {
    tape->record([a, out]() mutable {
      const T g = out.grad()[0];
      for (auto& ga : a.grad()) ga += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, GradTape<T>* tape) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const auto n = a.dim(0), k = a.dim(1), m = b.dim(1);
  require(b.dim(0) == k, "matmul: inner extents differ " + shape_to_string(a.shape()) + " x " +
                             shape_to_string(b.shape()));
  const bool track = tracking(tape, {&a, &b});
  Tensor<T> out(Shape{n, m}, track);
  MapMat<T>(out.data(), n, m).noalias() = ConstMapMat<T>(a.data(), n, k) * ConstMapMat<T>(b.data(), k, m);
  if (track) {
    tape->record([a, b, out, n, k, m]() mutable {
      ConstMapMat<T> g(std::as_const(out).grad().data(), n, m);
      if (a.requires_grad()) {
        MapMat<T>(a.grad().data(), n, k).noalias() += g * ConstMapMat<T>(b.data(), k, m).transpose();
      }
      if (b.requires_grad()) {
        MapMat<T>(b.grad().data(), k, m).noalias() += ConstMapMat<T>(a.data(), n, k).transpose() * g;
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b, GradTape<T>* tape) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  const auto n = a.dim(0), k = a.dim(1), m = b.dim(0);
  require(b.dim(1) == k, "matmul_nt: inner extents differ " + shape_to_string(a.shape()) + " x " +
                             shape_to_string(b.shape()) + "^T");
  const bool track = tracking(tape, {&a, &b});
  Tensor<T> out(Shape{n, m}, track);
  MapMat<T>(out.data(), n, m).noalias() =
      ConstMapMat<T>(a.data(), n, k) * ConstMapMat<T>(b.data(), m, k).transpose();
  if (track) {
    tape->record([a, b, out, n, k, m]() mutable {
      ConstMapMat<T> g(std::as_const(out).grad().data(), n, m);
      if (a.requires_grad()) {
        MapMat<T>(a.grad().data(), n, k).noalias() += g * ConstMapMat<T>(b.data(), m, k);
      }
      if (b.requires_grad()) {
        MapMat<T>(b.grad().data(), m, k).noalias() += g.transpose() * ConstMapMat<T>(a.data(), n, k);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, GradTape<T>* tape) {
  require_matrix(x, "linear");
  require_matrix(w, "linear");
  const auto n = x.dim(0), in = x.dim(1), outd = w.dim(1);
  require(w.dim(0) == in, "linear: weight " + shape_to_string(w.shape()) + " does not accept input " +
                              shape_to_string(x.shape()));
  require(bias.numel() == outd, "linear: bias extent mismatch");
  const bool track = tracking(tape, {&x, &w, &bias});
  Tensor<T> out(Shape{n, outd}, track);
  MapMat<T> y(out.data(), n, outd);
  y.noalias() = ConstMapMat<T>(x.data(), n, in) * ConstMapMat<T>(w.data(), in, outd);
  y.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.data(), outd);
  if (track) {
    tape->record([x, w, bias, out, n, in, outd]() mutable {
      ConstMapMat<T> g(std::as_const(out).grad().data(), n, outd);
      if (x.requires_grad()) {
        MapMat<T>(x.grad().data(), n, in).noalias() += g * ConstMapMat<T>(w.data(), in, outd).transpose();
      }
      if (w.requires_grad()) {
        MapMat<T>(w.grad().data(), in, outd).noalias() += ConstMapMat<T>(x.data(), n, in).transpose() * g;
      }
      if (bias.requires_grad()) {
        Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.grad().data(), outd) += g.colwise().sum();
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x, GradTape<T>* tape) {
  check_finite<T>(x.values(), "gelu input");
  const bool track = tracking(tape, {&x});
  Tensor<T> out(x.shape(), track);
  auto xv = x.values();
  auto y = out.values();
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = T(0.5) * xv[i] * (T(1) + std::erf(xv[i] * inv_sqrt2));
  }
  if (track) {
    tape->record([x, out, inv_sqrt2]() mutable {
      const T inv_sqrt_2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
      auto g = std::as_const(out).grad();
      auto gx = x.grad();
      auto xv = std::as_const(x).values();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const T v = xv[i];
        const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
        const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
        gx[i] += g[i] * (cdf + v * pdf);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis, GradTape<T>* tape) {
  require(axis < x.rank(), "softmax: axis " + std::to_string(axis) + " out of range for shape " +
                               shape_to_string(x.shape()));
  std::size_t outer = 1, inner = 1;
  const std::size_t n = x.dim(axis);
  for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
  for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);

  const bool track = tracking(tape, {&x});
  Tensor<T> out(x.shape(), track);
  auto xv = x.values();
  auto y = out.values();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, xv[base + k * inner]);
      T z = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const T e = std::exp(xv[base + k * inner] - mx);
        y[base + k * inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < n; ++k) y[base + k * inner] /= z;
    }
  }
  if (track) {
    tape->record([x, out, outer, inner, n]() mutable {
      auto g = std::as_const(out).grad();
      auto yv = std::as_const(out).values();
      auto gx = x.grad();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
          const std::size_t base = o * n * inner + in;
          T dot = 0;
          for (std::size_t k = 0; k < n; ++k) dot += g[base + k * inner] * yv[base + k * inner];
          for (std::size_t k = 0; k < n; ++k) {
            const auto idx = base + k * inner;
            gx[idx] += yv[idx] * (g[idx] - dot);
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps,
                     GradTape<T>* tape) {
  const std::size_t d = x.shape().back();
  require(d >= 2, "layer_norm: normalized extent must be at least 2");
  require(gain.numel() == d && bias.numel() == d, "layer_norm: gain/bias extent mismatch");
  const std::size_t rows = x.numel() / d;
  const bool track = tracking(tape, {&x, &gain, &bias});
  Tensor<T> out(x.shape(), track);
  std::vector<T> mean(rows), rstd(rows);
  auto xv = x.values();
  auto y = out.values();
  auto gv = gain.values();
  auto bv = bias.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data() + r * d;
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= T(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= T(d);
    const T rs = T(1) / std::sqrt(var + eps);
    mean[r] = mu;
    rstd[r] = rs;
    T* yr = y.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) yr[j] = (row[j] - mu) * rs * gv[j] + bv[j];
  }
  if (track) {
    tape->record([x, gain, bias, out, mean = std::move(mean), rstd = std::move(rstd), rows, d]() mutable {
      auto g = std::as_const(out).grad();
      auto xv = std::as_const(x).values();
      auto gv = std::as_const(gain).values();
      std::vector<T> xhat(d), dxhat(d);
      for (std::size_t r = 0; r < rows; ++r) {
        const T* row = xv.data() + r * d;
        const T* gr = g.data() + r * d;
        T mean_dxhat = 0, mean_dxhat_xhat = 0;
        for (std::size_t j = 0; j < d; ++j) {
          xhat[j] = (row[j] - mean[r]) * rstd[r];
          dxhat[j] = gr[j] * gv[j];
          mean_dxhat += dxhat[j];
          mean_dxhat_xhat += dxhat[j] * xhat[j];
        }
        mean_dxhat /= T(d);
        mean_dxhat_xhat /= T(d);
        if (gain.requires_grad()) {
          auto gg = gain.grad();
          for (std::size_t j = 0; j < d; ++j) gg[j] += gr[j] * xhat[j];
        }
        if (bias.requires_grad()) {
          auto gb = bias.grad();
          for (std::size_t j = 0; j < d; ++j) gb[j] += gr[j];
        }
        if (x.requires_grad()) {
          T* gx = x.grad().data() + r * d;
          for (std::size_t j = 0; j < d; ++j) {
            gx[j] += rstd[r] * (dxhat[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const std::int32_t> ids, GradTape<T>* tape) {
  require_matrix(table, "embedding");
  require(!ids.empty(), "embedding: empty id list");
  const std::size_t rows = table.dim(0), d = table.dim(1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= rows) {
      throw InputError("embedding: id " + std::to_string(ids[i]) + " at offset " + std::to_string(i) +
                       " outside [0, " + std::to_string(rows) + ")");
    }
  }
  const bool track = tracking(tape, {&table});
  Tensor<T> out(Shape{ids.size(), d}, track);
  auto tv = table.values();
  auto y = out.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(tv.data() + static_cast<std::size_t>(ids[i]) * d, d, y.data() + i * d);
  }
  if (track) {
    tape->record([table, out, ids = std::vector<std::int32_t>(ids.begin(), ids.end()), d]() mutable {
      auto g = std::as_const(out).grad();
      auto gt = table.grad();
      for (std::size_t i = 0; i < ids.size(); ++i) {
        T* dst = gt.data() + static_cast<std::size_t>(ids[i]) * d;
        const T* src = g.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> attention(const Tensor<T>& qkv, const AttentionLayout& layout, GradTape<T>* tape) {
  require_matrix(qkv, "attention");
  const std::size_t B = layout.batch, S = layout.seq, H = layout.heads;
  require(B * S == qkv.dim(0), "attention: qkv rows must equal batch*seq");
  require(qkv.dim(1) % 3 == 0, "attention: qkv width must be 3*d");
  const std::size_t d = qkv.dim(1) / 3;
  require(H > 0 && d % H == 0, "attention: d not divisible by heads");
  require(layout.lengths.size() == B, "attention: one length per batch row");
  const std::size_t hs = d / H;
  const T scl = T(1) / std::sqrt(T(hs));
  const std::size_t row_stride = 3 * d;

  std::vector<std::size_t> offsets(B * H + 1, 0);
  for (std::size_t b = 0; b < B; ++b) {
    const auto L = layout.lengths[b];
    require(L >= 1 && L <= S, "attention: row length outside [1, seq]");
    for (std::size_t h = 0; h < H; ++h) offsets[b * H + h + 1] = offsets[b * H + h] + L * L;
  }

  const bool track = tracking(tape, {&qkv});
  Tensor<T> out(Shape{B * S, d}, track);
  std::vector<T> probs(offsets.back());

  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t L = layout.lengths[b];
    const T* base = qkv.data() + b * S * row_stride;
    for (std::size_t h = 0; h < H; ++h) {
      ConstStridedMap<T> q(base + h * hs, L, hs, Eigen::OuterStride<>(row_stride));
      ConstStridedMap<T> k(base + d + h * hs, L, hs, Eigen::OuterStride<>(row_stride));
      ConstStridedMap<T> v(base + 2 * d + h * hs, L, hs, Eigen::OuterStride<>(row_stride));
      MapMat<T> p(probs.data() + offsets[b * H + h], L, L);
      p.noalias() = (q * k.transpose()) * scl;
      for (std::size_t i = 0; i < L; ++i) {
        const std::size_t last = layout.causal ? i : L - 1;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j <= last; ++j) mx = std::max(mx, p(i, j));
        T z = 0;
        for (std::size_t j = 0; j <= last; ++j) {
          p(i, j) = std::exp(p(i, j) - mx);
          z += p(i, j);
        }
        for (std::size_t j = 0; j <= last; ++j) p(i, j) /= z;
        for (std::size_t j = last + 1; j < L; ++j) p(i, j) = T(0);
      }
      StridedMap<T> o(out.data() + b * S * d + h * hs, L, hs, Eigen::OuterStride<>(d));
      o.noalias() = p * v;
    }
  }

  if (track) {
    tape->record([qkv, out, layout, probs = std::move(probs), offsets = std::move(offsets), d, hs, scl,
                  row_stride]() mutable {
      const std::size_t S = layout.seq, H = layout.heads;
      RowMat<T> dp, ds;
      for (std::size_t b = 0; b < layout.batch; ++b) {
        const std::size_t L = layout.lengths[b];
        const T* base = qkv.data() + b * S * row_stride;
        T* gbase = qkv.grad().data() + b * S * row_stride;
        for (std::size_t h = 0; h < H; ++h) {
          ConstStridedMap<T> q(base + h * hs, L, hs, Eigen::OuterStride<>(row_stride));
          ConstStridedMap<T> k(base + d + h * hs, L, hs, Eigen::OuterStride<>(row_stride));
          ConstStridedMap<T> v(base + 2 * d + h * hs, L, hs, Eigen::OuterStride<>(row_stride));
          StridedMap<T> gq(gbase + h * hs, L, hs, Eigen::OuterStride<>(row_stride));
          StridedMap<T> gk(gbase + d + h * hs, L, hs, Eigen::OuterStride<>(row_stride));
          StridedMap<T> gv(gbase + 2 * d + h * hs, L, hs, Eigen::OuterStride<>(row_stride));
          ConstMapMat<T> p(probs.data() + offsets[b * H + h], L, L);
          ConstStridedMap<T> go(std::as_const(out).grad().data() + b * S * d + h * hs, L, hs,
                                Eigen::OuterStride<>(d));
          dp.noalias() = go * v.transpose();
          gv.noalias() += p.transpose() * go;
          ds.resize(L, L);
          for (std::size_t i = 0; i < L; ++i) {
            T dot = 0;
            for (std::size_t j = 0; j < L; ++j) dot += dp(i, j) * p(i, j);
            for (std::size_t j = 0; j < L; ++j) ds(i, j) = p(i, j) * (dp(i, j) - dot) * scl;
          }
          gq.noalias() += ds * k;
          gk.noalias() += ds.transpose() * q;
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const std::int32_t> targets,
                        std::span<const std::uint8_t> ignore, GradTape<T>* tape) {
  const std::size_t V = logits.shape().back();
  const std::size_t n = logits.numel() / V;
  require(targets.size() == n, "cross_entropy: one target per position required");
  require(ignore.empty() || ignore.size() == n, "cross_entropy: ignore mask extent mismatch");
  auto lv = logits.values();
  std::vector<T> lse(n, T(0));
  std::size_t count = 0;
  double total = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (!ignore.empty() && ignore[r]) continue;
    const auto t = targets[r];
    if (t < 0 || static_cast<std::size_t>(t) >= V) {
      throw InputError("cross_entropy: target " + std::to_string(t) + " outside [0, " + std::to_string(V) + ")");
    }
    const T* row = lv.data() + r * V;
    T mx = *std::max_element(row, row + V);
    T z = 0;
    for (std::size_t j = 0; j < V; ++j) z += std::exp(row[j] - mx);
    lse[r] = mx + std::log(z);
    total += static_cast<double>(lse[r] - row[t]);
    ++count;
  }
  if (count == 0) throw UsageError("cross_entropy: every position is ignored; loss undefined");
  const bool track = tracking(tape, {&logits});
  Tensor<T> out(Shape{1}, track);
  out.values()[0] = static_cast<T>(total / static_cast<double>(count));
  if (track) {
    tape->record([logits, out, lse = std::move(lse), targets = std::vector<std::int32_t>(targets.begin(), targets.end()),
                  ignore = std::vector<std::uint8_t>(ignore.begin(), ignore.end()), n, V, count]() mutable {
      const T g = std::as_const(out).grad()[0] / static_cast<T>(count);
      auto lv = std::as_const(logits).values();
      auto gl = logits.grad();
      for (std::size_t r = 0; r < n; ++r) {
        if (!ignore.empty() && ignore[r]) continue;
        const T* row = lv.data() + r * V;
        T* grow = gl.data() + r * V;
        for (std::size_t j = 0; j < V; ++j) grow[j] += g * std::exp(row[j] - lse[r]);
        grow[targets[r]] -= g;
      }
    });
  }
  return out;
}

#define MEMLAB_INSTANTIATE_OPS(T)                                                                   \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&, GradTape<T>*);                        \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&, GradTape<T>*);                        \
  template Tensor<T> scale(const Tensor<T>&, T, GradTape<T>*);                                     \
  template Tensor<T> sum(const Tensor<T>&, GradTape<T>*);                                          \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&, GradTape<T>*);                     \
  template Tensor<T> matmul_nt(const Tensor<T>&, const Tensor<T>&, GradTape<T>*);                  \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, GradTape<T>*);   \
  template Tensor<T> gelu(const Tensor<T>&, GradTape<T>*);                                         \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t, GradTape<T>*);                         \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T, GradTape<T>*); \
  template Tensor<T> embedding(const Tensor<T>&, std::span<const std::int32_t>, GradTape<T>*);     \
  template Tensor<T> attention(const Tensor<T>&, const AttentionLayout&, GradTape<T>*);            \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const std::int32_t>,                \
                                   std::span<const std::uint8_t>, GradTape<T>*);

MEMLAB_INSTANTIATE_OPS(float)
MEMLAB_INSTANTIATE_OPS(double)

#undef MEMLAB_INSTANTIATE_OPS

}  // namespace memlab::ops
