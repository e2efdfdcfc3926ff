// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/nn/ops.h"

#include <cblas.h>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "../fft.h"
#include "pulsevoc/error.h"
#include "pulsevoc/signal.h"

namespace pulsevoc::nn {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw_invalid(fmt::format("{}: shape mismatch {} vs {}", op, shape_str(a.shape()),
                              shape_str(b.shape())));
  }
}

void require_rank(const Var& x, std::size_t rank, const char* op) {
  if (x.value().ndim() != rank) {
    throw_invalid(fmt::format("{}: expected rank {}, got {}", op, rank, shape_str(x.shape())));
  }
}

Tensor* grad_of(Node& self, std::size_t i) {
  Node* in = self.inputs[i].get();
  return in && in->requires_grad ? &in->grad_buffer() : nullptr;
}

// Output index range [t0, t1) with 0 <= t*stride + offset < len.
std::pair<long long, long long> valid_range(long long offset, long long stride, long long len,
                                            long long out_len) {
  long long t0 = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  long long t1 = len - 1 - offset < 0 ? 0 : (len - 1 - offset) / stride + 1;
  return {std::min(t0, out_len), std::min(t1, out_len)};
}

// Row-major C[m x n] = op(A) op(B) + beta C with op(A) [m x k], op(B) [k x n].
void gemm(bool trans_a, bool trans_b, long long m, long long n, long long k, const double* a, const double* b,
          double beta, double* c) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
              static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), 1.0, a,
              static_cast<int>(trans_a ? m : k), b, static_cast<int>(trans_b ? k : n), beta, c, static_cast<int>(n));
}

// C[m x n] += A[m x k] B[n x k]^T.
void gemm_nt(long long m, long long n, long long k, const double* a, const double* b, double* c) {
  gemm(false, true, m, n, k, a, b, 1.0, c);
}

void fill_bias(double* out, const Var& bias, long long channels, long long cols) {
  if (!bias.defined()) return;
  for (long long c = 0; c < channels; ++c) std::fill_n(out + c * cols, cols, bias.value()[c]);
}

void accumulate_bias(const double* gout, long long channels, long long cols, double* gb) {
  for (long long c = 0; c < channels; ++c) {
    double s = 0.0;
    for (long long i = 0; i < cols; ++i) s += gout[c * cols + i];
    gb[c] += s;
  }
}

// Uninitialized buffer; every element is written before it is read.
using Scratch = std::unique_ptr<double[]>;
inline Scratch scratch(long long n) { return Scratch(new double[static_cast<std::size_t>(n)]); }

struct Patch1d {
  long long cin, len, k, stride, dilation, pad_left, out_len;
};

// col[(ci * k + kk) * out_len + t] = x[ci, t * stride + kk * dilation - pad_left], 0 outside.
void im2col1d(const double* x, const Patch1d& g, double* col) {
  for (long long ci = 0; ci < g.cin; ++ci) {
    for (long long kk = 0; kk < g.k; ++kk) {
      double* dst = col + (ci * g.k + kk) * g.out_len;
      const long long off = kk * g.dilation - g.pad_left;
      const auto [t0, t1] = valid_range(off, g.stride, g.len, g.out_len);
      std::fill(dst, dst + t0, 0.0);
      const double* src = x + ci * g.len + off;
      for (long long t = t0; t < t1; ++t) dst[t] = src[t * g.stride];
      std::fill(dst + t1, dst + g.out_len, 0.0);
    }
  }
}

void col2im1d(const double* col, const Patch1d& g, double* gx) {
  for (long long ci = 0; ci < g.cin; ++ci) {
    for (long long kk = 0; kk < g.k; ++kk) {
      const double* src = col + (ci * g.k + kk) * g.out_len;
      const long long off = kk * g.dilation - g.pad_left;
      const auto [t0, t1] = valid_range(off, g.stride, g.len, g.out_len);
      double* dst = gx + ci * g.len + off;
      for (long long t = t0; t < t1; ++t) dst[t * g.stride] += src[t];
    }
  }
}

struct Patch2d {
  long long cin, h, w, kh, kw;
  Conv2dOptions o;
  long long oh, ow;
};

// col[((ci * kh + a) * kw + c) * (oh * ow) + r * ow + q] =
//   x[ci, r * stride_h + a - pad_h, q * stride_w + c - pad_w], 0 outside.
void im2col2d(const double* x, const Patch2d& g, double* col) {
  const long long plane = g.oh * g.ow;
  for (long long ci = 0; ci < g.cin; ++ci) {
    for (long long a = 0; a < g.kh; ++a) {
      const long long roff = a - g.o.pad_h;
      const auto [r0, r1] = valid_range(roff, g.o.stride_h, g.h, g.oh);
      for (long long c = 0; c < g.kw; ++c) {
        double* dst = col + ((ci * g.kh + a) * g.kw + c) * plane;
        const long long coff = c - g.o.pad_w;
        const auto [q0, q1] = valid_range(coff, g.o.stride_w, g.w, g.ow);
        std::fill(dst, dst + r0 * g.ow, 0.0);
        std::fill(dst + r1 * g.ow, dst + plane, 0.0);
        for (long long r = r0; r < r1; ++r) {
          const double* src = x + (ci * g.h + r * g.o.stride_h + roff) * g.w + coff;
          double* drow = dst + r * g.ow;
          std::fill(drow, drow + q0, 0.0);
          for (long long q = q0; q < q1; ++q) drow[q] = src[q * g.o.stride_w];
          std::fill(drow + q1, drow + g.ow, 0.0);
        }
      }
    }
  }
}

void col2im2d(const double* col, const Patch2d& g, double* gx) {
  const long long plane = g.oh * g.ow;
  for (long long ci = 0; ci < g.cin; ++ci) {
    for (long long a = 0; a < g.kh; ++a) {
      const long long roff = a - g.o.pad_h;
      const auto [r0, r1] = valid_range(roff, g.o.stride_h, g.h, g.oh);
      for (long long c = 0; c < g.kw; ++c) {
        const double* src = col + ((ci * g.kh + a) * g.kw + c) * plane;
        const long long coff = c - g.o.pad_w;
        const auto [q0, q1] = valid_range(coff, g.o.stride_w, g.w, g.ow);
        for (long long r = r0; r < r1; ++r) {
          double* dst = gx + (ci * g.h + r * g.o.stride_h + roff) * g.w + coff;
          const double* srow = src + r * g.ow;
          for (long long q = q0; q < q1; ++q) dst[q * g.o.stride_w] += srow[q];
        }
      }
    }
  }
}

}  // namespace

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (Tensor* g = grad_of(self, k)) {
        for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += self.grad[i];
    }
    if (Tensor* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] -= self.grad[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= s;
  return make_result(std::move(out), {a}, [s](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += s * self.grad[i];
    }
  });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var leaky_relu(const Var& x, double slope) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : slope * v;
  if (BranchRecorder* r = active_branch_recorder()) {
    for (double v : x.value().values()) r->mix(v > 0.0);
  }
  return make_result(std::move(out), {x}, [slope](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      const Tensor& in = self.inputs[0]->value;
      for (std::size_t i = 0; i < g->numel(); ++i) {
        (*g)[i] += (in[i] > 0.0 ? 1.0 : slope) * self.grad[i];
      }
    }
  });
}

Var tanh(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = std::tanh(v);
  return make_result(std::move(out), {x}, [](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->numel(); ++i) {
        const double y = self.value[i];
        (*g)[i] += (1.0 - y * y) * self.grad[i];
      }
    }
  });
}

Var log_floor(const Var& x, double floor) {
  Tensor out = x.value();
  for (double& v : out.values()) v = std::log(std::max(v, floor));
  if (BranchRecorder* r = active_branch_recorder()) {
    for (double v : x.value().values()) r->mix(v > floor);
  }
  return make_result(std::move(out), {x}, [floor](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      const Tensor& in = self.inputs[0]->value;
      for (std::size_t i = 0; i < g->numel(); ++i) {
        if (in[i] > floor) (*g)[i] += self.grad[i] / in[i];
      }
    }
  });
}

Var mean_of(const std::vector<Var>& xs) {
  if (xs.empty()) throw_invalid("mean_of: empty list");
  Tensor out(xs[0].shape(), 0.0);
  for (const Var& x : xs) {
    require_same_shape(xs[0], x, "mean_of");
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += x.value()[i];
  }
  const double w = 1.0 / xs.size();
  for (double& v : out.values()) v *= w;
  return make_result(std::move(out), xs, [w](Node& self) {
    for (std::size_t k = 0; k < self.inputs.size(); ++k) {
      if (Tensor* g = grad_of(self, k)) {
        for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += w * self.grad[i];
      }
    }
  });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_result(std::move(out), {x}, [](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

Var narrow_last(const Var& x, std::size_t start, std::size_t len) {
  require_rank(x, 3, "narrow_last");
  const std::size_t rows = x.dim(0) * x.dim(1), full = x.dim(2);
  if (start + len > full) {
    throw_invalid(fmt::format("narrow_last: [{}, {}) exceeds length {}", start, start + len, full));
  }
  Tensor out({x.dim(0), x.dim(1), len});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(x.value().data() + r * full + start, len, out.data() + r * len);
  }
  return make_result(std::move(out), {x}, [rows, full, start, len](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < len; ++i) (*g)[r * full + start + i] += self.grad[r * len + i];
      }
    }
  });
}

Var concat_channels(const Var& a, const Var& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sa.size() != sb.size() || sa[0] != sb[0] ||
      !std::equal(sa.begin() + 2, sa.end(), sb.begin() + 2)) {
    throw_invalid(fmt::format("concat_channels: incompatible {} and {}", shape_str(sa), shape_str(sb)));
  }
  const std::size_t batch = sa[0];
  const std::size_t inner = numel(sa) / (sa[0] * sa[1]);
  const std::size_t ca = sa[1] * inner;
  const std::size_t cb = sb[1] * inner;
  Shape so = sa;
  so[1] = sa[1] + sb[1];
  Tensor out(so);
  for (std::size_t n = 0; n < batch; ++n) {
    std::copy_n(a.value().data() + n * ca, ca, out.data() + n * (ca + cb));
    std::copy_n(b.value().data() + n * cb, cb, out.data() + n * (ca + cb) + ca);
  }
  return make_result(std::move(out), {a, b}, [batch, ca, cb](Node& self) {
    Tensor* ga = grad_of(self, 0);
    Tensor* gb = grad_of(self, 1);
    for (std::size_t n = 0; n < batch; ++n) {
      const double* src = self.grad.data() + n * (ca + cb);
      if (ga) for (std::size_t i = 0; i < ca; ++i) (*ga)[n * ca + i] += src[i];
      if (gb) for (std::size_t i = 0; i < cb; ++i) (*gb)[n * cb + i] += src[ca + i];
    }
  });
}

Var conv1d(const Var& x, const Var& weight, const Var& bias, const Conv1dOptions& o) {
  require_rank(x, 3, "conv1d input");
  require_rank(weight, 3, "conv1d weight");
  const long long batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const long long cout = weight.dim(0), k = weight.dim(2);
  if (static_cast<long long>(weight.dim(1)) != cin) {
    throw_invalid(fmt::format("conv1d: input {} vs weight {}", shape_str(x.shape()), shape_str(weight.shape())));
  }
  if (o.stride < 1 || o.dilation < 1 || o.pad_left < 0 || o.pad_right < 0) {
    throw_invalid(fmt::format("conv1d: invalid stride {}, dilation {} or padding ({}, {})", o.stride, o.dilation,
                              o.pad_left, o.pad_right));
  }
  const long long span = static_cast<long long>(o.dilation) * (k - 1) + 1;
  const long long padded = len + o.pad_left + o.pad_right;
  if (padded < span) throw_invalid(fmt::format("conv1d: input length {} shorter than kernel span {}", padded, span));
  const Patch1d g{cin, len, k, o.stride, o.dilation, o.pad_left, (padded - span) / o.stride + 1};
  const long long rows = cin * k, cols = g.out_len;
  Tensor out({static_cast<std::size_t>(batch), static_cast<std::size_t>(cout), static_cast<std::size_t>(cols)});
  Scratch col = scratch(rows * cols);
  for (long long b = 0; b < batch; ++b) {
    double* ob = out.data() + b * cout * cols;
    fill_bias(ob, bias, cout, cols);
    im2col1d(x.value().data() + b * cin * len, g, col.get());
    gemm(false, false, cout, cols, rows, weight.value().data(), col.get(), bias.defined() ? 1.0 : 0.0, ob);
  }
  return make_result(std::move(out), {x, weight, bias}, [=](Node& self) {
    Tensor* gx = grad_of(self, 0);
    Tensor* gw = grad_of(self, 1);
    Tensor* gb = bias.defined() ? grad_of(self, 2) : nullptr;
    Scratch buf = scratch(rows * cols);
    for (long long b = 0; b < batch; ++b) {
      const double* gout = self.grad.data() + b * cout * cols;
      if (gb) accumulate_bias(gout, cout, cols, gb->data());
      if (gw) {
        im2col1d(self.inputs[0]->value.data() + b * cin * len, g, buf.get());
        gemm_nt(cout, rows, cols, gout, buf.get(), gw->data());
      }
      if (gx) {
        gemm(true, false, rows, cols, cout, self.inputs[1]->value.data(), gout, 0.0, buf.get());
        col2im1d(buf.get(), g, gx->data() + b * cin * len);
      }
    }
  });
}

Var conv_transpose1d(const Var& x, const Var& weight, const Var& bias, int stride, int crop,
                     std::size_t out_len_u) {
  require_rank(x, 3, "conv_transpose1d input");
  require_rank(weight, 3, "conv_transpose1d weight");
  const long long batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const long long cout = weight.dim(1), k = weight.dim(2);
  const long long out_len = static_cast<long long>(out_len_u);
  if (static_cast<long long>(weight.dim(0)) != cin) {
    throw_invalid(fmt::format("conv_transpose1d: input {} vs weight {}", shape_str(x.shape()),
                              shape_str(weight.shape())));
  }
  Tensor out({static_cast<std::size_t>(batch), static_cast<std::size_t>(cout), out_len_u});
  const double* xd = x.value().data();
  const double* wd = weight.value().data();
  // Output j = t * stride + kk - crop.
  for (long long b = 0; b < batch; ++b) {
    for (long long co = 0; co < cout; ++co) {
      double* orow = out.data() + (b * cout + co) * out_len;
      if (bias.defined()) std::fill_n(orow, out_len, bias.value()[co]);
      for (long long ci = 0; ci < cin; ++ci) {
        const double* xrow = xd + (b * cin + ci) * len;
        for (long long kk = 0; kk < k; ++kk) {
          const double w = wd[(ci * cout + co) * k + kk];
          for (long long t = 0; t < len; ++t) {
            const long long j = t * stride + kk - crop;
            if (j >= 0 && j < out_len) orow[j] += w * xrow[t];
          }
        }
      }
    }
  }
  return make_result(std::move(out), {x, weight, bias}, [=](Node& self) {
    Tensor* gx = grad_of(self, 0);
    Tensor* gw = grad_of(self, 1);
    Tensor* gb = bias.defined() ? grad_of(self, 2) : nullptr;
    const double* xv = self.inputs[0]->value.data();
    const double* wv = self.inputs[1]->value.data();
    for (long long b = 0; b < batch; ++b) {
      for (long long co = 0; co < cout; ++co) {
        const double* grow = self.grad.data() + (b * cout + co) * out_len;
        if (gb) {
          double s = 0.0;
          for (long long j = 0; j < out_len; ++j) s += grow[j];
          (*gb)[co] += s;
        }
        for (long long ci = 0; ci < cin; ++ci) {
          const double* xrow = xv + (b * cin + ci) * len;
          double* gxrow = gx ? gx->data() + (b * cin + ci) * len : nullptr;
          for (long long kk = 0; kk < k; ++kk) {
            const long long widx = (ci * cout + co) * k + kk;
            const double w = wv[widx];
            double acc = 0.0;
            for (long long t = 0; t < len; ++t) {
              const long long j = t * stride + kk - crop;
              if (j < 0 || j >= out_len) continue;
              acc += grow[j] * xrow[t];
              if (gxrow) gxrow[t] += w * grow[j];
            }
            if (gw) (*gw)[widx] += acc;
          }
        }
      }
    }
  });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, const Conv2dOptions& o) {
  require_rank(x, 4, "conv2d input");
  require_rank(weight, 4, "conv2d weight");
  const long long batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const long long cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  if (static_cast<long long>(weight.dim(1)) != cin) {
    throw_invalid(fmt::format("conv2d: input {} vs weight {}", shape_str(x.shape()), shape_str(weight.shape())));
  }
  if (o.stride_h < 1 || o.stride_w < 1 || o.pad_h < 0 || o.pad_w < 0) {
    throw_invalid(fmt::format("conv2d: invalid strides ({}, {}) or padding ({}, {})", o.stride_h, o.stride_w,
                              o.pad_h, o.pad_w));
  }
  if (h + 2 * o.pad_h < kh || w + 2 * o.pad_w < kw) {
    throw_invalid(fmt::format("conv2d: input {} smaller than kernel {}", shape_str(x.shape()),
                              shape_str(weight.shape())));
  }
  const Patch2d g{cin, h, w, kh, kw, o, (h + 2 * o.pad_h - kh) / o.stride_h + 1, (w + 2 * o.pad_w - kw) / o.stride_w + 1};
  const long long rows = cin * kh * kw, cols = g.oh * g.ow;
  Tensor out({static_cast<std::size_t>(batch), static_cast<std::size_t>(cout), static_cast<std::size_t>(g.oh),
              static_cast<std::size_t>(g.ow)});
  Scratch col = scratch(rows * cols);
  for (long long b = 0; b < batch; ++b) {
    double* ob = out.data() + b * cout * cols;
    fill_bias(ob, bias, cout, cols);
    im2col2d(x.value().data() + b * cin * h * w, g, col.get());
    gemm(false, false, cout, cols, rows, weight.value().data(), col.get(), bias.defined() ? 1.0 : 0.0, ob);
  }
  return make_result(std::move(out), {x, weight, bias}, [=](Node& self) {
    Tensor* gx = grad_of(self, 0);
    Tensor* gw = grad_of(self, 1);
    Tensor* gb = bias.defined() ? grad_of(self, 2) : nullptr;
    Scratch buf = scratch(rows * cols);
    for (long long b = 0; b < batch; ++b) {
      const double* gout = self.grad.data() + b * cout * cols;
      if (gb) accumulate_bias(gout, cout, cols, gb->data());
      if (gw) {
        im2col2d(self.inputs[0]->value.data() + b * cin * h * w, g, buf.get());
        gemm_nt(cout, rows, cols, gout, buf.get(), gw->data());
      }
      if (gx) {
        gemm(true, false, rows, cols, cout, self.inputs[1]->value.data(), gout, 0.0, buf.get());
        col2im2d(buf.get(), g, gx->data() + b * cin * h * w);
      }
    }
  });
}

Var weight_norm(const Var& v, const Var& g) {
  const std::size_t rows = v.dim(0);
  if (g.value().numel() != rows) {
    throw_invalid(fmt::format("weight_norm: g has {} entries for {} rows", g.value().numel(), rows));
  }
  const std::size_t cols = v.value().numel() / rows;
  std::vector<double> norms(rows);
  Tensor out = v.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sq += v.value()[r * cols + c] * v.value()[r * cols + c];
    norms[r] = std::sqrt(sq);
    if (norms[r] == 0.0) throw_numerical("weight_norm: zero-norm direction");
    const double f = g.value()[r] / norms[r];
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] *= f;
  }
  return make_result(std::move(out), {v, g}, [rows, cols, norms](Node& self) {
    Tensor* gv = grad_of(self, 0);
    Tensor* gg = grad_of(self, 1);
    const Tensor& vv = self.inputs[0]->value;
    const Tensor& gval = self.inputs[1]->value;
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += self.grad[r * cols + c] * vv[r * cols + c];
      const double n = norms[r];
      if (gg) (*gg)[r] += dot / n;
      if (gv) {
        const double a = gval[r] / n;
        const double b = gval[r] * dot / (n * n * n);
        for (std::size_t c = 0; c < cols; ++c) {
          (*gv)[r * cols + c] += a * self.grad[r * cols + c] - b * vv[r * cols + c];
        }
      }
    }
  });
}

Var period_fold(const Var& x, int period) {
  require_rank(x, 3, "period_fold");
  if (x.dim(1) != 1) throw_invalid("period_fold: expects a single channel");
  if (period < 1) throw_invalid(fmt::format("period_fold: period must be >= 1, got {}", period));
  const std::size_t batch = x.dim(0), len = x.dim(2);
  const std::size_t pad = (period - len % period) % period;
  const std::size_t rows = (len + pad) / period;
  Tensor out({batch, 1, rows, static_cast<std::size_t>(period)});
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = x.value().data() + b * len;
    double* dst = out.data() + b * (len + pad);
    for (std::size_t i = 0; i < len + pad; ++i) dst[i] = src[reflect_index(static_cast<long long>(i), len)];
  }
  return make_result(std::move(out), {x}, [batch, len, pad](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t b = 0; b < batch; ++b) {
        const double* src = self.grad.data() + b * (len + pad);
        for (std::size_t i = 0; i < len + pad; ++i) {
          (*g)[b * len + reflect_index(static_cast<long long>(i), len)] += src[i];
        }
      }
    }
  });
}

Var stft_magnitude(const Var& x, int fft_size, int hop_size, int win_size) {
  require_rank(x, 3, "stft_magnitude");
  if (x.dim(1) != 1) throw_invalid("stft_magnitude: expects a single channel");
  MelParamSet geometry;
  geometry.fft_size = fft_size;
  geometry.hop_size = hop_size;
  geometry.win_size = win_size;
  geometry.validate_stft();
  const std::size_t batch = x.dim(0), len = x.dim(2);
  if (len == 0) throw_invalid("stft_magnitude: empty input");
  auto kernel = std::make_shared<detail::StftKernel>(fft_size, hop_size, win_size);
  const std::size_t frames = kernel->n_frames(len);
  const std::size_t bins = kernel->n_bins();
  auto spectra = std::make_shared<std::vector<std::vector<detail::Complex>>>(batch);
  Tensor out({batch, 1, frames, bins});
  for (std::size_t b = 0; b < batch; ++b) {
    (*spectra)[b] = kernel->forward(std::span<const double>(x.value().data() + b * len, len));
    const auto& s = (*spectra)[b];
    for (std::size_t i = 0; i < frames * bins; ++i) out[b * frames * bins + i] = std::abs(s[i]);
  }
  return make_result(std::move(out), {x}, [kernel, spectra, batch, len, frames, bins](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t b = 0; b < batch; ++b) {
        kernel->backward_magnitude(
            std::span<const double>(self.grad.data() + b * frames * bins, frames * bins), (*spectra)[b],
            std::span<double>(g->data() + b * len, len));
      }
    }
  });
}

Var mel_project(const Var& magnitudes, const Matrix& filterbank) {
  require_rank(magnitudes, 4, "mel_project");
  const std::size_t batch = magnitudes.dim(0), frames = magnitudes.dim(2), bins = magnitudes.dim(3);
  const std::size_t mels = filterbank.rows();
  if (filterbank.cols() != bins || magnitudes.dim(1) != 1) {
    throw_invalid(fmt::format("mel_project: filterbank {}x{} vs magnitudes {}", mels, filterbank.cols(),
                              shape_str(magnitudes.shape())));
  }
  // Nonzero support per filter row.
  auto support = std::make_shared<std::vector<std::pair<std::size_t, std::size_t>>>(mels);
  for (std::size_t m = 0; m < mels; ++m) {
    std::size_t lo = bins, hi = 0;
    for (std::size_t k = 0; k < bins; ++k) {
      if (filterbank(m, k) != 0.0) {
        lo = std::min(lo, k);
        hi = k + 1;
      }
    }
    (*support)[m] = {std::min(lo, hi), hi};
  }
  auto fb = std::make_shared<Matrix>(filterbank);
  Tensor out({batch, mels, frames});
  const double* md = magnitudes.value().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t m = 0; m < mels; ++m) {
      const auto [lo, hi] = (*support)[m];
      for (std::size_t t = 0; t < frames; ++t) {
        const double* col = md + (b * frames + t) * bins;
        double acc = 0.0;
        for (std::size_t k = lo; k < hi; ++k) acc += (*fb)(m, k) * col[k];
        out[(b * mels + m) * frames + t] = acc;
      }
    }
  }
  return make_result(std::move(out), {magnitudes}, [fb, support, batch, mels, frames, bins](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t m = 0; m < mels; ++m) {
          const auto [lo, hi] = (*support)[m];
          for (std::size_t t = 0; t < frames; ++t) {
            const double go = self.grad[(b * mels + m) * frames + t];
            if (go == 0.0) continue;
            double* col = g->data() + (b * frames + t) * bins;
            for (std::size_t k = lo; k < hi; ++k) col[k] += (*fb)(m, k) * go;
          }
        }
      }
    }
  });
}

Var max_pool_frames(const Var& x, int win_size, int hop_size) {
  require_rank(x, 3, "max_pool_frames");
  if (win_size <= 0 || hop_size <= 0) {
    throw_invalid(fmt::format("max_pool_frames: win {} and hop {} must be positive", win_size, hop_size));
  }
  const std::size_t rows = x.dim(0) * x.dim(1), len = x.dim(2);
  if (len == 0) throw_invalid("max_pool_frames: empty input");
  const std::size_t frames = (len + hop_size - 1) / hop_size;
  Tensor out({x.dim(0), x.dim(1), frames});
  auto argmax = std::make_shared<std::vector<std::size_t>>(rows * frames);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = x.value().data() + r * len;
    for (std::size_t t = 0; t < frames; ++t) {
      const std::size_t a = t * hop_size;
      const std::size_t b = std::min(len, a + win_size);
      const std::size_t best = static_cast<std::size_t>(std::max_element(src + a, src + b) - src);
      (*argmax)[r * frames + t] = r * len + best;
      if (BranchRecorder* rec = active_branch_recorder()) rec->mix(best);
      out[r * frames + t] = src[best];
    }
  }
  return make_result(std::move(out), {x}, [argmax](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < argmax->size(); ++i) (*g)[(*argmax)[i]] += self.grad[i];
    }
  });
}

Var mse(const Var& a, const Var& b) {
  require_same_shape(a, b, "mse");
  const std::size_t n = a.value().numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.value()[i] - b.value()[i];
    acc += d * d;
  }
  return make_result(Tensor::scalar(acc / n), {a, b}, [n](Node& self) {
    const Tensor& av = self.inputs[0]->value;
    const Tensor& bv = self.inputs[1]->value;
    const double s = 2.0 * self.grad[0] / n;
    Tensor* ga = grad_of(self, 0);
    Tensor* gb = grad_of(self, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = s * (av[i] - bv[i]);
      if (ga) (*ga)[i] += d;
      if (gb) (*gb)[i] -= d;
    }
  });
}

Var mae(const Var& a, const Var& b) {
  require_same_shape(a, b, "mae");
  const std::size_t n = a.value().numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(a.value()[i] - b.value()[i]);
  if (BranchRecorder* r = active_branch_recorder()) {
    for (std::size_t i = 0; i < n; ++i) r->mix(a.value()[i] > b.value()[i] ? 2 : a.value()[i] < b.value()[i]);
  }
  return make_result(Tensor::scalar(acc / n), {a, b}, [n](Node& self) {
    const Tensor& av = self.inputs[0]->value;
    const Tensor& bv = self.inputs[1]->value;
    const double s = self.grad[0] / n;
    Tensor* ga = grad_of(self, 0);
    Tensor* gb = grad_of(self, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = av[i] - bv[i];
      const double d = diff > 0.0 ? s : diff < 0.0 ? -s : 0.0;
      if (ga) (*ga)[i] += d;
      if (gb) (*gb)[i] -= d;
    }
  });
}

Var softplus_mean(const Var& x, double sign) {
  const std::size_t n = x.value().numel();
  if (n == 0) throw_invalid("softplus_mean: empty input");
  double acc = 0.0;
  for (double v : x.value().values()) acc += softplus(sign * v);
  return make_result(Tensor::scalar(acc / n), {x}, [n, sign](Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      const Tensor& xv = self.inputs[0]->value;
      const double s = self.grad[0] / n;
      for (std::size_t i = 0; i < n; ++i) {
        const double z = sign * xv[i];
        const double sig = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        (*g)[i] += s * sign * sig;
      }
    }
  });
}

}  // namespace pulsevoc::nn
