#include "rumor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "rumor/errors.hpp"

namespace rumor {
namespace {

bool tracks(const Tape& tape, std::initializer_list<const Tensor*> inputs) {
  if (!tape.recording()) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->requires_grad(); });
}

void expect_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_to_string(t.shape()));
  }
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_to_string(a.shape()) + " and " +
                       shape_to_string(b.shape()));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  expect_rank(a, 2, "matmul");
  expect_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) mismatch("matmul", a, b);
  Tensor out({m, n});
  auto A = a.data(), B = b.data();
  auto O = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      const double av = A[i * k + l];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) O[i * n + j] += av * B[l * n + j];
    }
  }
  if (tracks(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape.record([a, b, out, m, k, n]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      auto A = a.data(), B = b.data();
      if (a.requires_grad()) {
        auto GA = a.grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < k; ++l) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += G[i * n + j] * B[l * n + j];
            GA[i * k + l] += s;
          }
      }
      if (b.requires_grad()) {
        auto GB = b.grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < k; ++l) {
            const double av = A[i * k + l];
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) GB[l * n + j] += av * G[i * n + j];
          }
      }
    });
  }
  return out;
}

Tensor matvec(Tape& tape, const Tensor& a, const Tensor& v) {
  expect_rank(a, 2, "matvec");
  expect_rank(v, 1, "matvec");
  const std::size_t m = a.dim(0), k = a.dim(1);
  if (v.dim(0) != k) mismatch("matvec", a, v);
  Tensor out({m});
  auto A = a.data(), V = v.data();
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < k; ++l) s += A[i * k + l] * V[l];
    out[i] = s;
  }
  if (tracks(tape, {&a, &v})) {
    out.set_requires_grad(true);
    tape.record([a, v, out, m, k]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      auto A = a.data(), V = v.data();
      if (a.requires_grad()) {
        auto GA = a.grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < k; ++l) GA[i * k + l] += G[i] * V[l];
      }
      if (v.requires_grad()) {
        auto GV = v.grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t l = 0; l < k; ++l) GV[l] += A[i * k + l] * G[i];
      }
    });
  }
  return out;
}

Tensor vecmat(Tape& tape, const Tensor& v, const Tensor& a) {
  expect_rank(v, 1, "vecmat");
  expect_rank(a, 2, "vecmat");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (v.dim(0) != m) mismatch("vecmat", v, a);
  Tensor out({n});
  auto A = a.data(), V = v.data();
  auto O = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    if (V[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) O[j] += V[i] * A[i * n + j];
  }
  if (tracks(tape, {&v, &a})) {
    out.set_requires_grad(true);
    tape.record([v, a, out, m, n]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      auto A = a.data(), V = v.data();
      if (v.requires_grad()) {
        auto GV = v.grad();
        for (std::size_t i = 0; i < m; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += A[i * n + j] * G[j];
          GV[i] += s;
        }
      }
      if (a.requires_grad()) {
        auto GA = a.grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) GA[i * n + j] += V[i] * G[j];
      }
    });
  }
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("add", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  if (tracks(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape.record([a, b, out]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      for (const Tensor* t : {&a, &b}) {
        if (!t->requires_grad()) continue;
        auto GT = t->grad();
        for (std::size_t i = 0; i < G.size(); ++i) GT[i] += G[i];
      }
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("mul", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  if (tracks(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape.record([a, b, out]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      // Both sides may alias (x * x); read values before accumulating.
      if (a.requires_grad()) {
        auto GA = a.grad();
        for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * b[i];
      }
      if (b.requires_grad()) {
        auto GB = b.grad();
        for (std::size_t i = 0; i < G.size(); ++i) GB[i] += G[i] * a[i];
      }
    });
  }
  return out;
}

Tensor add_row_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  expect_rank(x, 2, "add_row_bias");
  expect_rank(bias, 1, "add_row_bias");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (bias.dim(0) != n) mismatch("add_row_bias", x, bias);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = x[i * n + j] + bias[j];
  if (tracks(tape, {&x, &bias})) {
    out.set_requires_grad(true);
    tape.record([x, bias, out, m, n]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      if (x.requires_grad()) {
        auto GX = x.grad();
        for (std::size_t i = 0; i < G.size(); ++i) GX[i] += G[i];
      }
      if (bias.requires_grad()) {
        auto GB = bias.grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) GB[j] += G[i * n + j];
      }
    });
  }
  return out;
}

Tensor activation(Tape& tape, const Tensor& x, Activation kind) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (kind) {
      case Activation::kTanh: out[i] = std::tanh(x[i]); break;
      case Activation::kSigmoid: out[i] = sigmoid(x[i]); break;
      case Activation::kRelu: out[i] = x[i] > 0.0 ? x[i] : 0.0; break;
    }
  }
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out, kind]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      auto GX = x.grad();
      for (std::size_t i = 0; i < G.size(); ++i) {
        const double y = out[i];
        switch (kind) {
          case Activation::kTanh: GX[i] += G[i] * (1.0 - y * y); break;
          case Activation::kSigmoid: GX[i] += G[i] * y * (1.0 - y); break;
          case Activation::kRelu: GX[i] += x[i] > 0.0 ? G[i] : 0.0; break;
        }
      }
    });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  Tensor out = Tensor::scalar(s);
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out]() mutable {
      if (!out.has_grad()) return;
      const double g = out.grad()[0];
      for (double& gx : x.grad()) gx += g;
    });
  }
  return out;
}

Tensor dot(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) mismatch("dot", a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  Tensor out = Tensor::scalar(s);
  if (tracks(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape.record([a, b, out]() mutable {
      if (!out.has_grad()) return;
      const double g = out.grad()[0];
      if (a.requires_grad()) {
        auto GA = a.grad();
        for (std::size_t i = 0; i < GA.size(); ++i) GA[i] += g * b[i];
      }
      if (b.requires_grad()) {
        auto GB = b.grad();
        for (std::size_t i = 0; i < GB.size(); ++i) GB[i] += g * a[i];
      }
    });
  }
  return out;
}

Tensor masked_softmax(Tape& tape, const Tensor& logits, std::span<const std::uint8_t> mask) {
  expect_rank(logits, 1, "masked_softmax");
  const std::size_t p = logits.dim(0);
  if (mask.size() != p) {
    throw DimensionError("masked_softmax: mask length " + std::to_string(mask.size()) + " for logits " +
                         shape_to_string(logits.shape()));
  }
  Tensor out({p});
  double peak = -INFINITY;
  for (std::size_t i = 0; i < p; ++i)
    if (mask[i]) peak = std::max(peak, logits[i]);
  if (peak == -INFINITY) return out;  // all positions masked

  double total = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    if (!mask[i]) continue;
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (std::size_t i = 0; i < p; ++i) out[i] /= total;

  if (tracks(tape, {&logits})) {
    out.set_requires_grad(true);
    tape.record([logits, out, p]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      double weighted = 0.0;
      for (std::size_t i = 0; i < p; ++i) weighted += out[i] * G[i];
      auto GL = logits.grad();
      // Masked positions have out[i] == 0 and so receive nothing.
      for (std::size_t i = 0; i < p; ++i) GL[i] += out[i] * (G[i] - weighted);
    });
  }
  return out;
}

Tensor conv_valid(Tape& tape, const Tensor& cube, const Tensor& filters, const Tensor& biases) {
  expect_rank(cube, 3, "conv_valid");
  expect_rank(filters, 4, "conv_valid");
  expect_rank(biases, 1, "conv_valid");
  const std::size_t A = cube.dim(0), B = cube.dim(1), C = cube.dim(2);
  const std::size_t M = filters.dim(0);
  if (A < 3 || B < 3) {
    throw DimensionError("conv_valid: cube " + shape_to_string(cube.shape()) + " is smaller than the 3x3 window");
  }
  if (filters.dim(1) != 3 || filters.dim(2) != 3 || filters.dim(3) != C) mismatch("conv_valid", cube, filters);
  if (biases.dim(0) != M) mismatch("conv_valid", filters, biases);

  const std::size_t H = A - 2, W = B - 2;
  const std::size_t row = 3 * C;  // one filter row: 3 cube cells of depth C
  Tensor out({M, H, W});
  auto X = cube.data(), F = filters.data();
  for (std::size_t m = 0; m < M; ++m) {
    const double* f = F.data() + m * 9 * C;
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j) {
        double s = biases[m];
        for (std::size_t di = 0; di < 3; ++di) {
          // Cells (i+di, j..j+2) are contiguous in the cube.
          const double* x = X.data() + ((i + di) * B + j) * C;
          const double* fr = f + di * row;
          for (std::size_t t = 0; t < row; ++t) s += fr[t] * x[t];
        }
        out[(m * H + i) * W + j] = s > 0.0 ? s : 0.0;
      }
  }

  if (tracks(tape, {&cube, &filters, &biases})) {
    out.set_requires_grad(true);
    tape.record([cube, filters, biases, out, M, H, W, B, C, row]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      auto X = cube.data(), F = filters.data();
      std::span<double> GX, GF, GB;
      if (cube.requires_grad()) GX = cube.grad();
      if (filters.requires_grad()) GF = filters.grad();
      if (biases.requires_grad()) GB = biases.grad();
      for (std::size_t m = 0; m < M; ++m)
        for (std::size_t i = 0; i < H; ++i)
          for (std::size_t j = 0; j < W; ++j) {
            const std::size_t o = (m * H + i) * W + j;
            if (out[o] <= 0.0) continue;  // ReLU inactive
            const double g = G[o];
            if (!GB.empty()) GB[m] += g;
            for (std::size_t di = 0; di < 3; ++di) {
              const std::size_t xo = ((i + di) * B + j) * C;
              const std::size_t fo = m * 9 * C + di * row;
              if (!GF.empty())
                for (std::size_t t = 0; t < row; ++t) GF[fo + t] += g * X[xo + t];
              if (!GX.empty())
                for (std::size_t t = 0; t < row; ++t) GX[xo + t] += g * F[fo + t];
            }
          }
    });
  }
  return out;
}

Tensor global_max_pool(Tape& tape, const Tensor& maps) {
  expect_rank(maps, 3, "global_max_pool");
  const std::size_t M = maps.dim(0), cells = maps.dim(1) * maps.dim(2);
  Tensor out({M});
  std::vector<std::size_t> argmax(M);
  for (std::size_t m = 0; m < M; ++m) {
    std::size_t best = m * cells;
    for (std::size_t c = 1; c < cells; ++c)
      if (maps[m * cells + c] > maps[best]) best = m * cells + c;
    argmax[m] = best;
    out[m] = maps[best];
  }
  if (tracks(tape, {&maps})) {
    out.set_requires_grad(true);
    tape.record([maps, out, argmax = std::move(argmax)]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      auto GM = maps.grad();
      for (std::size_t m = 0; m < argmax.size(); ++m) GM[argmax[m]] += G[m];
    });
  }
  return out;
}

Tensor lookup_rows(Tape& tape, const Tensor& table, std::span<const std::size_t> indices) {
  expect_rank(table, 2, "lookup_rows");
  const std::size_t rows = table.dim(0), D = table.dim(1);
  if (indices.empty()) throw DimensionError("lookup_rows: no indices");
  Tensor out({indices.size(), D});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t idx = indices[r];
    if (idx >= rows) {
      throw DimensionError("lookup_rows: index " + std::to_string(idx) + " out of range for table " +
                           shape_to_string(table.shape()));
    }
    if (idx == 0) continue;
    std::copy_n(table.data().begin() + idx * D, D, out.data().begin() + r * D);
  }
  if (tracks(tape, {&table})) {
    out.set_requires_grad(true);
    tape.record([table, out, D, idx = std::vector<std::size_t>(indices.begin(), indices.end())]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      auto GT = table.grad();
      for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] == 0) continue;
        for (std::size_t d = 0; d < D; ++d) GT[idx[r] * D + d] += G[r * D + d];
      }
    });
  }
  return out;
}

Tensor lstm_sequence(Tape& tape, const Tensor& projected, const Tensor& recurrent, Direction direction) {
  expect_rank(projected, 2, "lstm_sequence");
  expect_rank(recurrent, 2, "lstm_sequence");
  const std::size_t p = projected.dim(0), H = recurrent.dim(0), G4 = 4 * H;
  if (recurrent.dim(1) != G4 || projected.dim(1) != G4) mismatch("lstm_sequence", projected, recurrent);

  // Per-step activations kept for backpropagation through time, indexed by
  // sequence position. gates holds i, f, o, g after their nonlinearities.
  std::vector<double> gates(p * G4), cells(p * H);
  Tensor out({p, H});
  auto Z = projected.data(), R = recurrent.data();
  std::vector<double> a(G4);
  const bool reverse = direction == Direction::kReverse;
  for (std::size_t step = 0; step < p; ++step) {
    const std::size_t t = reverse ? p - 1 - step : step;
    const double* h_prev = step ? out.data().data() + (reverse ? t + 1 : t - 1) * H : nullptr;
    const double* c_prev = step ? cells.data() + (reverse ? t + 1 : t - 1) * H : nullptr;
    std::copy_n(Z.begin() + t * G4, G4, a.begin());
    if (h_prev) {
      for (std::size_t l = 0; l < H; ++l) {
        const double hv = h_prev[l];
        if (hv == 0.0) continue;
        for (std::size_t j = 0; j < G4; ++j) a[j] += hv * R[l * G4 + j];
      }
    }
    double* gt = gates.data() + t * G4;
    for (std::size_t j = 0; j < 3 * H; ++j) gt[j] = sigmoid(a[j]);
    for (std::size_t j = 3 * H; j < G4; ++j) gt[j] = std::tanh(a[j]);
    for (std::size_t u = 0; u < H; ++u) {
      const double c = gt[u] * gt[3 * H + u] + (c_prev ? gt[H + u] * c_prev[u] : 0.0);
      cells[t * H + u] = c;
      out[t * H + u] = gt[2 * H + u] * std::tanh(c);
    }
  }

  if (tracks(tape, {&projected, &recurrent})) {
    out.set_requires_grad(true);
    tape.record([projected, recurrent, out, gates = std::move(gates), cells = std::move(cells), p, H, G4,
                 reverse]() mutable {
      if (!out.has_grad()) return;
      auto DH = out.grad();
      auto R = recurrent.data();
      std::span<double> GZ, GR;
      if (projected.requires_grad()) GZ = projected.grad();
      if (recurrent.requires_grad()) GR = recurrent.grad();
      std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), da(G4);
      for (std::size_t step = p; step-- > 0;) {
        const std::size_t t = reverse ? p - 1 - step : step;
        const bool first = step == 0;
        const std::size_t prev = reverse ? t + 1 : t - 1;
        const double* gt = gates.data() + t * G4;
        for (std::size_t u = 0; u < H; ++u) {
          const double i = gt[u], f = gt[H + u], o = gt[2 * H + u], g = gt[3 * H + u];
          const double tc = std::tanh(cells[t * H + u]);
          const double dh = DH[t * H + u] + dh_next[u];
          const double dc = dc_next[u] + dh * o * (1.0 - tc * tc);
          const double c_prev = first ? 0.0 : cells[prev * H + u];
          da[u] = dc * g * i * (1.0 - i);
          da[H + u] = dc * c_prev * f * (1.0 - f);
          da[2 * H + u] = dh * tc * o * (1.0 - o);
          da[3 * H + u] = dc * i * (1.0 - g * g);
          dc_next[u] = dc * f;
        }
        if (!GZ.empty())
          for (std::size_t j = 0; j < G4; ++j) GZ[t * G4 + j] += da[j];
        if (first) break;
        const double* h_prev = out.data().data() + prev * H;
        for (std::size_t l = 0; l < H; ++l) {
          double s = 0.0;
          for (std::size_t j = 0; j < G4; ++j) {
            s += da[j] * R[l * G4 + j];
            if (!GR.empty()) GR[l * G4 + j] += h_prev[l] * da[j];
          }
          dh_next[l] = s;
        }
      }
    });
  }
  return out;
}

Tensor concat_cols(Tape& tape, const Tensor& left, const Tensor& right) {
  expect_rank(left, 2, "concat_cols");
  expect_rank(right, 2, "concat_cols");
  const std::size_t m = left.dim(0), a = left.dim(1), b = right.dim(1);
  if (right.dim(0) != m) mismatch("concat_cols", left, right);
  Tensor out({m, a + b});
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(left.data().begin() + i * a, a, out.data().begin() + i * (a + b));
    std::copy_n(right.data().begin() + i * b, b, out.data().begin() + i * (a + b) + a);
  }
  if (tracks(tape, {&left, &right})) {
    out.set_requires_grad(true);
    tape.record([left, right, out, m, a, b]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      if (left.requires_grad()) {
        auto GL = left.grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < a; ++j) GL[i * a + j] += G[i * (a + b) + j];
      }
      if (right.requires_grad()) {
        auto GR = right.grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < b; ++j) GR[i * b + j] += G[i * (a + b) + a + j];
      }
    });
  }
  return out;
}

Tensor repeat_rows(Tape& tape, const Tensor& v, std::size_t filled, std::size_t rows) {
  expect_rank(v, 1, "repeat_rows");
  if (filled > rows) {
    throw DimensionError("repeat_rows: " + std::to_string(filled) + " filled rows exceed " + std::to_string(rows));
  }
  const std::size_t D = v.dim(0);
  Tensor out({rows, D});
  for (std::size_t r = 0; r < filled; ++r) std::copy_n(v.data().begin(), D, out.data().begin() + r * D);
  if (tracks(tape, {&v})) {
    out.set_requires_grad(true);
    tape.record([v, out, filled, D]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      auto GV = v.grad();
      for (std::size_t r = 0; r < filled; ++r)
        for (std::size_t d = 0; d < D; ++d) GV[d] += G[r * D + d];
    });
  }
  return out;
}

Tensor stack(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("stack: nothing to stack");
  const Shape& inner = parts.front().shape();
  Shape shape{parts.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  Tensor out(shape);
  const std::size_t n = parts.front().size();
  bool any_grad = false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].shape() != inner) mismatch("stack", parts.front(), parts[i]);
    std::copy_n(parts[i].data().begin(), n, out.data().begin() + i * n);
    any_grad = any_grad || parts[i].requires_grad();
  }
  if (tape.recording() && any_grad) {
    out.set_requires_grad(true);
    tape.record([inputs = std::vector<Tensor>(parts.begin(), parts.end()), out, n]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!inputs[i].requires_grad()) continue;
        auto GI = inputs[i].grad();
        for (std::size_t j = 0; j < n; ++j) GI[j] += G[i * n + j];
      }
    });
  }
  return out;
}

Tensor masked_mean_rows(Tape& tape, const Tensor& x, std::span<const std::uint8_t> mask) {
  expect_rank(x, 2, "masked_mean_rows");
  const std::size_t p = x.dim(0), D = x.dim(1);
  if (mask.size() != p) {
    throw DimensionError("masked_mean_rows: mask length " + std::to_string(mask.size()) + " for " +
                         shape_to_string(x.shape()));
  }
  const auto count = static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m; }));
  Tensor out({D});
  if (count == 0) return out;
  const double scale = 1.0 / static_cast<double>(count);
  for (std::size_t r = 0; r < p; ++r) {
    if (!mask[r]) continue;
    for (std::size_t d = 0; d < D; ++d) out[d] += x[r * D + d] * scale;
  }
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out, m = Mask(mask.begin(), mask.end()), D, scale]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      auto GX = x.grad();
      for (std::size_t r = 0; r < m.size(); ++r) {
        if (!m[r]) continue;
        for (std::size_t d = 0; d < D; ++d) GX[r * D + d] += G[d] * scale;
      }
    });
  }
  return out;
}

Tensor dropout(Tape& tape, const Tensor& x, double rate, SeededRng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> factor(x.size());
  for (double& f : factor) f = rng.bernoulli(rate) ? 0.0 : keep_scale;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * factor[i];
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape.record([x, out, factor = std::move(factor)]() mutable {
      if (!out.has_grad()) return;
      auto G = out.grad();
      auto GX = x.grad();
      for (std::size_t i = 0; i < G.size(); ++i) GX[i] += G[i] * factor[i];
    });
  }
  return out;
}

Tensor bce_loss(Tape& tape, const Tensor& probability, int target) {
  if (probability.size() != 1) throw DimensionError("bce_loss: probability must be a scalar");
  if (target != 0 && target != 1) throw ContractError("bce_loss: target must be 0 or 1");
  const double y = std::clamp(probability[0], kProbabilityClamp, 1.0 - kProbabilityClamp);
  const double t = target;
  Tensor out = Tensor::scalar(-(t * std::log(y) + (1.0 - t) * std::log(1.0 - y)));
  if (tracks(tape, {&probability})) {
    out.set_requires_grad(true);
    tape.record([probability, out, y, t]() mutable {
      if (!out.has_grad()) return;
      probability.grad()[0] += out.grad()[0] * (-t / y + (1.0 - t) / (1.0 - y));
    });
  }
  return out;
}

}  // namespace rumor
