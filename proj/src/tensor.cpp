#include "radt/tensor.hpp"

#include <algorithm>
#include <cblas.h>
#include <cmath>
#include <unordered_set>

extern "C" void openblas_set_num_threads(int);

namespace radt::nn {

namespace {

struct BlasInit {
  BlasInit() { openblas_set_num_threads(1); }
};
const BlasInit blas_init;  // single-threaded BLAS: deterministic, one core

std::shared_ptr<Node> make_node(std::vector<int> shape,
                                std::vector<std::shared_ptr<Node>> parents,
                                std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->parents = std::move(parents);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  n->value.resize(n->numel());
  return n;
}

void gemm(bool ta, bool tb, int m, int n, int k, double alpha, const double* a,
          int lda, const double* b, int ldb, double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb,
              beta, c, ldc);
}

int last_dim(const Node& n) { return n.shape.back(); }

std::size_t rows_of(const Node& n) {
  return n.numel() / static_cast<std::size_t>(last_dim(n));
}

[[noreturn]] void shape_error(const std::string& op) {
  throw ArgumentError(op + ": incompatible shapes");
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->requires_grad = requires_grad;
  n->value.assign(n->numel(), 0.0);
  return Tensor(n);
}

Tensor Tensor::constant(std::vector<int> shape, std::vector<double> data) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(data);
  if (n->value.size() != n->numel())
    throw ArgumentError("constant: data size does not match shape");
  return Tensor(n);
}

Tensor Tensor::param(std::vector<int> shape, std::vector<double> data) {
  Tensor t = constant(std::move(shape), std::move(data));
  t.node()->requires_grad = true;
  return t;
}

Tensor Tensor::randn_param(std::vector<int> shape, Rng& rng, double stddev) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  std::vector<double> data(n);
  for (auto& x : data) x = rng.normal(0.0, stddev);
  return param(std::move(shape), std::move(data));
}

void backward(const Tensor& loss) {
  if (!loss) throw StateError("backward called on an empty tensor");
  if (loss.numel() != 1) throw StateError("backward requires a scalar loss");
  Node* root = loss.node().get();
  if (!root->requires_grad)
    throw StateError("backward called on a tensor with no recorded graph");

  // Iterative DFS topological order over grad-requiring nodes.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  auto an = a.node();
  auto bn = b.node();

  if (as.size() == 2 && bs.size() == 2) {
    int m = as[0], k = as[1], n = bs[1];
    if (bs[0] != k) shape_error("matmul");
    auto out = make_node({m, n}, {an, bn}, [an, bn, m, k, n](Node& self) {
      if (an->requires_grad) {
        an->ensure_grad();
        gemm(false, true, m, k, n, 1.0, self.grad.data(), n, bn->value.data(), n,
             1.0, an->grad.data(), k);
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        gemm(true, false, k, n, m, 1.0, an->value.data(), k, self.grad.data(), n,
             1.0, bn->grad.data(), n);
      }
    });
    gemm(false, false, m, n, k, 1.0, an->value.data(), k, bn->value.data(), n,
         0.0, out->value.data(), n);
    return Tensor(out);
  }

  if (as.size() == 3 && bs.size() == 2) {
    int B = as[0], m = as[1], k = as[2], n = bs[1];
    if (bs[0] != k) shape_error("matmul");
    // Shared rhs: fold the batch into the row dimension, one gemm.
    auto out = make_node({B, m, n}, {an, bn}, [an, bn, B, m, k, n](Node& self) {
      int rows = B * m;
      if (an->requires_grad) {
        an->ensure_grad();
        gemm(false, true, rows, k, n, 1.0, self.grad.data(), n, bn->value.data(),
             n, 1.0, an->grad.data(), k);
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        gemm(true, false, k, n, rows, 1.0, an->value.data(), k, self.grad.data(),
             n, 1.0, bn->grad.data(), n);
      }
    });
    gemm(false, false, B * m, n, k, 1.0, an->value.data(), k, bn->value.data(),
         n, 0.0, out->value.data(), n);
    return Tensor(out);
  }

  if (as.size() == 3 && bs.size() == 3) {
    int B = as[0], m = as[1], k = as[2], n = bs[2];
    if (bs[0] != B || bs[1] != k) shape_error("matmul");
    auto out = make_node({B, m, n}, {an, bn}, [an, bn, B, m, k, n](Node& self) {
      for (int i = 0; i < B; ++i) {
        const double* ga = an->value.data() + static_cast<std::size_t>(i) * m * k;
        const double* gb = bn->value.data() + static_cast<std::size_t>(i) * k * n;
        const double* gc = self.grad.data() + static_cast<std::size_t>(i) * m * n;
        if (an->requires_grad) {
          an->ensure_grad();
          gemm(false, true, m, k, n, 1.0, gc, n, gb, n, 1.0,
               an->grad.data() + static_cast<std::size_t>(i) * m * k, k);
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          gemm(true, false, k, n, m, 1.0, ga, k, gc, n, 1.0,
               bn->grad.data() + static_cast<std::size_t>(i) * k * n, n);
        }
      }
    });
    for (int i = 0; i < B; ++i)
      gemm(false, false, m, n, k, 1.0,
           an->value.data() + static_cast<std::size_t>(i) * m * k, k,
           bn->value.data() + static_cast<std::size_t>(i) * k * n, n, 0.0,
           out->value.data() + static_cast<std::size_t>(i) * m * n, n);
    return Tensor(out);
  }
  shape_error("matmul");
}

Tensor transpose_last2(const Tensor& a) {
  auto an = a.node();
  const auto& as = a.shape();
  if (as.size() < 2) shape_error("transpose_last2");
  int m = as[as.size() - 2], n = as.back();
  int B = static_cast<int>(a.numel() / (static_cast<std::size_t>(m) * n));
  std::vector<int> out_shape = as;
  std::swap(out_shape[out_shape.size() - 2], out_shape.back());
  auto out = make_node(out_shape, {an}, [an, B, m, n](Node& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (int b = 0; b < B; ++b) {
      const double* g = self.grad.data() + static_cast<std::size_t>(b) * m * n;
      double* dst = an->grad.data() + static_cast<std::size_t>(b) * m * n;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) dst[j * n + i] += g[i * m + j];
    }
  });
  for (int b = 0; b < B; ++b) {
    const double* src = an->value.data() + static_cast<std::size_t>(b) * m * n;
    double* dst = out->value.data() + static_cast<std::size_t>(b) * m * n;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
  }
  return Tensor(out);
}

Tensor add(const Tensor& a, const Tensor& b) {
  auto an = a.node();
  auto bn = b.node();
  if (a.shape() == b.shape()) {
    auto out = make_node(a.shape(), {an, bn}, [an, bn](Node& self) {
      if (an->requires_grad) {
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          an->grad[i] += self.grad[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          bn->grad[i] += self.grad[i];
      }
    });
    for (std::size_t i = 0; i < out->value.size(); ++i)
      out->value[i] = an->value[i] + bn->value[i];
    return Tensor(out);
  }
  // Bias broadcast over the last dimension.
  if (b.ndim() == 1 && b.dim(0) == a.shape().back()) {
    int n = b.dim(0);
    std::size_t rows = a.numel() / n;
    auto out = make_node(a.shape(), {an, bn}, [an, bn, rows, n](Node& self) {
      if (an->requires_grad) {
        an->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          an->grad[i] += self.grad[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (std::size_t r = 0; r < rows; ++r)
          for (int j = 0; j < n; ++j) bn->grad[j] += self.grad[r * n + j];
      }
    });
    for (std::size_t r = 0; r < rows; ++r)
      for (int j = 0; j < n; ++j)
        out->value[r * n + j] = an->value[r * n + j] + bn->value[j];
    return Tensor(out);
  }
  shape_error("add");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("mul");
  auto an = a.node();
  auto bn = b.node();
  auto out = make_node(a.shape(), {an, bn}, [an, bn](Node& self) {
    if (an->requires_grad) {
      an->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        an->grad[i] += self.grad[i] * bn->value[i];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        bn->grad[i] += self.grad[i] * an->value[i];
    }
  });
  for (std::size_t i = 0; i < out->value.size(); ++i)
    out->value[i] = an->value[i] * bn->value[i];
  return Tensor(out);
}

Tensor scale(const Tensor& a, double s) {
  auto an = a.node();
  auto out = make_node(a.shape(), {an}, [an, s](Node& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      an->grad[i] += s * self.grad[i];
  });
  for (std::size_t i = 0; i < out->value.size(); ++i)
    out->value[i] = s * an->value[i];
  return Tensor(out);
}

Tensor add_constant(const Tensor& a, const std::vector<double>& c) {
  if (c.size() != a.numel()) shape_error("add_constant");
  auto an = a.node();
  auto out = make_node(a.shape(), {an}, [an](Node& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      an->grad[i] += self.grad[i];
  });
  for (std::size_t i = 0; i < out->value.size(); ++i)
    out->value[i] = an->value[i] + c[i];
  return Tensor(out);
}

Tensor gelu(const Tensor& a) {
  auto an = a.node();
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kA = 0.044715;
  auto out = make_node(a.shape(), {an}, [an](Node& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      double x = an->value[i];
      double u = kC * (x + kA * x * x * x);
      double th = std::tanh(u);
      double d = 0.5 * (1.0 + th) +
                 0.5 * x * (1.0 - th * th) * kC * (1.0 + 3.0 * kA * x * x);
      an->grad[i] += self.grad[i] * d;
    }
  });
  for (std::size_t i = 0; i < out->value.size(); ++i) {
    double x = an->value[i];
    out->value[i] = 0.5 * x * (1.0 + std::tanh(kC * (x + kA * x * x * x)));
  }
  return Tensor(out);
}

Tensor sigmoid(const Tensor& a) {
  auto an = a.node();
  auto out_holder = std::make_shared<std::vector<double>>();
  auto out = make_node(a.shape(), {an}, [an, out_holder](Node& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    const auto& s = *out_holder;
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      an->grad[i] += self.grad[i] * s[i] * (1.0 - s[i]);
  });
  for (std::size_t i = 0; i < out->value.size(); ++i)
    out->value[i] = 1.0 / (1.0 + std::exp(-an->value[i]));
  *out_holder = out->value;
  return Tensor(out);
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  auto xn = x.node();
  auto gn = gain.node();
  auto bn = bias.node();
  const int n = last_dim(*xn);
  if (gn->shape != std::vector<int>{n} || bn->shape != std::vector<int>{n})
    shape_error("layer_norm");
  const std::size_t rows = rows_of(*xn);

  auto xhat = std::make_shared<std::vector<double>>(xn->numel());
  auto inv_sigma = std::make_shared<std::vector<double>>(rows);

  auto out = make_node(
      x.shape(), {xn, gn, bn}, [xn, gn, bn, xhat, inv_sigma, rows, n](Node& self) {
        for (std::size_t r = 0; r < rows; ++r) {
          const double* dy = self.grad.data() + r * n;
          const double* xh = xhat->data() + r * n;
          if (gn->requires_grad) {
            gn->ensure_grad();
            for (int j = 0; j < n; ++j) gn->grad[j] += dy[j] * xh[j];
          }
          if (bn->requires_grad) {
            bn->ensure_grad();
            for (int j = 0; j < n; ++j) bn->grad[j] += dy[j];
          }
          if (xn->requires_grad) {
            xn->ensure_grad();
            double mean_gdy = 0.0, mean_gdy_xh = 0.0;
            for (int j = 0; j < n; ++j) {
              double g = gn->value[j] * dy[j];
              mean_gdy += g;
              mean_gdy_xh += g * xh[j];
            }
            mean_gdy /= n;
            mean_gdy_xh /= n;
            double is = (*inv_sigma)[r];
            double* dx = xn->grad.data() + r * n;
            for (int j = 0; j < n; ++j) {
              double g = gn->value[j] * dy[j];
              dx[j] += is * (g - mean_gdy - xh[j] * mean_gdy_xh);
            }
          }
        }
      });

  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xn->value.data() + r * n;
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += xr[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= n;
    double is = 1.0 / std::sqrt(var + eps);
    (*inv_sigma)[r] = is;
    double* xh = xhat->data() + r * n;
    double* o = out->value.data() + r * n;
    for (int j = 0; j < n; ++j) {
      xh[j] = (xr[j] - mean) * is;
      o[j] = xh[j] * gn->value[j] + bn->value[j];
    }
  }
  return Tensor(out);
}

Tensor softmax_last(const Tensor& a) {
  auto an = a.node();
  const int n = last_dim(*an);
  const std::size_t rows = rows_of(*an);
  auto probs = std::make_shared<std::vector<double>>(an->numel());
  auto out = make_node(a.shape(), {an}, [an, probs, rows, n](Node& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* p = probs->data() + r * n;
      const double* dy = self.grad.data() + r * n;
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += p[j] * dy[j];
      double* dx = an->grad.data() + r * n;
      for (int j = 0; j < n; ++j) dx[j] += p[j] * (dy[j] - dot);
    }
  });
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = an->value.data() + r * n;
    double mx = xr[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, xr[j]);
    double sum = 0.0;
    double* o = out->value.data() + r * n;
    for (int j = 0; j < n; ++j) {
      o[j] = std::exp(xr[j] - mx);
      sum += o[j];
    }
    for (int j = 0; j < n; ++j) o[j] /= sum;
  }
  *probs = out->value;
  return Tensor(out);
}

Tensor dropout(const Tensor& a, double p, Rng& rng, bool training) {
  if (!training || p <= 0.0) return a;
  if (p >= 1.0) throw ArgumentError("dropout rate must be < 1");
  auto an = a.node();
  auto mask = std::make_shared<std::vector<double>>(an->numel());
  const double keep = 1.0 - p;
  for (auto& m : *mask) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
  auto out = make_node(a.shape(), {an}, [an, mask](Node& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      an->grad[i] += self.grad[i] * (*mask)[i];
  });
  for (std::size_t i = 0; i < out->value.size(); ++i)
    out->value[i] = an->value[i] * (*mask)[i];
  return Tensor(out);
}

namespace {
Tensor rows_from(const Tensor& x, std::vector<int> idx, const char* op) {
  auto xn = x.node();
  if (x.ndim() != 2) shape_error(op);
  const int d = x.dim(1);
  for (int i : idx)
    if (i < 0 || i >= x.dim(0)) throw ArgumentError(std::string(op) + ": row index out of range");
  auto shared_idx = std::make_shared<std::vector<int>>(std::move(idx));
  auto out = make_node({static_cast<int>(shared_idx->size()), d}, {xn},
                       [xn, shared_idx, d](Node& self) {
                         if (!xn->requires_grad) return;
                         xn->ensure_grad();
                         for (std::size_t r = 0; r < shared_idx->size(); ++r) {
                           double* dst = xn->grad.data() +
                                         static_cast<std::size_t>((*shared_idx)[r]) * d;
                           const double* src = self.grad.data() + r * d;
                           for (int j = 0; j < d; ++j) dst[j] += src[j];
                         }
                       });
  for (std::size_t r = 0; r < shared_idx->size(); ++r) {
    const double* src =
        xn->value.data() + static_cast<std::size_t>((*shared_idx)[r]) * d;
    std::copy(src, src + d, out->value.data() + r * d);
  }
  return Tensor(out);
}
}  // namespace

Tensor select_rows(const Tensor& table, const std::vector<int>& idx) {
  return rows_from(table, idx, "select_rows");
}

Tensor gather_rows(const Tensor& x, const std::vector<int>& idx) {
  return rows_from(x, idx, "gather_rows");
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ArgumentError("concat_rows: no parts");
  const int d = parts[0].dim(1);
  int rows = 0;
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& p : parts) {
    if (p.ndim() != 2 || p.dim(1) != d) shape_error("concat_rows");
    rows += p.dim(0);
    parents.push_back(p.node());
  }
  auto out = make_node({rows, d}, parents, [d](Node& self) {
    std::size_t offset = 0;
    for (auto& p : self.parents) {
      std::size_t n = p->numel();
      if (p->requires_grad) {
        p->ensure_grad();
        for (std::size_t i = 0; i < n; ++i) p->grad[i] += self.grad[offset + i];
      }
      offset += n;
    }
  });
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.value().begin(), p.value().end(), out->value.begin() + offset);
    offset += p.numel();
  }
  return Tensor(out);
}

Tensor interleave_rows(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(0) != b.dim(0) ||
      a.dim(1) != b.dim(1))
    shape_error("interleave_rows");
  auto an = a.node();
  auto bn = b.node();
  const int t = a.dim(0), d = a.dim(1);
  auto out = make_node({2 * t, d}, {an, bn}, [an, bn, t, d](Node& self) {
    for (int r = 0; r < t; ++r) {
      if (an->requires_grad) {
        an->ensure_grad();
        const double* src = self.grad.data() + static_cast<std::size_t>(2 * r) * d;
        for (int j = 0; j < d; ++j) an->grad[static_cast<std::size_t>(r) * d + j] += src[j];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        const double* src =
            self.grad.data() + static_cast<std::size_t>(2 * r + 1) * d;
        for (int j = 0; j < d; ++j) bn->grad[static_cast<std::size_t>(r) * d + j] += src[j];
      }
    }
  });
  for (int r = 0; r < t; ++r) {
    std::copy_n(an->value.data() + static_cast<std::size_t>(r) * d, d,
                out->value.data() + static_cast<std::size_t>(2 * r) * d);
    std::copy_n(bn->value.data() + static_cast<std::size_t>(r) * d, d,
                out->value.data() + static_cast<std::size_t>(2 * r + 1) * d);
  }
  return Tensor(out);
}

Tensor pad_rows(const Tensor& x, int target_rows) {
  if (x.ndim() != 2 || target_rows < x.dim(0)) shape_error("pad_rows");
  if (target_rows == x.dim(0)) return x;
  auto xn = x.node();
  const int d = x.dim(1);
  auto out = make_node({target_rows, d}, {xn}, [xn](Node& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < xn->grad.size(); ++i) xn->grad[i] += self.grad[i];
  });
  std::fill(out->value.begin(), out->value.end(), 0.0);
  std::copy(xn->value.begin(), xn->value.end(), out->value.begin());
  return Tensor(out);
}

Tensor stack(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ArgumentError("stack: no parts");
  const auto s0 = parts[0].shape();
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& p : parts) {
    if (p.shape() != s0) shape_error("stack");
    parents.push_back(p.node());
  }
  std::vector<int> shape{static_cast<int>(parts.size())};
  shape.insert(shape.end(), s0.begin(), s0.end());
  auto out = make_node(shape, parents, [](Node& self) {
    std::size_t offset = 0;
    for (auto& p : self.parents) {
      std::size_t n = p->numel();
      if (p->requires_grad) {
        p->ensure_grad();
        for (std::size_t i = 0; i < n; ++i) p->grad[i] += self.grad[offset + i];
      }
      offset += n;
    }
  });
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.value().begin(), p.value().end(), out->value.begin() + offset);
    offset += p.numel();
  }
  return Tensor(out);
}

Tensor slice_batch(const Tensor& x, int b) {
  if (x.ndim() != 3 || b < 0 || b >= x.dim(0)) shape_error("slice_batch");
  auto xn = x.node();
  const int l = x.dim(1), d = x.dim(2);
  const std::size_t slab = static_cast<std::size_t>(l) * d;
  auto out = make_node({l, d}, {xn}, [xn, b, slab](Node& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    double* dst = xn->grad.data() + b * slab;
    for (std::size_t i = 0; i < slab; ++i) dst[i] += self.grad[i];
  });
  std::copy_n(xn->value.data() + b * slab, slab, out->value.data());
  return Tensor(out);
}

Tensor slice_last(const Tensor& x, int start, int len) {
  auto xn = x.node();
  const int n = last_dim(*xn);
  if (start < 0 || len <= 0 || start + len > n) shape_error("slice_last");
  const std::size_t rows = rows_of(*xn);
  std::vector<int> shape = x.shape();
  shape.back() = len;
  auto out = make_node(shape, {xn}, [xn, start, len, n, rows](Node& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r)
      for (int j = 0; j < len; ++j)
        xn->grad[r * n + start + j] += self.grad[r * len + j];
  });
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(xn->value.data() + r * n + start, len,
                out->value.data() + r * static_cast<std::size_t>(len));
  return Tensor(out);
}

Tensor split_heads(const Tensor& x, int n_head) {
  if (x.ndim() != 3 || x.dim(2) % n_head != 0) shape_error("split_heads");
  auto xn = x.node();
  const int B = x.dim(0), L = x.dim(1), D = x.dim(2), dh = D / n_head;
  auto out = make_node({B * n_head, L, dh}, {xn}, [xn, B, L, D, dh,
                                                   n_head](Node& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (int b = 0; b < B; ++b)
      for (int h = 0; h < n_head; ++h)
        for (int l = 0; l < L; ++l) {
          const double* src =
              self.grad.data() +
              ((static_cast<std::size_t>(b) * n_head + h) * L + l) * dh;
          double* dst = xn->grad.data() +
                        (static_cast<std::size_t>(b) * L + l) * D + h * dh;
          for (int j = 0; j < dh; ++j) dst[j] += src[j];
        }
  });
  for (int b = 0; b < B; ++b)
    for (int h = 0; h < n_head; ++h)
      for (int l = 0; l < L; ++l)
        std::copy_n(
            xn->value.data() + (static_cast<std::size_t>(b) * L + l) * D + h * dh,
            dh,
            out->value.data() +
                ((static_cast<std::size_t>(b) * n_head + h) * L + l) * dh);
  return Tensor(out);
}

Tensor merge_heads(const Tensor& x, int n_head) {
  if (x.ndim() != 3 || x.dim(0) % n_head != 0) shape_error("merge_heads");
  auto xn = x.node();
  const int B = x.dim(0) / n_head, L = x.dim(1), dh = x.dim(2), D = dh * n_head;
  auto out = make_node({B, L, D}, {xn}, [xn, B, L, D, dh, n_head](Node& self) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (int b = 0; b < B; ++b)
      for (int h = 0; h < n_head; ++h)
        for (int l = 0; l < L; ++l) {
          const double* src = self.grad.data() +
                              (static_cast<std::size_t>(b) * L + l) * D + h * dh;
          double* dst = xn->grad.data() +
                        ((static_cast<std::size_t>(b) * n_head + h) * L + l) * dh;
          for (int j = 0; j < dh; ++j) dst[j] += src[j];
        }
  });
  for (int b = 0; b < B; ++b)
    for (int h = 0; h < n_head; ++h)
      for (int l = 0; l < L; ++l)
        std::copy_n(xn->value.data() +
                        ((static_cast<std::size_t>(b) * n_head + h) * L + l) * dh,
                    dh,
                    out->value.data() +
                        (static_cast<std::size_t>(b) * L + l) * D + h * dh);
  return Tensor(out);
}

Tensor mse_loss(const Tensor& pred, const std::vector<double>& target) {
  if (pred.numel() != target.size()) shape_error("mse_loss");
  auto pn = pred.node();
  auto t = std::make_shared<std::vector<double>>(target);
  const double n = static_cast<double>(target.size());
  auto out = make_node({1}, {pn}, [pn, t, n](Node& self) {
    if (!pn->requires_grad) return;
    pn->ensure_grad();
    const double g = self.grad[0] * 2.0 / n;
    for (std::size_t i = 0; i < pn->value.size(); ++i)
      pn->grad[i] += g * (pn->value[i] - (*t)[i]);
  });
  double acc = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    double d = pn->value[i] - target[i];
    acc += d * d;
  }
  out->value[0] = acc / n;
  return Tensor(out);
}

Tensor bce_loss(const Tensor& probs, const std::vector<double>& targets,
                double eps) {
  if (probs.numel() != targets.size()) shape_error("bce_loss");
  auto pn = probs.node();
  auto t = std::make_shared<std::vector<double>>(targets);
  const double n = static_cast<double>(targets.size());
  auto out = make_node({1}, {pn, }, [pn, t, n, eps](Node& self) {
    if (!pn->requires_grad) return;
    pn->ensure_grad();
    const double g = self.grad[0] / n;
    for (std::size_t i = 0; i < pn->value.size(); ++i) {
      double p = pn->value[i];
      if (p <= eps || p >= 1.0 - eps) continue;  // clamp region: zero slope
      pn->grad[i] += g * (p - (*t)[i]) / (p * (1.0 - p));
    }
  });
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double p = std::clamp(pn->value[i], eps, 1.0 - eps);
    acc -= (*t)[i] * std::log(p) + (1.0 - (*t)[i]) * std::log(1.0 - p);
  }
  out->value[0] = acc / n;
  return Tensor(out);
}

Tensor add_scaled(const Tensor& a, const Tensor& b, double alpha) {
  if (a.numel() != 1 || b.numel() != 1) shape_error("add_scaled");
  auto an = a.node();
  auto bn = b.node();
  auto out = make_node({1}, {an, bn}, [an, bn, alpha](Node& self) {
    if (an->requires_grad) {
      an->ensure_grad();
      an->grad[0] += self.grad[0];
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      bn->grad[0] += alpha * self.grad[0];
    }
  });
  out->value[0] = an->value[0] + alpha * bn->value[0];
  return Tensor(out);
}

Tensor mean_scalars(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ArgumentError("mean_scalars: empty list");
  std::vector<std::shared_ptr<Node>> parents;
  double acc = 0.0;
  for (const auto& x : xs) {
    if (x.numel() != 1) shape_error("mean_scalars");
    parents.push_back(x.node());
    acc += x.value()[0];
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  auto out = make_node({1}, parents, [inv](Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      p->ensure_grad();
      p->grad[0] += inv * self.grad[0];
    }
  });
  out->value[0] = acc * inv;
  return Tensor(out);
}

}  // namespace radt::nn
