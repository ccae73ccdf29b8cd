#include "aurascreen/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace aura::nn {

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

bool Tensor::finite() const {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void Tape::ensure_grad(NodeId id) {
  Node& node = nodes_[static_cast<size_t>(id)];
  if (node.grad.v.size() != node.val.v.size()) {
    node.grad.shape = node.val.shape;
    node.grad.v.assign(node.val.v.size(), 0.0);
  }
}

NodeId Tape::push(Tensor val, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(val), Tensor{}, true, std::move(back)});
  return static_cast<NodeId>(nodes_.size()) - 1;
}

NodeId Tape::leaf(Tensor value, bool needs_grad) {
  nodes_.push_back(Node{std::move(value), Tensor{}, needs_grad, nullptr});
  return static_cast<NodeId>(nodes_.size()) - 1;
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.shape != tb.shape) throw Error(Err::ShapeMismatch, "add");
  Tensor out = ta;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += tb.v[i];
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, b](Tape& t) {
    const Tensor& g = t.grad(self);
    t.ensure_grad(a);
    t.ensure_grad(b);
    for (size_t i = 0; i < g.v.size(); ++i) {
      t.grad_mut(a).v[i] += g.v[i];
      t.grad_mut(b).v[i] += g.v[i];
    }
  });
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.shape != tb.shape) throw Error(Err::ShapeMismatch, "sub");
  Tensor out = ta;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] -= tb.v[i];
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, b](Tape& t) {
    const Tensor& g = t.grad(self);
    t.ensure_grad(a);
    t.ensure_grad(b);
    for (size_t i = 0; i < g.v.size(); ++i) {
      t.grad_mut(a).v[i] += g.v[i];
      t.grad_mut(b).v[i] -= g.v[i];
    }
  });
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.shape != tb.shape) throw Error(Err::ShapeMismatch, "mul");
  Tensor out = ta;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= tb.v[i];
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, b](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& ta2 = t.value(a);
    const Tensor& tb2 = t.value(b);
    t.ensure_grad(a);
    t.ensure_grad(b);
    for (size_t i = 0; i < g.v.size(); ++i) {
      t.grad_mut(a).v[i] += g.v[i] * tb2.v[i];
      t.grad_mut(b).v[i] += g.v[i] * ta2.v[i];
    }
  });
}

NodeId Tape::scale(NodeId a, double c) {
  Tensor out = value(a);
  for (double& x : out.v) x *= c;
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, c](Tape& t) {
    const Tensor& g = t.grad(self);
    t.ensure_grad(a);
    for (size_t i = 0; i < g.v.size(); ++i) t.grad_mut(a).v[i] += c * g.v[i];
  });
}

NodeId Tape::add_const(NodeId a, Tensor c) {
  const Tensor& ta = value(a);
  if (ta.shape != c.shape) throw Error(Err::ShapeMismatch, "add_const");
  Tensor out = ta;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += c.v[i];
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a](Tape& t) {
    const Tensor& g = t.grad(self);
    t.ensure_grad(a);
    for (size_t i = 0; i < g.v.size(); ++i) t.grad_mut(a).v[i] += g.v[i];
  });
}

NodeId Tape::mul_const(NodeId a, Tensor c) {
  const Tensor& ta = value(a);
  if (ta.shape != c.shape) throw Error(Err::ShapeMismatch, "mul_const");
  Tensor out = ta;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= c.v[i];
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, c = std::move(c)](Tape& t) {
    const Tensor& g = t.grad(self);
    t.ensure_grad(a);
    for (size_t i = 0; i < g.v.size(); ++i) t.grad_mut(a).v[i] += g.v[i] * c.v[i];
  });
}

NodeId Tape::linear(NodeId x, NodeId w, NodeId b) {
  const Tensor& tx = value(x);
  const Tensor& tw = value(w);
  if (tw.shape.size() != 2) throw Error(Err::ShapeMismatch, "linear weight must be 2D");
  int k = tw.shape[0];
  int n = tw.shape[1];
  if (tx.shape.empty() || tx.shape.back() != k) throw Error(Err::ShapeMismatch, "linear");
  size_t rows = tx.size() / static_cast<size_t>(k);
  std::vector<int> out_shape = tx.shape;
  out_shape.back() = n;
  Tensor out(out_shape);
  const double* bias = nullptr;
  if (b >= 0) {
    if (value(b).size() != static_cast<size_t>(n)) throw Error(Err::ShapeMismatch, "linear bias");
    bias = value(b).v.data();
  }
  for (size_t r = 0; r < rows; ++r) {
    const double* xr = tx.v.data() + r * static_cast<size_t>(k);
    double* yr = out.v.data() + r * static_cast<size_t>(n);
    if (bias)
      for (int j = 0; j < n; ++j) yr[j] = bias[j];
    for (int i = 0; i < k; ++i) {
      double xi = xr[i];
      if (xi == 0.0) continue;
      const double* wrow = tw.v.data() + static_cast<size_t>(i) * static_cast<size_t>(n);
      for (int j = 0; j < n; ++j) yr[j] += xi * wrow[j];
    }
  }
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, x, w, b, k, n, rows](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& tx2 = t.value(x);
    const Tensor& tw2 = t.value(w);
    t.ensure_grad(x);
    t.ensure_grad(w);
    Tensor& gx = t.grad_mut(x);
    Tensor& gw = t.grad_mut(w);
    for (size_t r = 0; r < rows; ++r) {
      const double* xr = tx2.v.data() + r * static_cast<size_t>(k);
      const double* gr = g.v.data() + r * static_cast<size_t>(n);
      double* gxr = gx.v.data() + r * static_cast<size_t>(k);
      for (int i = 0; i < k; ++i) {
        const double* wrow = tw2.v.data() + static_cast<size_t>(i) * static_cast<size_t>(n);
        double* gwrow = gw.v.data() + static_cast<size_t>(i) * static_cast<size_t>(n);
        double acc = 0.0;
        double xi = xr[i];
        for (int j = 0; j < n; ++j) {
          acc += gr[j] * wrow[j];
          gwrow[j] += gr[j] * xi;
        }
        gxr[i] += acc;
      }
    }
    if (b >= 0) {
      t.ensure_grad(b);
      Tensor& gb = t.grad_mut(b);
      for (size_t r = 0; r < rows; ++r) {
        const double* gr = g.v.data() + r * static_cast<size_t>(n);
        for (int j = 0; j < n; ++j) gb.v[static_cast<size_t>(j)] += gr[j];
      }
    }
  });
}

NodeId Tape::bits_linear(const fp::Fingerprint& bits, NodeId w, NodeId b) {
  const Tensor& tw = value(w);
  int width = tw.shape[0];
  int n = tw.shape[1];
  if (width != bits.width()) throw Error(Err::ShapeMismatch, "bits_linear width");
  std::vector<int> set_bits;
  for (int i = 0; i < width; ++i)
    if (bits.test(i)) set_bits.push_back(i);
  Tensor out({n});
  if (b >= 0) out.v = value(b).v;
  for (int bit : set_bits) {
    const double* wrow = tw.v.data() + static_cast<size_t>(bit) * static_cast<size_t>(n);
    for (int j = 0; j < n; ++j) out.v[static_cast<size_t>(j)] += wrow[j];
  }
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, set_bits = std::move(set_bits), w, b, n](Tape& t) {
    const Tensor& g = t.grad(self);
    t.ensure_grad(w);
    Tensor& gw = t.grad_mut(w);
    for (int bit : set_bits) {
      double* gwrow = gw.v.data() + static_cast<size_t>(bit) * static_cast<size_t>(n);
      for (int j = 0; j < n; ++j) gwrow[j] += g.v[static_cast<size_t>(j)];
    }
    if (b >= 0) {
      t.ensure_grad(b);
      Tensor& gb = t.grad_mut(b);
      for (int j = 0; j < n; ++j) gb.v[static_cast<size_t>(j)] += g.v[static_cast<size_t>(j)];
    }
  });
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  int m = ta.shape[0], k = ta.shape[1];
  if (tb.shape[0] != k) throw Error(Err::ShapeMismatch, "matmul");
  int n = tb.shape[1];
  Tensor out({m, n});
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      double x = ta.at(i, p);
      if (x == 0.0) continue;
      for (int j = 0; j < n; ++j) out.at(i, j) += x * tb.at(p, j);
    }
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, b, m, k, n](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& ta2 = t.value(a);
    const Tensor& tb2 = t.value(b);
    t.ensure_grad(a);
    t.ensure_grad(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < k; ++p) {
        double acc = 0.0;
        double aip = ta2.at(i, p);
        for (int j = 0; j < n; ++j) {
          double gij = g.at(i, j);
          acc += gij * tb2.at(p, j);
          gb.at(p, j) += aip * gij;
        }
        ga.at(i, p) += acc;
      }
  });
}

NodeId Tape::matmul_nt(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  int m = ta.shape[0], k = ta.shape[1];
  if (tb.shape[1] != k) throw Error(Err::ShapeMismatch, "matmul_nt");
  int n = tb.shape[0];
  Tensor out({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ta.at(i, p) * tb.at(j, p);
      out.at(i, j) = acc;
    }
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, b, m, k, n](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& ta2 = t.value(a);
    const Tensor& tb2 = t.value(b);
    t.ensure_grad(a);
    t.ensure_grad(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double gij = g.at(i, j);
        if (gij == 0.0) continue;
        for (int p = 0; p < k; ++p) {
          ga.at(i, p) += gij * tb2.at(j, p);
          gb.at(j, p) += gij * ta2.at(i, p);
        }
      }
  });
}

NodeId Tape::outer_rows(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.shape != tb.shape) throw Error(Err::ShapeMismatch, "outer_rows");
  int m = ta.shape[0], k = ta.shape[1];
  Tensor out({m * m, k});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int p = 0; p < k; ++p) out.at(i * m + j, p) = ta.at(i, p) * tb.at(j, p);
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, b, m, k](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& ta2 = t.value(a);
    const Tensor& tb2 = t.value(b);
    t.ensure_grad(a);
    t.ensure_grad(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int p = 0; p < k; ++p) {
          double gij = g.at(i * m + j, p);
          ga.at(i, p) += gij * tb2.at(j, p);
          gb.at(j, p) += gij * ta2.at(i, p);
        }
  });
}

NodeId Tape::sigmoid(NodeId a) {
  Tensor out = value(a);
  for (double& x : out.v) x = 1.0 / (1.0 + std::exp(-x));
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    t.ensure_grad(a);
    for (size_t i = 0; i < g.v.size(); ++i)
      t.grad_mut(a).v[i] += g.v[i] * y.v[i] * (1.0 - y.v[i]);
  });
}

NodeId Tape::tanh_(NodeId a) {
  Tensor out = value(a);
  for (double& x : out.v) x = std::tanh(x);
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    t.ensure_grad(a);
    for (size_t i = 0; i < g.v.size(); ++i)
      t.grad_mut(a).v[i] += g.v[i] * (1.0 - y.v[i] * y.v[i]);
  });
}

NodeId Tape::gelu(NodeId a) {
  Tensor out = value(a);
  for (double& x : out.v) {
    double u = kGeluC * (x + kGeluA * x * x * x);
    x = 0.5 * x * (1.0 + std::tanh(u));
  }
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& x = t.value(a);
    t.ensure_grad(a);
    for (size_t i = 0; i < g.v.size(); ++i) {
      double xi = x.v[i];
      double u = kGeluC * (xi + kGeluA * xi * xi * xi);
      double th = std::tanh(u);
      double du = kGeluC * (1.0 + 3.0 * kGeluA * xi * xi);
      double d = 0.5 * (1.0 + th) + 0.5 * xi * (1.0 - th * th) * du;
      t.grad_mut(a).v[i] += g.v[i] * d;
    }
  });
}

NodeId Tape::softmax_rows(NodeId a) {
  const Tensor& ta = value(a);
  int m = ta.rows(), n = ta.cols();
  Tensor out = ta;
  for (int i = 0; i < m; ++i) {
    double mx = out.at(i, 0);
    for (int j = 1; j < n; ++j) mx = std::max(mx, out.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double e = std::exp(out.at(i, j) - mx);
      out.at(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < n; ++j) out.at(i, j) /= sum;
  }
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, m, n](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    t.ensure_grad(a);
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < m; ++i) {
      double inner = 0.0;
      for (int j = 0; j < n; ++j) inner += g.at(i, j) * y.at(i, j);
      for (int j = 0; j < n; ++j) ga.at(i, j) += y.at(i, j) * (g.at(i, j) - inner);
    }
  });
}

NodeId Tape::layernorm(NodeId x, NodeId gain, NodeId bias, double eps) {
  const Tensor& tx = value(x);
  const Tensor& tg = value(gain);
  const Tensor& tb = value(bias);
  int k = static_cast<int>(tg.size());
  if (tx.size() % static_cast<size_t>(k) != 0 || tb.size() != tg.size())
    throw Error(Err::ShapeMismatch, "layernorm");
  size_t rows = tx.size() / static_cast<size_t>(k);
  Tensor out = tx;
  for (size_t r = 0; r < rows; ++r) {
    double* row = out.v.data() + r * static_cast<size_t>(k);
    double mean = 0.0;
    for (int j = 0; j < k; ++j) mean += row[j];
    mean /= k;
    double var = 0.0;
    for (int j = 0; j < k; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= k;
    double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < k; ++j)
      row[j] = tg.v[static_cast<size_t>(j)] * (row[j] - mean) * inv + tb.v[static_cast<size_t>(j)];
  }
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, x, gain, bias, k, rows, eps](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& tx2 = t.value(x);
    const Tensor& tg2 = t.value(gain);
    t.ensure_grad(x);
    t.ensure_grad(gain);
    t.ensure_grad(bias);
    Tensor& gx = t.grad_mut(x);
    Tensor& gg = t.grad_mut(gain);
    Tensor& gb = t.grad_mut(bias);
    for (size_t r = 0; r < rows; ++r) {
      const double* xr = tx2.v.data() + r * static_cast<size_t>(k);
      const double* gr = g.v.data() + r * static_cast<size_t>(k);
      double* gxr = gx.v.data() + r * static_cast<size_t>(k);
      double mean = 0.0;
      for (int j = 0; j < k; ++j) mean += xr[j];
      mean /= k;
      double var = 0.0;
      for (int j = 0; j < k; ++j) var += (xr[j] - mean) * (xr[j] - mean);
      var /= k;
      double inv = 1.0 / std::sqrt(var + eps);
      double sum_gy = 0.0, sum_gy_xhat = 0.0;
      for (int j = 0; j < k; ++j) {
        double xhat = (xr[j] - mean) * inv;
        double gy = gr[j] * tg2.v[static_cast<size_t>(j)];
        sum_gy += gy;
        sum_gy_xhat += gy * xhat;
        gg.v[static_cast<size_t>(j)] += gr[j] * xhat;
        gb.v[static_cast<size_t>(j)] += gr[j];
      }
      for (int j = 0; j < k; ++j) {
        double xhat = (xr[j] - mean) * inv;
        double gy = gr[j] * tg2.v[static_cast<size_t>(j)];
        gxr[j] += inv * (gy - sum_gy / k - xhat * sum_gy_xhat / k);
      }
    }
  });
}

NodeId Tape::row_sum(NodeId a) {
  const Tensor& ta = value(a);
  int m = ta.rows(), n = ta.cols();
  Tensor out({m});
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += ta.at(i, j);
    out.v[static_cast<size_t>(i)] = acc;
  }
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, m, n](Tape& t) {
    const Tensor& g = t.grad(self);
    t.ensure_grad(a);
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) ga.at(i, j) += g.v[static_cast<size_t>(i)];
  });
}

NodeId Tape::mean_rows(NodeId a) {
  const Tensor& ta = value(a);
  int m = ta.rows(), n = ta.cols();
  Tensor out({n});
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += ta.at(i, j);
    out.v[static_cast<size_t>(j)] = acc / m;
  }
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, m, n](Tape& t) {
    const Tensor& g = t.grad(self);
    t.ensure_grad(a);
    Tensor& ga = t.grad_mut(a);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) ga.at(i, j) += g.v[static_cast<size_t>(j)] / m;
  });
}

NodeId Tape::sum_all(NodeId a) {
  const Tensor& ta = value(a);
  Tensor out({1});
  for (double x : ta.v) out.v[0] += x;
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a](Tape& t) {
    const Tensor& g = t.grad(self);
    t.ensure_grad(a);
    for (double& gi : t.grad_mut(a).v) gi += g.v[0];
  });
}

NodeId Tape::dot(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.size() != tb.size()) throw Error(Err::ShapeMismatch, "dot");
  Tensor out({1});
  for (size_t i = 0; i < ta.size(); ++i) out.v[0] += ta.v[i] * tb.v[i];
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a, b](Tape& t) {
    double g = t.grad(self).v[0];
    const Tensor& ta2 = t.value(a);
    const Tensor& tb2 = t.value(b);
    t.ensure_grad(a);
    t.ensure_grad(b);
    for (size_t i = 0; i < ta2.size(); ++i) {
      t.grad_mut(a).v[i] += g * tb2.v[i];
      t.grad_mut(b).v[i] += g * ta2.v[i];
    }
  });
}

NodeId Tape::reshape(NodeId a, std::vector<int> shape) {
  const Tensor& ta = value(a);
  if (Tensor::count(shape) != ta.size()) throw Error(Err::ShapeMismatch, "reshape");
  Tensor out(shape, ta.v);
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, a](Tape& t) {
    const Tensor& g = t.grad(self);
    t.ensure_grad(a);
    for (size_t i = 0; i < g.v.size(); ++i) t.grad_mut(a).v[i] += g.v[i];
  });
}

NodeId Tape::concat_rows(const std::vector<NodeId>& rows) {
  if (rows.empty()) throw Error(Err::ShapeMismatch, "concat_rows empty");
  int n = static_cast<int>(value(rows[0]).size());
  Tensor out({static_cast<int>(rows.size()), n});
  for (size_t r = 0; r < rows.size(); ++r) {
    const Tensor& tr = value(rows[r]);
    if (static_cast<int>(tr.size()) != n) throw Error(Err::ShapeMismatch, "concat_rows");
    std::copy(tr.v.begin(), tr.v.end(), out.v.begin() + static_cast<long>(r) * n);
  }
  NodeId self = static_cast<NodeId>(nodes_.size());
  return push(std::move(out), [self, rows, n](Tape& t) {
    const Tensor& g = t.grad(self);
    for (size_t r = 0; r < rows.size(); ++r) {
      t.ensure_grad(rows[r]);
      Tensor& gr = t.grad_mut(rows[r]);
      for (int j = 0; j < n; ++j)
        gr.v[static_cast<size_t>(j)] += g.v[r * static_cast<size_t>(n) + static_cast<size_t>(j)];
    }
  });
}

void Tape::backward(NodeId output) {
  Tensor seed({1});
  seed.v[0] = 1.0;
  if (value(output).size() != 1) throw Error(Err::ShapeMismatch, "backward needs scalar output");
  backward({{output, seed}});
}

void Tape::backward(const std::vector<std::pair<NodeId, Tensor>>& seeds) {
  for (const auto& [id, seed] : seeds) {
    ensure_grad(id);
    Tensor& g = grad_mut(id);
    if (seed.v.size() != g.v.size()) throw Error(Err::ShapeMismatch, "backward seed");
    for (size_t i = 0; i < g.v.size(); ++i) g.v[i] += seed.v[i];
  }
  for (NodeId id = static_cast<NodeId>(nodes_.size()) - 1; id >= 0; --id) {
    Node& node = nodes_[static_cast<size_t>(id)];
    if (!node.back) continue;
    if (node.grad.v.empty()) continue;  // not on any path to the outputs
    node.back(*this);
  }
}

NodeId Binder::operator()(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  NodeId id = tape_->leaf(params_->at(name), true);
  ids_[name] = id;
  return id;
}

}  // namespace aura::nn
