#include "rad/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "rad/error.hpp"

namespace rad::nn {

namespace {

// Forward-value staging buffer; record() copies out of it immediately.
std::vector<double>& staging(std::size_t n) {
  thread_local std::vector<double> buf;
  buf.assign(n, 0.0);
  return buf;
}

void require_same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw ShapeError("operands live on different tapes");
}

void require_vector(Var x, const char* op) {
  if (x.shape().size() != 1) {
    throw ShapeError(std::string(op) + " expects a vector, got " + shape_string(x.shape()));
  }
}

void require_matrix(Var x, const char* op) {
  if (x.shape().size() != 2) {
    throw ShapeError(std::string(op) + " expects a matrix, got " + shape_string(x.shape()));
  }
}

}  // namespace

double stable_sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var embedding_lookup(Tape& tape, Parameter& table, std::uint32_t index) {
  if (table.value.rank() != 2) {
    throw ShapeError("embedding table '" + table.name + "' must be a matrix, got " +
                     shape_string(table.value.shape));
  }
  const auto rows = table.value.shape[0];
  if (index >= rows) {
    throw LookupError("index " + std::to_string(index) + " out of range for table '" +
                      table.name + "' with " + std::to_string(rows) + " rows");
  }
  Parameter* p = &table;
  const auto dim = table.value.shape[1];
  return tape.record({dim}, table.value.row(index), [p, index](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    auto row = p->grad.row(index);
    for (std::size_t e = 0; e < g.size(); ++e) row[e] += g[e];
  });
}

Var linear(Var x, Parameter& weight, Parameter& bias) {
  require_vector(x, "linear");
  const auto& ws = weight.value.shape;
  const auto n = x.size();
  if (ws.size() != 2 || ws[1] != n || bias.value.shape != Shape{ws.size() == 2 ? ws[0] : 0}) {
    throw ShapeError("linear: weight " + shape_string(ws) + ", bias " +
                     shape_string(bias.value.shape) + " incompatible with input " +
                     shape_string(x.shape()));
  }
  const auto m = ws[0];
  const auto xv = x.value();
  auto& out = staging(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* w = weight.value.data.data() + i * n;
    double acc = bias.value.data[i];
    for (std::size_t j = 0; j < n; ++j) acc += w[j] * xv[j];
    out[i] = acc;
  }
  Parameter* wp = &weight;
  Parameter* bp = &bias;
  const auto xid = x.id();
  return x.tape().record({m}, out, [wp, bp, xid, m, n](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    const auto xv = t.value(xid);
    auto gx = t.grad(xid);
    const double* w = wp->value.data.data();
    double* gw = wp->grad.data.data();
    for (std::size_t i = 0; i < m; ++i) {
      const double gi = g[i];
      if (gi == 0.0) continue;
      bp->grad.data[i] += gi;
      for (std::size_t j = 0; j < n; ++j) {
        gw[i * n + j] += gi * xv[j];
        gx[j] += gi * w[i * n + j];
      }
    }
  });
}

Var sigmoid(Var x) {
  const auto xv = x.value();
  auto& out = staging(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = stable_sigmoid(xv[i]);
  const auto xid = x.id();
  return x.tape().record(x.shape(), out, [xid](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    const auto y = t.value(self);
    auto gx = t.grad(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var relu(Var x) {
  const auto xv = x.value();
  auto& out = staging(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  const auto xid = x.id();
  return x.tape().record(x.shape(), out, [xid](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    const auto xv = t.value(xid);
    auto gx = t.grad(xid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw ShapeError("add: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  const auto av = a.value();
  const auto bv = b.value();
  auto& out = staging(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  const auto aid = a.id();
  const auto bid = b.id();
  return a.tape().record(a.shape(), out, [aid, bid](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    auto ga = t.grad(aid);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto gb = t.grad(bid);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Var scale(Var x, double factor) {
  const auto xv = x.value();
  auto& out = staging(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * factor;
  const auto xid = x.id();
  return x.tape().record(x.shape(), out, [xid, factor](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    auto gx = t.grad(xid);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  });
}

Var sum(Var x) {
  double acc = 0.0;
  for (double v : x.value()) acc += v;
  const auto xid = x.id();
  return x.tape().record({1}, std::span<const double>(&acc, 1), [xid](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    for (auto& gx : t.grad(xid)) gx += g;
  });
}

Var mean(std::span<const Var> xs) {
  if (xs.empty()) throw ArityError("mean of zero inputs");
  const auto& shape = xs[0].shape();
  auto& out = staging(xs[0].size());
  std::vector<std::uint32_t> ids;
  ids.reserve(xs.size());
  for (const auto& x : xs) {
    require_same_tape(xs[0], x);
    if (x.shape() != shape) {
      throw ShapeError("mean: " + shape_string(shape) + " vs " + shape_string(x.shape()));
    }
    const auto v = x.value();
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
    ids.push_back(x.id());
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (auto& v : out) v *= inv;
  return xs[0].tape().record(shape, out, [ids = std::move(ids), inv](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    for (auto id : ids) {
      auto gx = t.grad(id);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * inv;
    }
  });
}

namespace {

Var join(std::span<const Var> xs, Shape shape) {
  std::size_t total = 0;
  for (const auto& x : xs) total += x.size();
  auto& out = staging(total);
  std::vector<std::uint32_t> ids;
  ids.reserve(xs.size());
  std::size_t off = 0;
  for (const auto& x : xs) {
    require_same_tape(xs[0], x);
    const auto v = x.value();
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
    off += v.size();
    ids.push_back(x.id());
  }
  return xs[0].tape().record(std::move(shape), out, [ids = std::move(ids)](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    std::size_t off = 0;
    for (auto id : ids) {
      auto gx = t.grad(id);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[off + i];
      off += gx.size();
    }
  });
}

}  // namespace

Var concat(std::span<const Var> xs) {
  if (xs.empty()) throw ArityError("concat of zero inputs");
  std::size_t total = 0;
  for (const auto& x : xs) total += x.size();
  return join(xs, {total});
}

Var stack(std::span<const Var> rows) {
  if (rows.empty()) throw ArityError("stack of zero rows");
  const auto dim = rows[0].size();
  for (const auto& r : rows) {
    require_vector(r, "stack");
    if (r.size() != dim) {
      throw ShapeError("stack: row lengths " + std::to_string(dim) + " and " +
                       std::to_string(r.size()));
    }
  }
  return join(rows, {rows.size(), dim});
}

Var attention_scores(Var query, Var keys, Parameter& weight) {
  require_same_tape(query, keys);
  require_vector(query, "attention");
  require_matrix(keys, "attention");
  const auto e = query.size();
  const auto k = keys.shape()[0];
  if (keys.shape()[1] != e || weight.value.shape != Shape{e, e}) {
    throw ShapeError("attention: query " + shape_string(query.shape()) + ", keys " +
                     shape_string(keys.shape()) + ", W " + shape_string(weight.value.shape));
  }
  const auto q = query.value();
  const auto kv = keys.value();
  const auto& w = weight.value.data;
  std::vector<double> wq(e, 0.0);
  for (std::size_t i = 0; i < e; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < e; ++j) acc += w[i * e + j] * q[j];
    wq[i] = acc;
  }
  auto& out = staging(k);
  for (std::size_t r = 0; r < k; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < e; ++i) acc += kv[r * e + i] * wq[i];
    out[r] = acc;
  }
  Parameter* wp = &weight;
  const auto qid = query.id();
  const auto kid = keys.id();
  return query.tape().record(
      {k}, out, [wp, qid, kid, e, k, wq = std::move(wq)](Tape& t, std::uint32_t self) {
        const auto g = t.grad(self);
        const auto q = t.value(qid);
        const auto kv = t.value(kid);
        // u = sum_k g_k keys[k]  (gradient w.r.t. W q)
        std::vector<double> u(e, 0.0);
        auto gk = t.grad(kid);
        for (std::size_t r = 0; r < k; ++r) {
          for (std::size_t i = 0; i < e; ++i) {
            gk[r * e + i] += g[r] * wq[i];
            u[i] += g[r] * kv[r * e + i];
          }
        }
        const auto& w = wp->value.data;
        auto& gw = wp->grad.data;
        auto gq = t.grad(qid);
        for (std::size_t i = 0; i < e; ++i) {
          for (std::size_t j = 0; j < e; ++j) {
            gw[i * e + j] += u[i] * q[j];
            gq[j] += w[i * e + j] * u[i];
          }
        }
      });
}

Var softmax(Var scores) {
  require_vector(scores, "softmax");
  const auto s = scores.value();
  const double mx = *std::ranges::max_element(s);
  auto& out = staging(s.size());
  double z = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = std::exp(s[i] - mx);
    z += out[i];
  }
  for (auto& v : out) v /= z;
  const auto sid = scores.id();
  return scores.tape().record(scores.shape(), out, [sid](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    const auto a = t.value(self);
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += a[i] * g[i];
    auto gs = t.grad(sid);
    for (std::size_t i = 0; i < g.size(); ++i) gs[i] += a[i] * (g[i] - dot);
  });
}

Var weighted_sum(Var weights, Var rows) {
  require_same_tape(weights, rows);
  require_vector(weights, "weighted_sum");
  require_matrix(rows, "weighted_sum");
  const auto k = rows.shape()[0];
  const auto e = rows.shape()[1];
  if (weights.size() != k) {
    throw ShapeError("weighted_sum: weights " + shape_string(weights.shape()) + ", rows " +
                     shape_string(rows.shape()));
  }
  const auto a = weights.value();
  const auto x = rows.value();
  auto& out = staging(e);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t i = 0; i < e; ++i) out[i] += a[r] * x[r * e + i];
  }
  const auto aid = weights.id();
  const auto xid = rows.id();
  return weights.tape().record({e}, out, [aid, xid, k, e](Tape& t, std::uint32_t self) {
    const auto g = t.grad(self);
    const auto a = t.value(aid);
    const auto x = t.value(xid);
    auto ga = t.grad(aid);
    auto gx = t.grad(xid);
    for (std::size_t r = 0; r < k; ++r) {
      double dot = 0.0;
      for (std::size_t i = 0; i < e; ++i) {
        dot += g[i] * x[r * e + i];
        gx[r * e + i] += a[r] * g[i];
      }
      ga[r] += dot;
    }
  });
}

AttentionOutput attention_pool(Var query, Var keys, Parameter& weight) {
  if (keys.shape().size() == 2 && keys.shape()[0] == 0) {
    throw EmptyRetrievalError("attention over an empty retrieved set");
  }
  auto alpha = softmax(attention_scores(query, keys, weight));
  return {alpha, weighted_sum(alpha, keys)};
}

Var fm_second_order(Var fields, FmReduce reduce) {
  require_matrix(fields, "fm_second_order");
  const auto f = fields.shape()[0];
  const auto e = fields.shape()[1];
  if (f < 2) throw ArityError("fm_second_order needs at least 2 fields, got " + std::to_string(f));
  const auto v = fields.value();
  std::vector<double> total(e, 0.0);
  std::vector<double> squares(e, 0.0);
  for (std::size_t r = 0; r < f; ++r) {
    for (std::size_t i = 0; i < e; ++i) {
      total[i] += v[r * e + i];
      squares[i] += v[r * e + i] * v[r * e + i];
    }
  }
  const auto out_size = reduce == FmReduce::kVector ? e : std::size_t{1};
  auto& out = staging(out_size);
  for (std::size_t i = 0; i < e; ++i) {
    const double pair = 0.5 * (total[i] * total[i] - squares[i]);
    if (reduce == FmReduce::kVector) {
      out[i] = pair;
    } else {
      out[0] += pair;
    }
  }
  const auto fid = fields.id();
  return fields.tape().record(
      {out_size}, out,
      [fid, f, e, reduce, total = std::move(total)](Tape& t, std::uint32_t self) {
        const auto g = t.grad(self);
        const auto v = t.value(fid);
        auto gv = t.grad(fid);
        for (std::size_t r = 0; r < f; ++r) {
          for (std::size_t i = 0; i < e; ++i) {
            const double gi = reduce == FmReduce::kVector ? g[i] : g[0];
            gv[r * e + i] += gi * (total[i] - v[r * e + i]);
          }
        }
      });
}

double bce_value(double probability, double label) noexcept {
  const double p = std::clamp(probability, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

Var bce(Var probability, double label) {
  const double raw = probability.item();
  const double loss = bce_value(raw, label);
  const auto pid = probability.id();
  return probability.tape().record(
      {1}, std::span<const double>(&loss, 1), [pid, label](Tape& t, std::uint32_t self) {
        const double g = t.grad(self)[0];
        const double p =
            std::clamp(t.value(pid)[0], kProbabilityClamp, 1.0 - kProbabilityClamp);
        t.grad(pid)[0] += g * (-label / p + (1.0 - label) / (1.0 - p));
      });
}

Var mse(Var a, Var b) {
  require_same_tape(a, b);
  if (a.size() != b.size()) {
    throw ShapeError("mse: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  const auto av = a.value();
  const auto bv = b.value();
  const auto n = static_cast<double>(av.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    acc += d * d;
  }
  const double loss = acc / n;
  const auto aid = a.id();
  const auto bid = b.id();
  return a.tape().record({1}, std::span<const double>(&loss, 1), [aid, bid, n](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    const auto av = t.value(aid);
    const auto bv = t.value(bid);
    auto ga = t.grad(aid);
    auto gb = t.grad(bid);
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double d = 2.0 * (av[i] - bv[i]) / n * g;
      ga[i] += d;
      gb[i] -= d;
    }
  });
}

}  // namespace rad::nn
