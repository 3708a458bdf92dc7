// Copyright 2026 The DualTOD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dualtod/neural/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualtod/error.hpp"
#include "dualtod/rng.hpp"
#include "dualtod/simd/kernels.hpp"

namespace dualtod::nn {
namespace {

constexpr double kLnEps = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

const simd::KernelTable& K() { return simd::kernels(); }

// ---- parameter references ---------------------------------------------------

struct LinearRef {
  std::size_t w = 0, b = 0, in = 0, out = 0;
};
struct NormRef {
  std::size_t g = 0, b = 0, dim = 0;
};
struct AttnRef {
  LinearRef q, k, v, o;
};
struct FfnRef {
  LinearRef up, down;
};
struct EncLayerRef {
  NormRef ln1, ln2;
  AttnRef self;
  FfnRef ffn;
};
struct DecLayerRef {
  NormRef ln1, ln2, ln3;
  AttnRef self, cross;
  FfnRef ffn;
};

// ---- layers -----------------------------------------------------------------

Mat linear_fwd(const double* P, const LinearRef& L, const Mat& x) {
  Mat y(x.rows, L.out);
  for (std::size_t r = 0; r < x.rows; ++r)
    std::copy(P + L.b, P + L.b + L.out, y.row(r));
  K().gemm_nn(x.rows, L.out, L.in, x.data.data(), L.in, P + L.w, L.out,
              y.data.data(), L.out);
  return y;
}

// Returns dx; accumulates dW and db into G.
Mat linear_bwd(const double* P, double* G, const LinearRef& L, const Mat& x,
               const Mat& dy) {
  K().gemm_tn(L.in, L.out, x.rows, x.data.data(), L.in, dy.data.data(), L.out,
              G + L.w, L.out);
  for (std::size_t r = 0; r < dy.rows; ++r) K().axpy(L.out, 1.0, dy.row(r), G + L.b);
  Mat dx(x.rows, L.in);
  K().gemm_nt(x.rows, L.in, L.out, dy.data.data(), L.out, P + L.w, L.out,
              dx.data.data(), L.in);
  return dx;
}

struct NormCache {
  Mat xhat;
  std::vector<double> rstd;
};

Mat norm_fwd(const double* P, const NormRef& N, const Mat& x, NormCache* c) {
  const std::size_t d = N.dim;
  Mat y(x.rows, d);
  Mat xhat(x.rows, d);
  std::vector<double> rstd(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double* xr = x.row(r);
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<double>(d);
    rstd[r] = 1.0 / std::sqrt(var + kLnEps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat.at(r, j) = (xr[j] - mean) * rstd[r];
      y.at(r, j) = xhat.at(r, j) * P[N.g + j] + P[N.b + j];
    }
  }
  if (c) {
    c->xhat = std::move(xhat);
    c->rstd = std::move(rstd);
  }
  return y;
}

Mat norm_bwd(const double* P, double* G, const NormRef& N, const NormCache& c,
             const Mat& dy) {
  const std::size_t d = N.dim;
  const double inv_d = 1.0 / static_cast<double>(d);
  Mat dx(dy.rows, d);
  std::vector<double> dxhat(d);
  for (std::size_t r = 0; r < dy.rows; ++r) {
    const double* dyr = dy.row(r);
    const double* xh = c.xhat.row(r);
    double sum = 0.0, sum_x = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      G[N.g + j] += dyr[j] * xh[j];
      G[N.b + j] += dyr[j];
      dxhat[j] = dyr[j] * P[N.g + j];
      sum += dxhat[j];
      sum_x += dxhat[j] * xh[j];
    }
    for (std::size_t j = 0; j < d; ++j)
      dx.at(r, j) = c.rstd[r] * (dxhat[j] - sum * inv_d - xh[j] * sum_x * inv_d);
  }
  return dx;
}

Mat gelu_fwd(const Mat& x) {
  Mat y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double v = x.data[i];
    y.data[i] = 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
  return y;
}

Mat gelu_bwd(const Mat& x, const Mat& dy) {
  Mat dx(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double v = x.data[i];
    const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
    const double dt = kGeluC * (1.0 + 3.0 * kGeluA * v * v) * (1.0 - t * t);
    dx.data[i] = dy.data[i] * (0.5 * (1.0 + t) + 0.5 * v * dt);
  }
  return dx;
}

void add_inplace(Mat& a, const Mat& b) { K().axpy(a.data.size(), 1.0, b.data.data(), a.data.data()); }

struct AttnCache {
  Mat xq, xkv, q, k, v, ctx;
  std::vector<Mat> probs;
};

Mat attn_fwd(const double* P, const AttnRef& A, std::size_t heads,
             const Mat& xq, const Mat& xkv, bool causal, AttnCache* c) {
  const std::size_t d = A.q.out;
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const std::size_t tq = xq.rows, tk = xkv.rows;
  Mat q = linear_fwd(P, A.q, xq);
  Mat k = linear_fwd(P, A.k, xkv);
  Mat v = linear_fwd(P, A.v, xkv);
  Mat ctx(tq, d);
  std::vector<Mat> probs;
  for (std::size_t h = 0; h < heads; ++h) {
    Mat s(tq, tk);
    K().gemm_nt(tq, tk, dh, q.data.data() + h * dh, d, k.data.data() + h * dh,
                d, s.data.data(), tk);
    for (std::size_t i = 0; i < tq; ++i) {
      double* si = s.row(i);
      const std::size_t visible = causal ? std::min(i + 1, tk) : tk;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < visible; ++j) {
        si[j] *= scale;
        mx = std::max(mx, si[j]);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < visible; ++j) {
        si[j] = std::exp(si[j] - mx);
        z += si[j];
      }
      for (std::size_t j = 0; j < visible; ++j) si[j] /= z;
      for (std::size_t j = visible; j < tk; ++j) si[j] = 0.0;
    }
    K().gemm_nn(tq, dh, tk, s.data.data(), tk, v.data.data() + h * dh, d,
                ctx.data.data() + h * dh, d);
    if (c) probs.push_back(std::move(s));
  }
  Mat out = linear_fwd(P, A.o, ctx);
  if (c) {
    c->xq = xq;
    c->xkv = xkv;
    c->q = std::move(q);
    c->k = std::move(k);
    c->v = std::move(v);
    c->ctx = std::move(ctx);
    c->probs = std::move(probs);
  }
  return out;
}

// Accumulates the input gradients into dxq and dxkv (which may alias).
void attn_bwd(const double* P, double* G, const AttnRef& A, std::size_t heads,
              const AttnCache& c, const Mat& dout, Mat& dxq, Mat& dxkv) {
  const std::size_t d = A.q.out;
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const std::size_t tq = c.xq.rows, tk = c.xkv.rows;
  Mat dctx = linear_bwd(P, G, A.o, c.ctx, dout);
  Mat dq(tq, d), dk(tk, d), dv(tk, d);
  Mat dp(tq, tk);
  for (std::size_t h = 0; h < heads; ++h) {
    const Mat& p = c.probs[h];
    std::fill(dp.data.begin(), dp.data.end(), 0.0);
    K().gemm_nt(tq, tk, dh, dctx.data.data() + h * dh, d,
                c.v.data.data() + h * dh, d, dp.data.data(), tk);
    K().gemm_tn(tk, dh, tq, p.data.data(), tk, dctx.data.data() + h * dh, d,
                dv.data.data() + h * dh, d);
    for (std::size_t i = 0; i < tq; ++i) {
      double* dpi = dp.row(i);
      const double* pi = p.row(i);
      const double rowdot = K().dot(tk, dpi, pi);
      for (std::size_t j = 0; j < tk; ++j) dpi[j] = pi[j] * (dpi[j] - rowdot) * scale;
    }
    K().gemm_nn(tq, dh, tk, dp.data.data(), tk, c.k.data.data() + h * dh, d,
                dq.data.data() + h * dh, d);
    K().gemm_tn(tk, dh, tq, dp.data.data(), tk, c.q.data.data() + h * dh, d,
                dk.data.data() + h * dh, d);
  }
  add_inplace(dxq, linear_bwd(P, G, A.q, c.xq, dq));
  add_inplace(dxkv, linear_bwd(P, G, A.k, c.xkv, dk));
  add_inplace(dxkv, linear_bwd(P, G, A.v, c.xkv, dv));
}

struct FfnCache {
  Mat x, pre, act;
};

Mat ffn_fwd(const double* P, const FfnRef& F, const Mat& x, FfnCache* c) {
  Mat pre = linear_fwd(P, F.up, x);
  Mat act = gelu_fwd(pre);
  Mat out = linear_fwd(P, F.down, act);
  if (c) {
    c->x = x;
    c->pre = std::move(pre);
    c->act = std::move(act);
  }
  return out;
}

Mat ffn_bwd(const double* P, double* G, const FfnRef& F, const FfnCache& c,
            const Mat& dout) {
  Mat dact = linear_bwd(P, G, F.down, c.act, dout);
  Mat dpre = gelu_bwd(c.pre, dact);
  return linear_bwd(P, G, F.up, c.x, dpre);
}

struct EncLayerCache {
  NormCache n1, n2;
  AttnCache self;
  FfnCache ffn;
};

struct DecLayerCache {
  NormCache n1, n2, n3;
  AttnCache self, cross;
  FfnCache ffn;
};

}  // namespace

// ---- layout -------------------------------------------------------------------

namespace {

struct Layout {
  std::size_t embed = 0;
  std::vector<EncLayerRef> enc;
  NormRef enc_norm;
  std::vector<DecLayerRef> dec;
  NormRef dec_norm;
  LinearRef out;
};

struct Builder {
  std::vector<ParamBlock>& blocks;
  std::size_t next = 0;

  std::size_t add(const std::string& name, std::size_t rows, std::size_t cols,
                  bool decay) {
    blocks.push_back({name, next, rows, cols, decay});
    next += rows * cols;
    return blocks.back().offset;
  }
  LinearRef linear(const std::string& name, std::size_t in, std::size_t out) {
    LinearRef r;
    r.in = in;
    r.out = out;
    r.w = add(name + ".w", in, out, true);
    r.b = add(name + ".b", 1, out, false);
    return r;
  }
  NormRef norm(const std::string& name, std::size_t dim) {
    NormRef r;
    r.dim = dim;
    r.g = add(name + ".g", 1, dim, false);
    r.b = add(name + ".b", 1, dim, false);
    return r;
  }
  AttnRef attn(const std::string& name, std::size_t d) {
    return {linear(name + ".q", d, d), linear(name + ".k", d, d),
            linear(name + ".v", d, d), linear(name + ".o", d, d)};
  }
  FfnRef ffn(const std::string& name, std::size_t d, std::size_t ff) {
    return {linear(name + ".up", d, ff), linear(name + ".down", ff, d)};
  }
};

// The layout is rebuilt from the config on demand; it is cheap and keeps the
// model a plain value type.
Layout make_layout(const ModelConfig& cfg, std::vector<ParamBlock>& blocks,
                   std::size_t* total) {
  blocks.clear();
  Builder b{blocks};
  Layout L;
  const std::size_t d = cfg.d_model;
  L.embed = b.add("embed", cfg.vocab_size, d, false);
  const bool use_encoder = cfg.dec_layers > 0;
  if (use_encoder) {
    for (std::size_t l = 0; l < cfg.enc_layers; ++l) {
      const std::string p = "enc" + std::to_string(l);
      EncLayerRef r;
      r.ln1 = b.norm(p + ".ln1", d);
      r.self = b.attn(p + ".self", d);
      r.ln2 = b.norm(p + ".ln2", d);
      r.ffn = b.ffn(p + ".ffn", d, cfg.d_ff);
      L.enc.push_back(r);
    }
    if (cfg.final_norm) L.enc_norm = b.norm("enc.norm", d);
  }
  for (std::size_t l = 0; l < cfg.dec_layers; ++l) {
    const std::string p = "dec" + std::to_string(l);
    DecLayerRef r;
    r.ln1 = b.norm(p + ".ln1", d);
    r.self = b.attn(p + ".self", d);
    r.ln2 = b.norm(p + ".ln2", d);
    r.cross = b.attn(p + ".cross", d);
    r.ln3 = b.norm(p + ".ln3", d);
    r.ffn = b.ffn(p + ".ffn", d, cfg.d_ff);
    L.dec.push_back(r);
  }
  if (cfg.final_norm) L.dec_norm = b.norm("dec.norm", d);
  L.out = b.linear("out", d, cfg.vocab_size);
  *total = b.next;
  return L;
}

}  // namespace

Seq2SeqModel::Seq2SeqModel(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  std::size_t total = 0;
  make_layout(cfg_, blocks_, &total);
  params_.assign(total, 0.0);
  positions_ = Mat(cfg_.max_positions, cfg_.d_model);
  for (std::size_t pos = 0; pos < cfg_.max_positions; ++pos) {
    for (std::size_t i = 0; i + 1 < cfg_.d_model + 1; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) /
                                                static_cast<double>(cfg_.d_model));
      positions_.at(pos, i) = std::sin(static_cast<double>(pos) * freq);
      if (i + 1 < cfg_.d_model)
        positions_.at(pos, i + 1) = std::cos(static_cast<double>(pos) * freq);
    }
  }
  initialize();
}

void Seq2SeqModel::initialize() {
  Rng rng(cfg_.init_seed);
  for (const ParamBlock& blk : blocks_) {
    double* p = params_.data() + blk.offset;
    const std::string& n = blk.name;
    const bool is_gain = n.size() > 2 && n.compare(n.size() - 2, 2, ".g") == 0;
    if (is_gain) {
      std::fill(p, p + blk.size(), 1.0);
    } else if (!blk.decay && n != "embed") {
      std::fill(p, p + blk.size(), 0.0);  // biases and norm shifts
    } else if (n == "out.w" && cfg_.zero_init_output) {
      std::fill(p, p + blk.size(), 0.0);
    } else {
      // Scaled uniform by fan-in; embeddings use unit variance.
      const double a = n == "embed" ? std::sqrt(3.0)
                                    : 1.0 / std::sqrt(static_cast<double>(blk.rows));
      for (std::size_t i = 0; i < blk.size(); ++i)
        p[i] = (2.0 * rng.uniform() - 1.0) * a;
    }
  }
}

const ParamBlock& Seq2SeqModel::block(const std::string& name) const {
  for (const auto& b : blocks_)
    if (b.name == name) return b;
  throw PreconditionError("no parameter block " + name);
}

// ---- forward / backward -------------------------------------------------------

namespace {

Mat embed(const double* P, std::size_t embed_off, const Mat& positions,
          std::span<const TokenId> ids, std::size_t d) {
  Mat x(ids.size(), d);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const double* e = P + embed_off + static_cast<std::size_t>(ids[t]) * d;
    const double* pe = positions.row(t);
    double* xr = x.row(t);
    for (std::size_t j = 0; j < d; ++j) xr[j] = e[j] + pe[j];
  }
  return x;
}

void embed_bwd(double* G, std::size_t embed_off, std::span<const TokenId> ids,
               const Mat& dx, std::size_t d) {
  for (std::size_t t = 0; t < ids.size(); ++t)
    K().axpy(d, 1.0, dx.row(t), G + embed_off + static_cast<std::size_t>(ids[t]) * d);
}

}  // namespace

SequenceStats Seq2SeqModel::forward_backward(std::span<const TokenId> src,
                                             std::span<const TokenId> tgt,
                                             double* grad,
                                             double grad_scale) const {
  SequenceStats stats;
  if (tgt.empty()) return stats;
  const std::size_t d = cfg_.d_model;
  const std::size_t V = cfg_.vocab_size;
  if (src.size() > cfg_.max_positions || tgt.size() > cfg_.max_positions)
    throw PreconditionError("sequence longer than max_positions");
  for (TokenId id : src)
    if (id < 0 || static_cast<std::size_t>(id) >= V)
      throw PreconditionError("source id out of vocabulary range");
  for (TokenId id : tgt)
    if (id < 0 || static_cast<std::size_t>(id) >= V)
      throw PreconditionError("target id out of vocabulary range");

  std::vector<ParamBlock> scratch;
  std::size_t total = 0;
  const Layout L = make_layout(cfg_, scratch, &total);
  const double* P = params_.data();
  const bool want_grad = grad != nullptr;

  // Encoder.
  Mat memory;
  std::vector<EncLayerCache> enc_caches(L.enc.size());
  NormCache enc_norm_cache;
  const bool use_encoder = !L.dec.empty() && !src.empty();
  if (use_encoder) {
    Mat x = embed(P, L.embed, positions_, src, d);
    for (std::size_t l = 0; l < L.enc.size(); ++l) {
      const EncLayerRef& r = L.enc[l];
      EncLayerCache* c = want_grad ? &enc_caches[l] : nullptr;
      Mat a = norm_fwd(P, r.ln1, x, c ? &c->n1 : nullptr);
      add_inplace(x, attn_fwd(P, r.self, cfg_.n_heads, a, a, false,
                              c ? &c->self : nullptr));
      Mat b = norm_fwd(P, r.ln2, x, c ? &c->n2 : nullptr);
      add_inplace(x, ffn_fwd(P, r.ffn, b, c ? &c->ffn : nullptr));
    }
    memory = cfg_.final_norm
                 ? norm_fwd(P, L.enc_norm, x, want_grad ? &enc_norm_cache : nullptr)
                 : std::move(x);
  } else {
    memory = Mat(0, d);
  }

  // Decoder input: <pad> followed by the target shifted right.
  std::vector<TokenId> dec_in(tgt.size());
  dec_in[0] = Vocab::kPad;
  for (std::size_t t = 1; t < tgt.size(); ++t) dec_in[t] = tgt[t - 1];

  Mat y = embed(P, L.embed, positions_, dec_in, d);
  std::vector<DecLayerCache> dec_caches(L.dec.size());
  for (std::size_t l = 0; l < L.dec.size(); ++l) {
    const DecLayerRef& r = L.dec[l];
    DecLayerCache* c = want_grad ? &dec_caches[l] : nullptr;
    Mat a = norm_fwd(P, r.ln1, y, c ? &c->n1 : nullptr);
    add_inplace(y, attn_fwd(P, r.self, cfg_.n_heads, a, a, true,
                            c ? &c->self : nullptr));
    if (memory.rows > 0) {
      Mat b = norm_fwd(P, r.ln2, y, c ? &c->n2 : nullptr);
      add_inplace(y, attn_fwd(P, r.cross, cfg_.n_heads, b, memory, false,
                              c ? &c->cross : nullptr));
    }
    Mat f = norm_fwd(P, r.ln3, y, c ? &c->n3 : nullptr);
    add_inplace(y, ffn_fwd(P, r.ffn, f, c ? &c->ffn : nullptr));
  }
  NormCache dec_norm_cache;
  Mat yf = cfg_.final_norm
               ? norm_fwd(P, L.dec_norm, y, want_grad ? &dec_norm_cache : nullptr)
               : y;
  Mat logits = linear_fwd(P, L.out, yf);

  // Log-softmax loss; logits become d(loss)/d(logits) in place.
  for (std::size_t t = 0; t < tgt.size(); ++t) {
    double* z = logits.row(t);
    const std::size_t gold = static_cast<std::size_t>(tgt[t]);
    double mx = z[0];
    std::size_t arg = 0;
    for (std::size_t j = 1; j < V; ++j) {
      if (z[j] > mx) {
        mx = z[j];
        arg = j;
      }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < V; ++j) sum += std::exp(z[j] - mx);
    const double lse = mx + std::log(sum);
    stats.nll_sum += lse - z[gold];
    stats.tokens += 1;
    if (arg == gold) stats.correct += 1;
    if (want_grad) {
      for (std::size_t j = 0; j < V; ++j) z[j] = std::exp(z[j] - lse) * grad_scale;
      z[gold] -= grad_scale;
    }
  }
  if (!want_grad) return stats;

  double* G = grad;
  Mat dyf = linear_bwd(P, G, L.out, yf, logits);
  Mat dy = cfg_.final_norm ? norm_bwd(P, G, L.dec_norm, dec_norm_cache, dyf)
                           : std::move(dyf);
  Mat dmem(memory.rows, d);
  for (std::size_t l = L.dec.size(); l-- > 0;) {
    const DecLayerRef& r = L.dec[l];
    const DecLayerCache& c = dec_caches[l];
    add_inplace(dy, norm_bwd(P, G, r.ln3, c.n3, ffn_bwd(P, G, r.ffn, c.ffn, dy)));
    if (memory.rows > 0) {
      Mat db(dy.rows, d);
      attn_bwd(P, G, r.cross, cfg_.n_heads, c.cross, dy, db, dmem);
      add_inplace(dy, norm_bwd(P, G, r.ln2, c.n2, db));
    }
    Mat da(dy.rows, d);
    attn_bwd(P, G, r.self, cfg_.n_heads, c.self, dy, da, da);
    add_inplace(dy, norm_bwd(P, G, r.ln1, c.n1, da));
  }
  embed_bwd(G, L.embed, dec_in, dy, d);

  if (use_encoder) {
    Mat dx = cfg_.final_norm ? norm_bwd(P, G, L.enc_norm, enc_norm_cache, dmem)
                             : std::move(dmem);
    for (std::size_t l = L.enc.size(); l-- > 0;) {
      const EncLayerRef& r = L.enc[l];
      const EncLayerCache& c = enc_caches[l];
      add_inplace(dx, norm_bwd(P, G, r.ln2, c.n2, ffn_bwd(P, G, r.ffn, c.ffn, dx)));
      Mat da(dx.rows, d);
      attn_bwd(P, G, r.self, cfg_.n_heads, c.self, dx, da, da);
      add_inplace(dx, norm_bwd(P, G, r.ln1, c.n1, da));
    }
    embed_bwd(G, L.embed, src, dx, d);
  }
  return stats;
}

Seq2SeqModel::Encoded Seq2SeqModel::encode(std::span<const TokenId> src) const {
  Encoded e;
  const std::size_t d = cfg_.d_model;
  if (cfg_.dec_layers == 0 || src.empty()) {
    e.memory = Mat(0, d);
    return e;
  }
  std::vector<ParamBlock> scratch;
  std::size_t total = 0;
  const Layout L = make_layout(cfg_, scratch, &total);
  const double* P = params_.data();
  std::size_t n = std::min(src.size(), cfg_.max_positions);
  Mat x = embed(P, L.embed, positions_, src.first(n), d);
  for (const EncLayerRef& r : L.enc) {
    Mat a = norm_fwd(P, r.ln1, x, nullptr);
    add_inplace(x, attn_fwd(P, r.self, cfg_.n_heads, a, a, false, nullptr));
    Mat b = norm_fwd(P, r.ln2, x, nullptr);
    add_inplace(x, ffn_fwd(P, r.ffn, b, nullptr));
  }
  e.memory = cfg_.final_norm ? norm_fwd(P, L.enc_norm, x, nullptr) : std::move(x);
  return e;
}

std::vector<double> Seq2SeqModel::next_log_probs(
    const Encoded& enc, std::span<const TokenId> prefix) const {
  const std::size_t d = cfg_.d_model;
  const std::size_t V = cfg_.vocab_size;
  if (prefix.empty() || prefix.size() > cfg_.max_positions)
    throw PreconditionError("decoder prefix must hold 1..max_positions ids");
  std::vector<ParamBlock> scratch;
  std::size_t total = 0;
  const Layout L = make_layout(cfg_, scratch, &total);
  const double* P = params_.data();

  Mat y = embed(P, L.embed, positions_, prefix, d);
  for (const DecLayerRef& r : L.dec) {
    Mat a = norm_fwd(P, r.ln1, y, nullptr);
    add_inplace(y, attn_fwd(P, r.self, cfg_.n_heads, a, a, true, nullptr));
    if (enc.memory.rows > 0) {
      Mat b = norm_fwd(P, r.ln2, y, nullptr);
      add_inplace(y, attn_fwd(P, r.cross, cfg_.n_heads, b, enc.memory, false, nullptr));
    }
    Mat f = norm_fwd(P, r.ln3, y, nullptr);
    add_inplace(y, ffn_fwd(P, r.ffn, f, nullptr));
  }
  Mat last(1, d);
  std::copy(y.row(y.rows - 1), y.row(y.rows - 1) + d, last.row(0));
  if (cfg_.final_norm) last = norm_fwd(P, L.dec_norm, last, nullptr);
  Mat logits = linear_fwd(P, L.out, last);
  std::vector<double> out(logits.row(0), logits.row(0) + V);
  const double mx = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double z : out) sum += std::exp(z - mx);
  const double lse = mx + std::log(sum);
  for (double& z : out) z -= lse;
  return out;
}

// ---- batch-level API ----------------------------------------------------------

SequenceStats batch_stats(const Seq2SeqModel& model, const Batch& batch) {
  SequenceStats total;
  for (std::size_t r = 0; r < batch.rows; ++r)
    total += model.forward_backward(batch.source(r), batch.target(r), nullptr, 0.0);
  return total;
}

double nll(const Seq2SeqModel& model, const Batch& batch) {
  SequenceStats s = batch_stats(model, batch);
  return s.tokens == 0 ? 0.0 : s.nll_sum / static_cast<double>(s.tokens);
}

SequenceStats accumulate_grads(const Seq2SeqModel& model, const Batch& batch,
                               double scale, std::vector<double>& out) {
  if (out.size() != model.num_params())
    throw PreconditionError("gradient buffer does not match the model");
  const std::size_t n = batch.target_tokens();
  SequenceStats total;
  if (n == 0) return total;
  const double per_token = scale / static_cast<double>(n);
  for (std::size_t r = 0; r < batch.rows; ++r)
    total += model.forward_backward(batch.source(r), batch.target(r), out.data(),
                                    per_token);
  return total;
}

Gradients grads(const Seq2SeqModel& model, const Batch& batch) {
  Gradients g;
  g.values.assign(model.num_params(), 0.0);
  g.stats = accumulate_grads(model, batch, 1.0, g.values);
  g.loss = g.stats.tokens == 0
               ? 0.0
               : g.stats.nll_sum / static_cast<double>(g.stats.tokens);
  check_finite(model, g.values, "gradient");
  return g;
}

void check_finite(const Seq2SeqModel& model, std::span<const double> values,
                  const char* what) {
  for (const ParamBlock& b : model.blocks()) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!std::isfinite(values[b.offset + i]))
        throw NumericError(std::string("non-finite ") + what + " in block " +
                           b.name);
    }
  }
}

// ---- config -------------------------------------------------------------------

OrderedJson ModelConfig::to_json() const {
  return {{"vocab_size", vocab_size},     {"d_model", d_model},
          {"n_heads", n_heads},           {"d_ff", d_ff},
          {"enc_layers", enc_layers},     {"dec_layers", dec_layers},
          {"max_positions", max_positions}, {"final_norm", final_norm},
          {"zero_init_output", zero_init_output}, {"init_seed", init_seed}};
}

ModelConfig ModelConfig::from_json(const Json& j) {
  ModelConfig c;
  try {
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.d_model = j.value("d_model", c.d_model);
    c.n_heads = j.value("n_heads", c.n_heads);
    c.d_ff = j.value("d_ff", c.d_ff);
    c.enc_layers = j.value("enc_layers", c.enc_layers);
    c.dec_layers = j.value("dec_layers", c.dec_layers);
    c.max_positions = j.value("max_positions", c.max_positions);
    c.final_norm = j.value("final_norm", c.final_norm);
    c.zero_init_output = j.value("zero_init_output", c.zero_init_output);
    c.init_seed = j.value("init_seed", c.init_seed);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return c;
}

void ModelConfig::validate() const {
  if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2");
  if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0)
    throw ConfigError("d_model must be a positive multiple of n_heads");
  if (d_ff == 0) throw ConfigError("d_ff must be positive");
  if (max_positions == 0) throw ConfigError("max_positions must be positive");
}

}  // namespace dualtod::nn
