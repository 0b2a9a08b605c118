#include "fedctr/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace fedctr::nn {

namespace {

Matrix extract_cols(const Matrix& m, std::size_t c0, std::size_t width) {
  Matrix out(m.rows(), width);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* src = m.data() + i * m.cols() + c0;
    double* dst = out.data() + i * width;
    for (std::size_t j = 0; j < width; ++j) dst[j] = src[j];
  }
  return out;
}

void add_into_cols(Matrix& dst, const Matrix& src, std::size_t c0) {
  for (std::size_t i = 0; i < src.rows(); ++i) {
    double* d = dst.data() + i * dst.cols() + c0;
    const double* s = src.data() + i * src.cols();
    for (std::size_t j = 0; j < src.cols(); ++j) d[j] += s[j];
  }
}

}  // namespace

double activate(Activation act, double z) {
  switch (act) {
    case Activation::kIdentity: return z;
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kTanh: return std::tanh(z);
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

double activate_deriv(Activation act, double z) {
  switch (act) {
    case Activation::kIdentity: return 1.0;
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

void init_embedding(Matrix& m, Rng& rng) {
  for (double& v : m.storage()) v = rng.uniform(-0.1, 0.1);
}

void init_xavier(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : m.storage()) v = rng.uniform(-limit, limit);
}

LayerParams make_embedding(std::string name, std::size_t rows, std::size_t dim, Rng& rng) {
  LayerParams p(LayerKind::kEmbedding, std::move(name));
  Matrix table(rows, dim);
  init_embedding(table, rng);
  p.add("table", std::move(table));
  return p;
}

LayerParams make_position_embedding(std::string name, std::size_t max_len, std::size_t dim, Rng& rng) {
  LayerParams p(LayerKind::kPositionEmbedding, std::move(name));
  Matrix table(max_len, dim);
  init_embedding(table, rng);
  p.add("table", std::move(table));
  return p;
}

LayerParams make_dense(std::string name, std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  LayerParams p(LayerKind::kDense, std::move(name));
  Matrix w(in_dim, out_dim);
  init_xavier(w, in_dim, out_dim, rng);
  p.add("weight", std::move(w));
  p.add("bias", Matrix(1, out_dim));
  return p;
}

LayerParams make_self_attention(std::string name, std::size_t in_dim, std::size_t heads,
                                std::size_t head_dim, Rng& rng) {
  if (heads == 0 || head_dim == 0) throw std::invalid_argument("self-attention: zero heads/head_dim");
  LayerParams p(LayerKind::kSelfAttention, std::move(name));
  const std::size_t out = heads * head_dim;
  for (const char* nm : {"wq", "wk", "wv"}) {
    Matrix w(in_dim, out);
    init_xavier(w, in_dim, out, rng);
    p.add(nm, std::move(w));
  }
  // head geometry rides along as a constant block
  Matrix geom(1, 2);
  geom(0, 0) = static_cast<double>(heads);
  geom(0, 1) = static_cast<double>(head_dim);
  p.add("geometry", std::move(geom), /*trainable=*/false);
  return p;
}

LayerParams make_attentive_pooling(std::string name, std::size_t dim, std::size_t hidden, Rng& rng) {
  if (hidden == 0) hidden = dim;
  LayerParams p(LayerKind::kAttentivePooling, std::move(name));
  Matrix w(hidden, dim);
  init_xavier(w, dim, hidden, rng);
  p.add("proj", std::move(w));
  p.add("bias", Matrix(1, hidden));
  Matrix q(1, hidden);
  init_xavier(q, hidden, 1, rng);
  p.add("query", std::move(q));
  return p;
}

// --- Embedding lookup ------------------------------------------------------

Matrix embed_lookup(LayerParams& table, std::span<const TokenId> ids, Tape& tape) {
  const Matrix& t = table.value("table");
  Matrix out(ids.size(), t.cols());
  Matrix id_row(1, ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= t.rows()) {
      throw std::invalid_argument("embed_lookup(" + table.name() + "): token id " +
                                  std::to_string(ids[i]) + " out of range (table rows " +
                                  std::to_string(t.rows()) + ")");
    }
    id_row(0, i) = static_cast<double>(ids[i]);
    auto src = t.row(ids[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  tape.push(LayerKind::kEmbedding, {std::move(id_row)});
  return out;
}

void embed_lookup_backward(LayerParams& table, const Matrix& grad_out, Tape& tape) {
  auto frame = tape.pop(LayerKind::kEmbedding);
  const Matrix& ids = frame.saved[0];
  Matrix& g = table.grad("table");
  if (grad_out.rows() != ids.cols() || grad_out.cols() != g.cols()) {
    throw std::invalid_argument("embed_lookup_backward: grad shape mismatch");
  }
  for (std::size_t i = 0; i < grad_out.rows(); ++i) {
    const auto id = static_cast<std::size_t>(ids(0, i));
    axpy(1.0, grad_out.row(i), g.row(id));
  }
}

// --- Position embeddings ----------------------------------------------------

Matrix add_position(const Matrix& x, LayerParams& pos, Tape& tape) {
  const Matrix& t = pos.value("table");
  if (x.rows() > t.rows()) {
    throw std::invalid_argument("add_position(" + pos.name() + "): sequence length " +
                                std::to_string(x.rows()) + " exceeds max positions " +
                                std::to_string(t.rows()));
  }
  if (x.cols() != t.cols()) throw std::invalid_argument("add_position: dim mismatch");
  Matrix out(x);
  for (std::size_t i = 0; i < x.rows(); ++i) axpy(1.0, t.row(i), out.row(i));
  tape.push(LayerKind::kPositionEmbedding, {});
  return out;
}

Matrix add_position_backward(LayerParams& pos, const Matrix& grad_out, Tape& tape) {
  tape.pop(LayerKind::kPositionEmbedding);
  Matrix& g = pos.grad("table");
  for (std::size_t i = 0; i < grad_out.rows(); ++i) axpy(1.0, grad_out.row(i), g.row(i));
  return grad_out;
}

// --- Multi-head self-attention ---------------------------------------------

Matrix self_attention(const Matrix& x, LayerParams& params, Tape& tape) {
  if (x.rows() == 0) throw std::invalid_argument("self_attention: empty sequence");
  const Matrix& geom = params.value("geometry");
  const auto heads = static_cast<std::size_t>(geom(0, 0));
  const auto head_dim = static_cast<std::size_t>(geom(0, 1));
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));

  const Matrix q = matmul(x, params.value("wq"));
  const Matrix k = matmul(x, params.value("wk"));
  const Matrix v = matmul(x, params.value("wv"));
  const std::size_t len = x.rows();

  Matrix out(len, heads * head_dim);
  std::vector<Matrix> saved;
  saved.reserve(4 + heads);
  saved.push_back(x);
  saved.push_back(q);
  saved.push_back(k);
  saved.push_back(v);

  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t c0 = h * head_dim;
    Matrix qh = extract_cols(q, c0, head_dim);
    Matrix kh = extract_cols(k, c0, head_dim);
    Matrix vh = extract_cols(v, c0, head_dim);
    Matrix scores = matmul_transb(qh, kh);
    scores *= inv_sqrt;
    for (std::size_t i = 0; i < len; ++i) softmax_inplace(scores.row(i));
    Matrix oh = matmul(scores, vh);
    add_into_cols(out, oh, c0);
    saved.push_back(std::move(scores));  // attention weights per head
  }
  tape.push(LayerKind::kSelfAttention, std::move(saved));
  return out;
}

Matrix self_attention_backward(LayerParams& params, const Matrix& grad_out, Tape& tape) {
  auto frame = tape.pop(LayerKind::kSelfAttention);
  const Matrix& x = frame.saved[0];
  const Matrix& q = frame.saved[1];
  const Matrix& k = frame.saved[2];
  const Matrix& v = frame.saved[3];
  const Matrix& geom = params.value("geometry");
  const auto heads = static_cast<std::size_t>(geom(0, 0));
  const auto head_dim = static_cast<std::size_t>(geom(0, 1));
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const std::size_t len = x.rows();
  if (grad_out.rows() != len || grad_out.cols() != heads * head_dim) {
    throw std::invalid_argument("self_attention_backward: grad shape mismatch");
  }

  Matrix gq(len, heads * head_dim), gk(len, heads * head_dim), gv(len, heads * head_dim);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t c0 = h * head_dim;
    const Matrix& attn = frame.saved[4 + h];
    Matrix qh = extract_cols(q, c0, head_dim);
    Matrix kh = extract_cols(k, c0, head_dim);
    Matrix vh = extract_cols(v, c0, head_dim);
    Matrix go = extract_cols(grad_out, c0, head_dim);

    Matrix g_attn = matmul_transb(go, vh);     // L x L
    Matrix gvh = matmul_transa(attn, go);      // L x dk
    Matrix g_scores(len, len);
    for (std::size_t i = 0; i < len; ++i) {
      Vector ds = softmax_backward(attn.row(i), g_attn.row(i));
      for (std::size_t j = 0; j < len; ++j) g_scores(i, j) = ds[j] * inv_sqrt;
    }
    Matrix gqh = matmul(g_scores, kh);
    Matrix gkh = matmul_transa(g_scores, qh);
    add_into_cols(gq, gqh, c0);
    add_into_cols(gk, gkh, c0);
    add_into_cols(gv, gvh, c0);
  }

  params.grad("wq") += matmul_transa(x, gq);
  params.grad("wk") += matmul_transa(x, gk);
  params.grad("wv") += matmul_transa(x, gv);

  Matrix gx = matmul_transb(gq, params.value("wq"));
  gx += matmul_transb(gk, params.value("wk"));
  gx += matmul_transb(gv, params.value("wv"));
  return gx;
}

// --- Attentive pooling ------------------------------------------------------

Vector attentive_pool(const Matrix& x, LayerParams& params, Tape& tape) {
  if (x.rows() == 0) throw std::invalid_argument("attentive_pool: empty sequence");
  const Matrix& w = params.value("proj");
  const Matrix& b = params.value("bias");
  const Matrix& q = params.value("query");
  if (w.cols() != x.cols()) throw std::invalid_argument("attentive_pool: dim mismatch");
  const std::size_t len = x.rows(), hidden = w.rows();

  Matrix t(len, hidden);
  Matrix alpha(1, len);
  for (std::size_t i = 0; i < len; ++i) {
    Vector z = matvec(w, x.row_copy(i));
    for (std::size_t j = 0; j < hidden; ++j) t(i, j) = std::tanh(z[j] + b(0, j));
    alpha(0, i) = dot(q.row(0), t.row(i));
  }
  softmax_inplace(alpha.row(0));

  Vector out(x.cols(), 0.0);
  for (std::size_t i = 0; i < len; ++i) axpy(alpha(0, i), x.row(i), out);
  tape.push(LayerKind::kAttentivePooling, {x, std::move(t), std::move(alpha)});
  return out;
}

Matrix attentive_pool_backward(LayerParams& params, const Vector& grad_out, Tape& tape) {
  auto frame = tape.pop(LayerKind::kAttentivePooling);
  const Matrix& x = frame.saved[0];
  const Matrix& t = frame.saved[1];
  const Matrix& alpha = frame.saved[2];
  const std::size_t len = x.rows(), hidden = t.cols();
  if (grad_out.size() != x.cols()) {
    throw std::invalid_argument("attentive_pool_backward: grad dim mismatch");
  }
  const Matrix& w = params.value("proj");
  const Matrix& q = params.value("query");

  Vector g_alpha(len);
  Matrix gx(len, x.cols());
  for (std::size_t i = 0; i < len; ++i) {
    g_alpha[i] = dot(grad_out, x.row(i));
    axpy(alpha(0, i), grad_out, gx.row(i));
  }
  Vector g_scores = softmax_backward(alpha.row(0), g_alpha);

  Matrix& gw = params.grad("proj");
  Matrix& gb = params.grad("bias");
  Matrix& gq = params.grad("query");
  for (std::size_t i = 0; i < len; ++i) {
    axpy(g_scores[i], t.row(i), gq.row(0));
    Vector gz(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
      const double ti = t(i, j);
      gz[j] = g_scores[i] * q(0, j) * (1.0 - ti * ti);
    }
    for (std::size_t j = 0; j < hidden; ++j) {
      axpy(gz[j], x.row(i), gw.row(j));
      gb(0, j) += gz[j];
    }
    // score path back to the inputs
    Vector gxi = matvec_transa(w, gz);
    axpy(1.0, gxi, gx.row(i));
  }
  return gx;
}

// --- Dense ------------------------------------------------------------------

Matrix dense(const Matrix& x, LayerParams& params, Activation act, Tape& tape) {
  const Matrix& w = params.value("weight");
  const Matrix& b = params.value("bias");
  if (x.cols() != w.rows()) {
    throw std::invalid_argument("dense(" + params.name() + "): input dim " +
                                std::to_string(x.cols()) + " vs weight " +
                                std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  }
  Matrix z = matmul(x, w);
  for (std::size_t i = 0; i < z.rows(); ++i) axpy(1.0, b.row(0), z.row(i));
  Matrix y(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.size(); ++i) y.data()[i] = activate(act, z.data()[i]);
  tape.push(LayerKind::kDense, {x, std::move(z)});
  return y;
}

Matrix dense_backward(LayerParams& params, Activation act, const Matrix& grad_out, Tape& tape) {
  auto frame = tape.pop(LayerKind::kDense);
  const Matrix& x = frame.saved[0];
  const Matrix& z = frame.saved[1];
  if (!grad_out.same_shape(z)) throw std::invalid_argument("dense_backward: grad shape mismatch");

  Matrix gz(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.size(); ++i) {
    gz.data()[i] = grad_out.data()[i] * activate_deriv(act, z.data()[i]);
  }
  params.grad("weight") += matmul_transa(x, gz);
  Matrix& gb = params.grad("bias");
  for (std::size_t i = 0; i < gz.rows(); ++i) axpy(1.0, gz.row(i), gb.row(0));
  return matmul_transb(gz, params.value("weight"));
}

Vector dense_vec(const Vector& x, LayerParams& params, Activation act, Tape& tape) {
  Matrix y = dense(Matrix::row_vector(x), params, act, tape);
  return y.row_copy(0);
}

Vector dense_vec_backward(LayerParams& params, Activation act, const Vector& grad_out, Tape& tape) {
  Matrix gx = dense_backward(params, act, Matrix::row_vector(grad_out), tape);
  return gx.row_copy(0);
}

// --- Dropout ----------------------------------------------------------------

Matrix dropout(const Matrix& x, double rate, bool training, Rng& rng, Tape& tape) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout: rate " + std::to_string(rate) + " outside [0,1)");
  }
  if (!training || rate == 0.0) {
    tape.push(LayerKind::kDropout, {Matrix()});  // empty mask = identity
    return x;
  }
  const double keep = 1.0 - rate;
  const double scale = 1.0 / keep;
  Matrix mask(x.rows(), x.cols());
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = rng.bernoulli(keep) ? scale : 0.0;
    mask.data()[i] = m;
    out.data()[i] = x.data()[i] * m;
  }
  tape.push(LayerKind::kDropout, {std::move(mask)});
  return out;
}

Matrix dropout_backward(const Matrix& grad_out, Tape& tape) {
  auto frame = tape.pop(LayerKind::kDropout);
  const Matrix& mask = frame.saved[0];
  if (mask.empty()) return grad_out;
  if (!mask.same_shape(grad_out)) throw std::invalid_argument("dropout_backward: shape mismatch");
  Matrix gx(grad_out);
  for (std::size_t i = 0; i < gx.size(); ++i) gx.data()[i] *= mask.data()[i];
  return gx;
}

}  // namespace fedctr::nn
