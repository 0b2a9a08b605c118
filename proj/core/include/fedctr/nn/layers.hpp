#pragma once

#include <span>

#include "fedctr/nn/matrix.hpp"
#include "fedctr/nn/params.hpp"
#include "fedctr/nn/rng.hpp"
#include "fedctr/types.hpp"

namespace fedctr::nn {

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };

double activate(Activation act, double z);
double activate_deriv(Activation act, double z);

// Initialisation: uniform [-0.1, 0.1] for embedding tables, Xavier-style
// fan-based uniform for dense and attention projections.
void init_embedding(Matrix& m, Rng& rng);
void init_xavier(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng);

LayerParams make_embedding(std::string name, std::size_t rows, std::size_t dim, Rng& rng);
LayerParams make_position_embedding(std::string name, std::size_t max_len, std::size_t dim, Rng& rng);
LayerParams make_dense(std::string name, std::size_t in_dim, std::size_t out_dim, Rng& rng);
LayerParams make_self_attention(std::string name, std::size_t in_dim, std::size_t heads,
                                std::size_t head_dim, Rng& rng);
LayerParams make_attentive_pooling(std::string name, std::size_t dim, std::size_t hidden, Rng& rng);

// --- Embedding lookup ------------------------------------------------------

/// Rows of `table` selected by token id; empty id list yields a 0 x dim matrix.
Matrix embed_lookup(LayerParams& table, std::span<const TokenId> ids, Tape& tape);
void embed_lookup_backward(LayerParams& table, const Matrix& grad_out, Tape& tape);

// --- Position embeddings ----------------------------------------------------

Matrix add_position(const Matrix& x, LayerParams& pos, Tape& tape);
/// Returns grad wrt x (pass-through) and accumulates the position-table grad.
Matrix add_position_backward(LayerParams& pos, const Matrix& grad_out, Tape& tape);

// --- Multi-head self-attention ---------------------------------------------

/// Scaled dot-product self-attention with per-head Q/K/V projections and
/// concatenated heads; input L x in_dim, output L x heads*head_dim. L = 0 is
/// rejected (nothing to attend over).
Matrix self_attention(const Matrix& x, LayerParams& params, Tape& tape);
Matrix self_attention_backward(LayerParams& params, const Matrix& grad_out, Tape& tape);

// --- Attentive pooling ------------------------------------------------------

/// alpha_i = softmax_i(q . tanh(W x_i + b)); returns sum_i alpha_i x_i.
/// The weights are stored on the tape (last saved matrix of the frame).
Vector attentive_pool(const Matrix& x, LayerParams& params, Tape& tape);
Matrix attentive_pool_backward(LayerParams& params, const Vector& grad_out, Tape& tape);

// --- Dense ------------------------------------------------------------------

Matrix dense(const Matrix& x, LayerParams& params, Activation act, Tape& tape);
Matrix dense_backward(LayerParams& params, Activation act, const Matrix& grad_out, Tape& tape);
Vector dense_vec(const Vector& x, LayerParams& params, Activation act, Tape& tape);
Vector dense_vec_backward(LayerParams& params, Activation act, const Vector& grad_out, Tape& tape);

// --- Dropout ----------------------------------------------------------------

/// Inverted dropout: zero entries with probability `rate` and scale survivors
/// by 1/(1-rate) in training mode; identity in eval mode. The mask is kept on
/// the tape so backward is exact.
Matrix dropout(const Matrix& x, double rate, bool training, Rng& rng, Tape& tape);
Matrix dropout_backward(const Matrix& grad_out, Tape& tape);

}  // namespace fedctr::nn
