#include "fedctr/models/encoders.hpp"

#include <stdexcept>

namespace fedctr::models {

using nn::LayerKind;

namespace {

// Truncation keeps the most recent items (tail of the sequence).
template <typename T>
std::span<const T> keep_last(std::span<const T> xs, std::size_t max_len) {
  if (xs.size() <= max_len) return xs;
  return xs.subspan(xs.size() - max_len);
}

}  // namespace

// --- TextEncoder -------------------------------------------------------------

TextEncoder::TextEncoder(const std::string& name, const ModelConfig& cfg, Rng& rng)
    : cfg_(cfg),
      word_emb_(nn::make_embedding(name + ".word_emb", cfg.vocab_size, cfg.word_dim, rng)),
      word_pos_(nn::make_position_embedding(name + ".word_pos", cfg.max_tokens, cfg.word_dim, rng)),
      attn_(nn::make_self_attention(name + ".word_attn", cfg.word_dim, cfg.heads, cfg.head_dim, rng)),
      pool_(nn::make_attentive_pooling(name + ".word_pool", cfg.embedding_dim(), cfg.pool_hidden, rng)) {}

Vector TextEncoder::forward(std::span<const TokenId> tokens, Tape& tape, Rng* train_rng) {
  if (tokens.empty()) throw std::invalid_argument("TextEncoder: empty token sequence");
  auto ids = keep_last(tokens, cfg_.max_tokens);
  Rng dummy(0);
  Rng& drop_rng = train_rng ? *train_rng : dummy;
  Matrix x = nn::embed_lookup(word_emb_, ids, tape);
  x = nn::add_position(x, word_pos_, tape);
  x = nn::dropout(x, cfg_.dropout, train_rng != nullptr, drop_rng, tape);
  x = nn::self_attention(x, attn_, tape);
  x = nn::dropout(x, cfg_.dropout, train_rng != nullptr, drop_rng, tape);
  return nn::attentive_pool(x, pool_, tape);
}

void TextEncoder::backward(const Vector& grad, Tape& tape) {
  Matrix g = nn::attentive_pool_backward(pool_, grad, tape);
  g = nn::dropout_backward(g, tape);
  g = nn::self_attention_backward(attn_, g, tape);
  g = nn::dropout_backward(g, tape);
  g = nn::add_position_backward(word_pos_, g, tape);
  nn::embed_lookup_backward(word_emb_, g, tape);
}

void TextEncoder::visit_params(const ParamVisitor& v) {
  for (LayerParams* p : {&word_emb_, &word_pos_, &attn_, &pool_}) {
    for (auto& b : p->blocks()) v(b);
  }
}

// --- UserModel ---------------------------------------------------------------

UserModel::UserModel(const std::string& name, const ModelConfig& cfg, Rng& rng)
    : cfg_(cfg),
      behavior_encoder_(name + ".behavior", cfg, rng),
      beh_pos_(nn::make_position_embedding(name + ".beh_pos", cfg.max_behaviors, cfg.embedding_dim(), rng)),
      beh_attn_(nn::make_self_attention(name + ".beh_attn", cfg.embedding_dim(), cfg.heads, cfg.head_dim, rng)),
      beh_pool_(nn::make_attentive_pooling(name + ".beh_pool", cfg.embedding_dim(), cfg.pool_hidden, rng)),
      cold_start_(nn::LayerKind::kEmbedding, name + ".cold_start") {
  Matrix row(1, cfg.embedding_dim());
  nn::init_embedding(row, rng);
  cold_start_.add("embedding", std::move(row));
}

UserEmbedding UserModel::forward(std::span<const data::BehaviorRecord> behaviors, Tape& tape,
                                 Rng* train_rng) {
  tape.set_owner(this);
  auto recent = keep_last(behaviors, cfg_.max_behaviors);

  std::vector<const data::BehaviorRecord*> usable;
  usable.reserve(recent.size());
  for (const auto& b : recent) {
    if (!b.tokens.empty()) usable.push_back(&b);
  }

  if (usable.empty()) {
    Matrix route(1, 2);
    route(0, 0) = 1.0;  // cold start
    tape.push(LayerKind::kRoute, {std::move(route)});
    return {cold_start_.value("embedding").row_copy(0), true};
  }

  const std::size_t dim = cfg_.embedding_dim();
  Matrix seq(usable.size(), dim);
  for (std::size_t i = 0; i < usable.size(); ++i) {
    Vector v = behavior_encoder_.forward(usable[i]->tokens, tape, train_rng);
    std::copy(v.begin(), v.end(), seq.row(i).begin());
  }

  Matrix x = nn::add_position(seq, beh_pos_, tape);
  Rng dummy(0);
  x = nn::dropout(x, cfg_.dropout, train_rng != nullptr, train_rng ? *train_rng : dummy, tape);
  x = nn::self_attention(x, beh_attn_, tape);
  x = nn::dropout(x, cfg_.dropout, train_rng != nullptr, train_rng ? *train_rng : dummy, tape);
  Vector u = nn::attentive_pool(x, beh_pool_, tape);

  Matrix route(1, 2);
  route(0, 1) = static_cast<double>(usable.size());
  tape.push(LayerKind::kRoute, {std::move(route)});
  return {std::move(u), false};
}

void UserModel::backward(const Vector& grad_u, Tape& tape) {
  if (tape.owner() != this) throw std::invalid_argument("UserModel::backward: tape from another model");
  if (grad_u.size() != output_dim()) throw std::invalid_argument("UserModel::backward: grad dim mismatch");
  auto route = tape.pop(LayerKind::kRoute);
  if (route.saved[0](0, 0) != 0.0) {
    axpy(1.0, grad_u, cold_start_.grad("embedding").row(0));
    return;
  }
  const auto count = static_cast<std::size_t>(route.saved[0](0, 1));

  Matrix g = nn::attentive_pool_backward(beh_pool_, grad_u, tape);
  g = nn::dropout_backward(g, tape);
  g = nn::self_attention_backward(beh_attn_, g, tape);
  g = nn::dropout_backward(g, tape);
  g = nn::add_position_backward(beh_pos_, g, tape);

  // encoder frames were pushed in behavior order; consume LIFO
  for (std::size_t i = count; i-- > 0;) {
    behavior_encoder_.backward(g.row_copy(i), tape);
  }
}

void UserModel::visit_params(const ParamVisitor& v) {
  behavior_encoder_.visit_params(v);
  for (LayerParams* p : {&beh_pos_, &beh_attn_, &beh_pool_, &cold_start_}) {
    for (auto& b : p->blocks()) v(b);
  }
}

// --- AdModel -------------------------------------------------------------------

AdModel::AdModel(const std::string& name, const ModelConfig& cfg, Rng& rng)
    : cfg_(cfg),
      id_emb_(nn::make_embedding(name + ".id_emb", cfg.ad_count + 1, cfg.id_dim, rng)),
      id_dense_(nn::make_dense(name + ".id_dense", cfg.id_dim, cfg.embedding_dim(), rng)),
      title_enc_(name + ".title", cfg, rng),
      desc_enc_(name + ".desc", cfg, rng),
      view_pool_(nn::make_attentive_pooling(name + ".view_pool", cfg.embedding_dim(), cfg.pool_hidden, rng)) {}

Vector AdModel::forward(const data::AdRecord& ad, Tape& tape, Rng* train_rng) {
  tape.set_owner(this);
  const std::size_t dim = cfg_.embedding_dim();

  // unknown ids map to the reserved OOV row 0
  const TokenId id_row = ad.id < cfg_.ad_count ? ad.id + 1 : 0;
  Matrix id_e = nn::embed_lookup(id_emb_, std::span<const TokenId>(&id_row, 1), tape);
  Matrix id_v = nn::dense(id_e, id_dense_, nn::Activation::kTanh, tape);

  const bool has_title = !ad.title.empty();
  const bool has_desc = !ad.description.empty();

  std::size_t views = 1 + (has_title ? 1 : 0) + (has_desc ? 1 : 0);
  Matrix stacked(views, dim);
  std::copy(id_v.row(0).begin(), id_v.row(0).end(), stacked.row(0).begin());
  std::size_t r = 1;
  if (has_title) {
    Vector t = title_enc_.forward(ad.title, tape, train_rng);
    std::copy(t.begin(), t.end(), stacked.row(r++).begin());
  }
  if (has_desc) {
    Vector d = desc_enc_.forward(ad.description, tape, train_rng);
    std::copy(d.begin(), d.end(), stacked.row(r++).begin());
  }

  Vector out = nn::attentive_pool(stacked, view_pool_, tape);

  Matrix route(1, 2);
  route(0, 0) = has_title ? 1.0 : 0.0;
  route(0, 1) = has_desc ? 1.0 : 0.0;
  tape.push(LayerKind::kRoute, {std::move(route)});
  return out;
}

void AdModel::backward(const Vector& grad_d, Tape& tape) {
  if (tape.owner() != this) throw std::invalid_argument("AdModel::backward: tape from another model");
  auto route = tape.pop(LayerKind::kRoute);
  const bool has_title = route.saved[0](0, 0) != 0.0;
  const bool has_desc = route.saved[0](0, 1) != 0.0;

  Matrix g = nn::attentive_pool_backward(view_pool_, grad_d, tape);

  std::size_t r = g.rows();
  if (has_desc) desc_enc_.backward(g.row_copy(--r), tape);
  if (has_title) title_enc_.backward(g.row_copy(--r), tape);

  Matrix g_id(1, g.cols());
  std::copy(g.row(0).begin(), g.row(0).end(), g_id.row(0).begin());
  Matrix g_emb = nn::dense_backward(id_dense_, nn::Activation::kTanh, g_id, tape);
  nn::embed_lookup_backward(id_emb_, g_emb, tape);
}

void AdModel::visit_params(const ParamVisitor& v) {
  for (auto& b : id_emb_.blocks()) v(b);
  for (auto& b : id_dense_.blocks()) v(b);
  title_enc_.visit_params(v);
  desc_enc_.visit_params(v);
  for (auto& b : view_pool_.blocks()) v(b);
}

}  // namespace fedctr::models
