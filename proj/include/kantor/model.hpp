#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kantor/distribution.hpp"
#include "kantor/frameset.hpp"
#include "kantor/nn.hpp"
#include "kantor/rng.hpp"

namespace kantor {

struct ModelConfig {
  int blocks = 3;
  int hidden = 32;
  double dropout = 0.2;
  int embed_dim = 32;
  bool use_chord = true;
  bool use_beat = true;
  uint64_t seed = 1;

  void check() const {
    if (blocks < 1 || hidden < 1 || embed_dim < 1)
      throw std::invalid_argument("ModelConfig: dimensions must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0)
      throw std::invalid_argument("ModelConfig: dropout must be in [0,1)");
  }

  /// Width of one conditions-encoder input row.
  int condition_width() const {
    return (use_beat ? 4 : 0) + 1 + (use_chord ? 12 : 0);
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_ter = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  bool validation_is_training = false;
};

struct TerReport {
  double alto = 0.0;
  double tenor = 0.0;
  double bass = 0.0;
  double mean() const { return (alto + tenor + bass) / 3.0; }
};

/// Start-of-sequence id in the decoder feedback embedding (one past HOLD).
inline constexpr int kStartToken = vocab::kSize;

/// Predictor contract: three per-frame distributions over the shared
/// vocabulary, conditioned on the whole condition sequences and the
/// generated prefix. Implementations may cache per-piece encodings.
class SequenceModel {
 public:
  struct Encoded {
    virtual ~Encoded() = default;
  };

  virtual ~SequenceModel() = default;
  virtual const ModelConfig& config() const = 0;

  virtual std::unique_ptr<Encoded> encode(const FrameSet& frames) const = 0;

  /// Distributions for frame t. `prev` holds the A/T/B tokens of frame t-1
  /// and is ignored at t = 0 (a start token takes its place).
  virtual std::array<Distribution, 3> predict_encoded(
      const Encoded& enc, int t, const std::array<uint16_t, 3>& prev) const = 0;

  /// One-shot convenience: re-encodes the piece, checks the prefix.
  std::array<Distribution, 3> predict_frame(
      const FrameSet& frames, int t,
      const std::vector<std::array<uint16_t, 3>>& prefix) const {
    if (t < 0 || t >= frames.length)
      throw std::out_of_range("predict_frame: t out of range");
    if (int(prefix.size()) < t)
      throw std::invalid_argument("predict_frame: incomplete prefix");
    auto enc = encode(frames);
    std::array<uint16_t, 3> prev{kStartToken, kStartToken, kStartToken};
    if (t > 0) prev = prefix[size_t(t - 1)];
    return predict_encoded(*enc, t, prev);
  }
};

class ModelVersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ModelCorruptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

/// Desk-scale reference network: two bidirectional recurrent encoders
/// (soprano; beat+fermata+chord conditions), a per-frame dense decoder fed
/// the previous frame's A/T/B tokens, and three softmax heads.
class ReferenceModel : public SequenceModel {
 public:
  explicit ReferenceModel(ModelConfig cfg) : cfg_(cfg) {
    cfg_.check();
    Rng rng(cfg_.seed);
    const int h = cfg_.hidden;
    const int e = cfg_.embed_dim;

    sop_embed_ = nn::Embedding("sop_embed", vocab::kSize, e);
    sop_embed_.init(rng);
    fb_embed_ = nn::Embedding("fb_embed", vocab::kSize + 1, e);
    fb_embed_.init(rng);

    auto make_encoder = [&](const std::string& name, int in_dim,
                            std::vector<EncoderBlock>& blocks) {
      for (int b = 0; b < cfg_.blocks; ++b) {
        int in = b == 0 ? in_dim : h;
        std::string prefix = name + "." + std::to_string(b);
        EncoderBlock blk;
        blk.fwd = nn::RnnCell(prefix + ".fwd", in, h, false);
        blk.bwd = nn::RnnCell(prefix + ".bwd", in, h, true);
        blk.proj = nn::Affine(prefix + ".proj", 2 * h, h);
        blk.bn = nn::BatchNorm(prefix + ".bn", h);
        blk.drop.rate = cfg_.dropout;
        blk.fwd.init(rng);
        blk.bwd.init(rng);
        blk.proj.init(rng);
        blocks.push_back(std::move(blk));
      }
    };
    make_encoder("sop_enc", e, sop_enc_);
    make_encoder("cond_enc", cfg_.condition_width(), cond_enc_);

    for (int b = 0; b < cfg_.blocks; ++b) {
      int in = b == 0 ? 2 * h + 3 * e : h;
      std::string prefix = "dec." + std::to_string(b);
      DecoderBlock blk;
      blk.lin = nn::Affine(prefix + ".lin", in, h);
      blk.bn = nn::BatchNorm(prefix + ".bn", h);
      blk.drop.rate = cfg_.dropout;
      blk.lin.init(rng);
      dec_.push_back(std::move(blk));
    }

    // Heads stay zero-initialized: an untrained model predicts uniformly.
    head_[0] = nn::Affine("head_a", h, vocab::kSize);
    head_[1] = nn::Affine("head_t", h, vocab::kSize);
    head_[2] = nn::Affine("head_b", h, vocab::kSize);
  }

  const ModelConfig& config() const override { return cfg_; }

  // ---- inference ---------------------------------------------------------

  struct EncodedPiece : Encoded {
    nn::Matrix soprano;     // T x hidden
    nn::Matrix conditions;  // T x hidden
  };

  std::unique_ptr<Encoded> encode(const FrameSet& frames) const override {
    auto enc = std::make_unique<EncodedPiece>();
    std::vector<int> offsets{0, frames.length};
    enc->soprano = run_encoder_eval(
        sop_enc_, sop_embed_.forward_const(soprano_ids(frames)), offsets);
    enc->conditions =
        run_encoder_eval(cond_enc_, condition_features(frames), offsets);
    return enc;
  }

  std::array<Distribution, 3> predict_encoded(
      const Encoded& enc_base, int t,
      const std::array<uint16_t, 3>& prev) const override {
    const auto& enc = dynamic_cast<const EncodedPiece&>(enc_base);
    if (t < 0 || t >= enc.soprano.rows())
      throw std::out_of_range("predict_encoded: t out of range");

    const int e = cfg_.embed_dim;
    nn::Matrix x(1, 2 * cfg_.hidden + 3 * e);
    x.block(0, 0, 1, cfg_.hidden) = enc.soprano.row(t);
    x.block(0, cfg_.hidden, 1, cfg_.hidden) = enc.conditions.row(t);
    for (int v = 0; v < 3; ++v) {
      int id = t == 0 ? kStartToken : int(prev[size_t(v)]);
      x.block(0, 2 * cfg_.hidden + v * e, 1, e) =
          fb_embed_.table.value.row(id);
    }
    for (const auto& blk : dec_)
      x = blk.bn.forward_eval(blk.lin.forward_const(x).array().tanh().matrix());

    std::array<Distribution, 3> out;
    for (int v = 0; v < 3; ++v) {
      nn::Matrix probs = nn::softmax(head_[size_t(v)].forward_const(x));
      for (int k = 0; k < vocab::kSize; ++k)
        out[size_t(v)][size_t(k)] = probs(0, k);
    }
    return out;
  }

  // ---- training ----------------------------------------------------------

  /// Mean summed-head cross-entropy with teacher forcing; fills parameter
  /// gradients unless `loss_only`.
  double training_step_loss(const std::vector<const FrameSet*>& batch,
                            Rng& dropout_rng, bool loss_only,
                            bool update_running) {
    for (auto* t : tensors()) t->zero_grad();

    std::vector<int> offsets{0};
    for (const FrameSet* f : batch) {
      check_trainable(*f);
      offsets.push_back(offsets.back() + f->length);
    }
    const int rows = offsets.back();
    const int h = cfg_.hidden;
    const int e = cfg_.embed_dim;

    std::vector<int> sop_ids, fb_ids[3], targets[3];
    nn::Matrix cond(rows, cfg_.condition_width());
    int row = 0;
    for (const FrameSet* f : batch) {
      auto ids = soprano_ids(*f);
      sop_ids.insert(sop_ids.end(), ids.begin(), ids.end());
      cond.block(row, 0, f->length, cond.cols()) = condition_features(*f);
      for (int v = 0; v < 3; ++v) {
        const auto& toks = f->tokens[size_t(v) + 1];  // alto, tenor, bass
        for (int t = 0; t < f->length; ++t) {
          fb_ids[v].push_back(t == 0 ? kStartToken : int(toks[size_t(t - 1)]));
          targets[v].push_back(int(toks[size_t(t)]));
        }
      }
      row += f->length;
    }

    nn::Matrix sop = run_encoder_train(sop_enc_, sop_embed_.forward(sop_ids, true),
                                       offsets, dropout_rng, update_running);
    nn::Matrix cnd = run_encoder_train(cond_enc_, cond, offsets, dropout_rng,
                                       update_running);

    nn::Matrix fb[3];
    for (int v = 0; v < 3; ++v) fb[v] = fb_embed_.forward_const(fb_ids[v]);

    nn::Matrix x(rows, 2 * h + 3 * e);
    x.block(0, 0, rows, h) = sop;
    x.block(0, h, rows, h) = cnd;
    for (int v = 0; v < 3; ++v) x.block(0, 2 * h + v * e, rows, e) = fb[v];

    for (auto& blk : dec_) {
      nn::Matrix a = blk.lin.forward(x, true);
      blk.cached_tanh = a.array().tanh().matrix();
      x = blk.drop.forward_train(
          blk.bn.forward_train(blk.cached_tanh, update_running), dropout_rng);
    }

    double loss = 0.0;
    nn::Matrix d_x = nn::Matrix::Zero(rows, h);
    for (int v = 0; v < 3; ++v) {
      nn::Matrix logits = head_[size_t(v)].forward(x, true);
      nn::Matrix d_logits;
      loss += nn::softmax_xent(logits, targets[v], d_logits);
      if (!loss_only) d_x += head_[size_t(v)].backward(d_logits);
    }
    if (loss_only) return loss;

    for (auto it = dec_.rbegin(); it != dec_.rend(); ++it) {
      nn::Matrix d = it->bn.backward(it->drop.backward(d_x));
      d = (d.array() * (1.0 - it->cached_tanh.array().square())).matrix();
      d_x = it->lin.backward(d);
    }

    nn::Matrix d_sop = d_x.block(0, 0, rows, h);
    nn::Matrix d_cnd = d_x.block(0, h, rows, h);
    for (int v = 0; v < 3; ++v)
      fb_embed_.backward_ids(fb_ids[v], d_x.block(0, 2 * h + v * e, rows, e));

    nn::Matrix d_sop_in = backward_encoder(sop_enc_, d_sop, offsets);
    sop_embed_.backward(d_sop_in);
    backward_encoder(cond_enc_, d_cnd, offsets);  // no grad past the features
    return loss;
  }

  /// SGD with global-norm gradient clipping.
  void sgd_step(double lr, double clip_norm = 5.0) {
    double sq = 0.0;
    for (auto* t : tensors()) sq += t->grad.squaredNorm();
    double norm = std::sqrt(sq);
    double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm
                                                         : 1.0;
    for (auto* t : tensors()) t->value -= lr * scale * t->grad;
  }

  TrainReport train(const std::vector<FrameSet>& corpus, int epochs,
                    double lr = 0.01, int batch_size = 4,
                    double validation_split = 0.1) {
    if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
    for (const auto& f : corpus) check_trainable(f);

    Rng rng(cfg_.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), size_t(0));
    rng.shuffle(order);

    size_t val_count = size_t(std::lround(validation_split * double(corpus.size())));
    val_count = std::min(val_count, corpus.size() - 1);
    std::vector<const FrameSet*> train_set, val_set;
    for (size_t i = 0; i < order.size(); ++i)
      (i < order.size() - val_count ? train_set : val_set)
          .push_back(&corpus[order[i]]);

    TrainReport report;
    if (val_set.empty()) {
      val_set = train_set;
      report.validation_is_training = true;
    }

    for (int epoch = 0; epoch < epochs; ++epoch) {
      rng.shuffle(train_set);
      double loss_sum = 0.0;
      int batches = 0;
      for (size_t i = 0; i < train_set.size(); i += size_t(batch_size)) {
        std::vector<const FrameSet*> batch(
            train_set.begin() + long(i),
            train_set.begin() +
                long(std::min(i + size_t(batch_size), train_set.size())));
        double loss = training_step_loss(batch, rng, false, true);
        if (!std::isfinite(loss)) {
          std::ostringstream msg;
          msg << "train: non-finite loss at epoch " << epoch << ", batch "
              << batches << " (lr=" << lr << ")";
          throw std::runtime_error(msg.str());
        }
        sgd_step(lr);
        loss_sum += loss;
        ++batches;
      }
      EpochStats stats;
      stats.epoch = epoch;
      stats.train_loss = loss_sum / std::max(batches, 1);
      stats.val_ter = token_error_rate_ptrs(val_set).mean();
      report.epochs.push_back(stats);
    }
    return report;
  }

  TerReport token_error_rate(const std::vector<FrameSet>& corpus) const {
    if (corpus.empty())
      throw std::invalid_argument("token_error_rate: empty corpus");
    std::vector<const FrameSet*> ptrs;
    for (const auto& f : corpus) ptrs.push_back(&f);
    return token_error_rate_ptrs(ptrs);
  }

  // ---- persistence -------------------------------------------------------

  static constexpr char kMagic[4] = {'K', 'M', 'D', 'L'};
  static constexpr uint32_t kFormatVersion = 1;

  void save(const std::string& path) const {
    std::string buf;
    auto put = [&](const void* p, size_t n) {
      buf.append(reinterpret_cast<const char*>(p), n);
    };
    put(kMagic, 4);
    uint32_t version = kFormatVersion;
    put(&version, 4);
    int32_t blocks = cfg_.blocks, hidden = cfg_.hidden,
            embed = cfg_.embed_dim;
    uint8_t use_chord = cfg_.use_chord, use_beat = cfg_.use_beat;
    put(&blocks, 4);
    put(&hidden, 4);
    put(&cfg_.dropout, 8);
    put(&embed, 4);
    put(&use_chord, 1);
    put(&use_beat, 1);
    put(&cfg_.seed, 8);

    auto entries = const_cast<ReferenceModel*>(this)->saved_entries();
    uint32_t count = uint32_t(entries.size());
    put(&count, 4);
    for (auto& [name, m] : entries) {
      uint16_t len = uint16_t(name.size());
      put(&len, 2);
      put(name.data(), name.size());
      uint32_t r = uint32_t(m->rows()), c = uint32_t(m->cols());
      put(&r, 4);
      put(&c, 4);
      for (Eigen::Index i = 0; i < m->rows(); ++i)
        for (Eigen::Index j = 0; j < m->cols(); ++j) {
          double v = (*m)(i, j);
          put(&v, 8);
        }
    }
    uint64_t checksum = detail::fnv1a(buf);
    put(&checksum, 8);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save: cannot open " + path);
    out.write(buf.data(), std::streamsize(buf.size()));
  }

  static ReferenceModel load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load: cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    if (buf.size() < 12 + 8) throw ModelCorruptError("model file truncated");

    uint64_t stored;
    std::memcpy(&stored, buf.data() + buf.size() - 8, 8);
    std::string body = buf.substr(0, buf.size() - 8);
    if (detail::fnv1a(body) != stored)
      throw ModelCorruptError("model file checksum mismatch");

    size_t pos = 0;
    auto get = [&](void* p, size_t n) {
      if (pos + n > body.size()) throw ModelCorruptError("model file truncated");
      std::memcpy(p, body.data() + pos, n);
      pos += n;
    };
    char magic[4];
    get(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
      throw ModelCorruptError("not a model file");
    uint32_t version;
    get(&version, 4);
    if (version != kFormatVersion)
      throw ModelVersionError("unsupported model format version " +
                              std::to_string(version));

    ModelConfig cfg;
    int32_t blocks, hidden, embed;
    uint8_t use_chord, use_beat;
    get(&blocks, 4);
    get(&hidden, 4);
    get(&cfg.dropout, 8);
    get(&embed, 4);
    get(&use_chord, 1);
    get(&use_beat, 1);
    get(&cfg.seed, 8);
    cfg.blocks = blocks;
    cfg.hidden = hidden;
    cfg.embed_dim = embed;
    cfg.use_chord = use_chord;
    cfg.use_beat = use_beat;

    ReferenceModel model(cfg);
    auto entries = model.saved_entries();
    uint32_t count;
    get(&count, 4);
    if (count != entries.size())
      throw ModelCorruptError("model file entry count mismatch");
    for (auto& [name, m] : entries) {
      uint16_t len;
      get(&len, 2);
      std::string stored_name(len, '\0');
      get(stored_name.data(), len);
      if (stored_name != name)
        throw ModelCorruptError("unexpected tensor " + stored_name);
      uint32_t r, c;
      get(&r, 4);
      get(&c, 4);
      if (int(r) != m->rows() || int(c) != m->cols())
        throw ModelCorruptError("tensor shape mismatch for " + name);
      for (uint32_t i = 0; i < r; ++i)
        for (uint32_t j = 0; j < c; ++j) {
          double v;
          get(&v, 8);
          (*m)(i, j) = v;
        }
    }
    if (pos != body.size()) throw ModelCorruptError("trailing bytes");
    return model;
  }

  /// All trainable parameters (for SGD, clipping, checks).
  std::vector<nn::Tensor*> tensors() {
    std::vector<nn::Tensor*> out{&sop_embed_.table, &fb_embed_.table};
    auto add_enc = [&](std::vector<EncoderBlock>& blocks) {
      for (auto& b : blocks) {
        out.push_back(&b.fwd.Wx);
        out.push_back(&b.fwd.Wh);
        out.push_back(&b.fwd.b);
        out.push_back(&b.bwd.Wx);
        out.push_back(&b.bwd.Wh);
        out.push_back(&b.bwd.b);
        out.push_back(&b.proj.W);
        out.push_back(&b.proj.b);
        out.push_back(&b.bn.gamma);
        out.push_back(&b.bn.beta);
      }
    };
    add_enc(sop_enc_);
    add_enc(cond_enc_);
    for (auto& b : dec_) {
      out.push_back(&b.lin.W);
      out.push_back(&b.lin.b);
      out.push_back(&b.bn.gamma);
      out.push_back(&b.bn.beta);
    }
    for (auto& h : head_) {
      out.push_back(&h.W);
      out.push_back(&h.b);
    }
    return out;
  }

 private:
  struct EncoderBlock {
    nn::RnnCell fwd, bwd;
    nn::Affine proj;
    nn::BatchNorm bn;
    nn::Dropout drop;
  };
  struct DecoderBlock {
    nn::Affine lin;
    nn::BatchNorm bn;
    nn::Dropout drop;
    nn::Matrix cached_tanh;
  };

  std::vector<int> soprano_ids(const FrameSet& f) const {
    std::vector<int> ids;
    ids.reserve(size_t(f.length));
    for (uint16_t t : f.tokens[0]) ids.push_back(int(t));
    return ids;
  }

  /// Beat one-hot | fermata bit | chromagram bits, per configuration.
  nn::Matrix condition_features(const FrameSet& f) const {
    nn::Matrix x = nn::Matrix::Zero(f.length, cfg_.condition_width());
    for (int t = 0; t < f.length; ++t) {
      int col = 0;
      if (cfg_.use_beat) {
        x(t, col + f.beat[size_t(t)]) = 1.0;
        col += 4;
      }
      x(t, col++) = f.fermata[size_t(t)] ? 1.0 : 0.0;
      if (cfg_.use_chord)
        for (int pc = 0; pc < 12; ++pc)
          if (f.chord[size_t(t)].contains(pc)) x(t, col + pc) = 1.0;
    }
    return x;
  }

  void check_trainable(const FrameSet& f) const {
    for (int v = 0; v < 4; ++v)
      if (!f.has_voice[size_t(v)])
        throw std::invalid_argument(
            "model: corpus piece lacks a voice (need full SATB)");
    if (cfg_.use_chord)
      for (const auto& c : f.chord)
        if (c.empty())
          throw std::invalid_argument(
              "model: empty chromagram with chord conditioning enabled");
  }

  nn::Matrix run_encoder_train(std::vector<EncoderBlock>& blocks,
                               nn::Matrix x, const std::vector<int>& offsets,
                               Rng& rng, bool update_running) {
    for (auto& blk : blocks) {
      nn::Matrix hf = blk.fwd.forward(x, offsets, true);
      nn::Matrix hb = blk.bwd.forward(x, offsets, true);
      nn::Matrix cat(x.rows(), hf.cols() + hb.cols());
      cat << hf, hb;
      x = blk.drop.forward_train(
          blk.bn.forward_train(blk.proj.forward(cat, true), update_running),
          rng);
    }
    return x;
  }

  nn::Matrix run_encoder_eval(const std::vector<EncoderBlock>& blocks,
                              nn::Matrix x,
                              const std::vector<int>& offsets) const {
    for (const auto& blk : blocks) {
      nn::Matrix hf = const_cast<nn::RnnCell&>(blk.fwd).forward(x, offsets, false);
      nn::Matrix hb = const_cast<nn::RnnCell&>(blk.bwd).forward(x, offsets, false);
      nn::Matrix cat(x.rows(), hf.cols() + hb.cols());
      cat << hf, hb;
      x = blk.bn.forward_eval(blk.proj.forward_const(cat));
    }
    return x;
  }

  nn::Matrix backward_encoder(std::vector<EncoderBlock>& blocks,
                              nn::Matrix d_out,
                              const std::vector<int>& offsets) {
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
      nn::Matrix d_cat =
          it->proj.backward(it->bn.backward(it->drop.backward(d_out)));
      int h = int(it->fwd.Wx.value.cols());
      nn::Matrix d_hf = d_cat.leftCols(h);
      nn::Matrix d_hb = d_cat.rightCols(h);
      d_out = it->fwd.backward(d_hf, offsets) + it->bwd.backward(d_hb, offsets);
    }
    return d_out;
  }

  TerReport token_error_rate_ptrs(
      const std::vector<const FrameSet*>& corpus) const {
    if (corpus.empty())
      throw std::invalid_argument("token_error_rate: empty corpus");
    long frames = 0;
    std::array<long, 3> errors{0, 0, 0};
    for (const FrameSet* f : corpus) {
      check_trainable(*f);
      auto enc = encode(*f);
      std::array<uint16_t, 3> prev{kStartToken, kStartToken, kStartToken};
      for (int t = 0; t < f->length; ++t) {
        if (t > 0)
          prev = {f->tokens[1][size_t(t - 1)], f->tokens[2][size_t(t - 1)],
                  f->tokens[3][size_t(t - 1)]};
        auto dists = predict_encoded(*enc, t, prev);
        for (int v = 0; v < 3; ++v) {
          int best = 0;
          for (int k = 1; k < vocab::kSize; ++k)
            if (dists[size_t(v)][size_t(k)] > dists[size_t(v)][size_t(best)])
              best = k;
          if (best != int(f->tokens[size_t(v) + 1][size_t(t)]))
            ++errors[size_t(v)];
        }
        ++frames;
      }
    }
    TerReport r;
    r.alto = double(errors[0]) / double(frames);
    r.tenor = double(errors[1]) / double(frames);
    r.bass = double(errors[2]) / double(frames);
    return r;
  }

  /// Name -> matrix for everything persisted: trainable tensors plus batch
  /// norm running statistics.
  std::vector<std::pair<std::string, nn::Matrix*>> saved_entries() {
    std::vector<std::pair<std::string, nn::Matrix*>> out;
    for (auto* t : tensors()) out.emplace_back(t->name, &t->value);
    auto add_bn = [&](nn::BatchNorm& bn, const std::string& prefix) {
      out.emplace_back(prefix + ".running_mean", &bn.running_mean);
      out.emplace_back(prefix + ".running_var", &bn.running_var);
    };
    for (size_t b = 0; b < sop_enc_.size(); ++b)
      add_bn(sop_enc_[b].bn, "sop_enc." + std::to_string(b) + ".bn");
    for (size_t b = 0; b < cond_enc_.size(); ++b)
      add_bn(cond_enc_[b].bn, "cond_enc." + std::to_string(b) + ".bn");
    for (size_t b = 0; b < dec_.size(); ++b)
      add_bn(dec_[b].bn, "dec." + std::to_string(b) + ".bn");
    return out;
  }

  ModelConfig cfg_;
  nn::Embedding sop_embed_;
  nn::Embedding fb_embed_;
  std::vector<EncoderBlock> sop_enc_;
  std::vector<EncoderBlock> cond_enc_;
  std::vector<DecoderBlock> dec_;
  std::array<nn::Affine, 3> head_;
};

}  // namespace kantor
