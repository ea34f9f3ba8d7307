// Copyright 2026 The vfmr Authors.
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

#include "vfmr/training.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "format_util.hpp"
#include "vfmr/error.hpp"
#include "vfmr/parallel.hpp"

namespace vfmr {
namespace {

const Vector& feature(const Dataset& ds, Modality m, const SampleRef& ref) {
  if (ref.identity >= ds.size()) {
    throw Error(ErrorCode::kInvalidArgument, "sample refers to a missing identity");
  }
  const auto& pool = ds.identities[ref.identity].samples(m);
  if (ref.index >= pool.size()) {
    throw Error(ErrorCode::kInvalidArgument, "sample index out of range");
  }
  return pool[ref.index];
}

const EmbedderParams& net_for(const ModalityPair& pair, Modality m) {
  return m == Modality::kVoice ? pair.voice : pair.face;
}

// Forward traces and normalized embeddings of one sample pool.
struct PoolPass {
  std::vector<ForwardTrace> traces;
  std::vector<Vector> embeddings;
};

PoolPass run_pool(const Dataset& ds, Modality m, std::span<const SampleRef> refs,
                  const EmbedderParams& params, const MetricSpaceConfig& space,
                  unsigned threads) {
  PoolPass pass;
  pass.traces.resize(refs.size());
  pass.embeddings.resize(refs.size());
  parallel_for(refs.size(), threads, [&](std::size_t i) {
    pass.traces[i] = forward_trace(params, feature(ds, m, refs[i]));
    const Embedding e = l2_normalize_scale(pass.traces[i].output(), space);
    pass.embeddings[i].assign(e.values().begin(), e.values().end());
  });
  return pass;
}

std::vector<Vector> embed_pool(const Dataset& ds, Modality m,
                               std::span<const SampleRef> refs,
                               const EmbedderParams& params,
                               const MetricSpaceConfig& space) {
  std::vector<Vector> out;
  out.reserve(refs.size());
  for (const SampleRef& ref : refs) {
    const Embedding e = embed(params, feature(ds, m, ref), space);
    out.emplace_back(e.values().begin(), e.values().end());
  }
  return out;
}

double reduce_loss(std::span<const double> terms, Reduction reduction) {
  const double total = pairwise_sum(terms);
  if (reduction == Reduction::kMean && !terms.empty()) {
    return total / static_cast<double>(terms.size());
  }
  return total;
}

void check_batch(const TripletBatch& batch) {
  for (const auto& t : batch.triplets) {
    if (t.anchor >= batch.anchors.size() || t.positive >= batch.candidates.size() ||
        t.negative >= batch.candidates.size()) {
      throw Error(ErrorCode::kInvalidArgument, "triplet refers outside its pools");
    }
  }
}

LayerGradients zeros_like(const EmbedderParams& params) {
  LayerGradients g;
  g.reserve(params.layers.size());
  for (const Layer& l : params.layers) g.emplace_back(l.rows, l.cols);
  return g;
}

void add_into(LayerGradients& dst, const LayerGradients& src) {
  for (std::size_t k = 0; k < dst.size(); ++k) {
    for (std::size_t i = 0; i < dst[k].weights.size(); ++i) dst[k].weights[i] += src[k].weights[i];
    for (std::size_t i = 0; i < dst[k].bias.size(); ++i) dst[k].bias[i] += src[k].bias[i];
  }
}

// Pairwise tree over per-sample buffers; shape depends only on parts.size().
LayerGradients reduce_parts(std::vector<LayerGradients>& parts, std::size_t lo,
                            std::size_t hi) {
  if (hi - lo == 1) return std::move(parts[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  LayerGradients left = reduce_parts(parts, lo, mid);
  const LayerGradients right = reduce_parts(parts, mid, hi);
  add_into(left, right);
  return left;
}

// Chain rule through e = s z / |z|, then through the affine/rectifier stack.
void backprop(const EmbedderParams& params, const ForwardTrace& trace,
              std::span<const double> grad_embedding, double scale,
              LayerGradients& out) {
  const Vector& z = trace.output();
  const double norm = l2_norm(z);
  double proj = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) proj += z[i] * grad_embedding[i];
  proj /= norm * norm;
  Vector grad_pre(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    grad_pre[i] = (scale / norm) * (grad_embedding[i] - z[i] * proj);
  }

  for (std::size_t k = params.layers.size(); k-- > 0;) {
    const Layer& layer = params.layers[k];
    const Vector& in = trace.inputs[k];
    Layer& g = out[k];
    for (std::size_t r = 0; r < layer.rows; ++r) {
      const double gr = grad_pre[r];
      g.bias[r] += gr;
      double* row = g.weights.data() + r * layer.cols;
      for (std::size_t c = 0; c < layer.cols; ++c) row[c] += gr * in[c];
    }
    if (k == 0) break;
    Vector grad_in(layer.cols, 0.0);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      const double gr = grad_pre[r];
      const double* row = layer.weights.data() + r * layer.cols;
      for (std::size_t c = 0; c < layer.cols; ++c) grad_in[c] += row[c] * gr;
    }
    if (params.activation == Activation::kRectifier) {
      const Vector& prev_pre = trace.pre[k - 1];
      for (std::size_t c = 0; c < grad_in.size(); ++c) {
        if (!(prev_pre[c] > 0.0)) grad_in[c] = 0.0;
      }
    }
    grad_pre.swap(grad_in);
  }
}

}  // namespace

std::vector<LrStep> default_lr_schedule(std::size_t total_steps) {
  const auto at = [total_steps](std::size_t sevenths_num) {
    return static_cast<std::size_t>(
        static_cast<unsigned long long>(total_steps) * sevenths_num / 70);
  };
  return {{at(20), 1e-3},
          {at(40), 1e-4},
          {at(60), 1e-5},
          {std::numeric_limits<std::size_t>::max(), 1e-6}};
}

void TrainingConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidConfig, msg); };
  if (!(margin >= 0.0) || !std::isfinite(margin)) fail("margin must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail("adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) fail("adam epsilon must be > 0");
  for (const auto& s : lr_schedule) {
    if (!(s.lr >= 0.0) || !std::isfinite(s.lr)) fail("learning rates must be finite and >= 0");
  }
  for (std::size_t i = 1; i < lr_schedule.size(); ++i) {
    if (lr_schedule[i].until_step < lr_schedule[i - 1].until_step) {
      fail("learning-rate schedule thresholds must be non-decreasing");
    }
  }
  for (const auto* mults : {&voice_lr_multipliers, &face_lr_multipliers}) {
    for (double m : *mults) {
      if (!(m >= 0.0) || !std::isfinite(m)) fail("lr multipliers must be finite and >= 0");
    }
  }
}

double TrainingConfig::learning_rate(std::size_t step) const {
  const std::vector<LrStep> fallback =
      lr_schedule.empty() ? default_lr_schedule(total_steps) : std::vector<LrStep>{};
  const auto& schedule = lr_schedule.empty() ? fallback : lr_schedule;
  for (const auto& s : schedule) {
    if (step < s.until_step) return s.lr;
  }
  return schedule.back().lr;
}

double triplet_loss(const Dataset& dataset, const TripletBatch& batch,
                    const ModalityPair& pair, double margin, Reduction reduction) {
  check_batch(batch);
  const auto anchors = embed_pool(dataset, batch.anchor_modality, batch.anchors,
                                  net_for(pair, batch.anchor_modality), pair.space);
  const auto candidates = embed_pool(dataset, batch.candidate_modality, batch.candidates,
                                     net_for(pair, batch.candidate_modality), pair.space);
  std::vector<double> terms(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& t = batch.triplets[k];
    const double hinge = distance(anchors[t.anchor], candidates[t.positive]) -
                         distance(anchors[t.anchor], candidates[t.negative]) + margin;
    terms[k] = hinge > 0.0 ? hinge : 0.0;
  }
  return reduce_loss(terms, reduction);
}

GradientSet loss_gradients(const Dataset& dataset, const TripletBatch& batch,
                           const ModalityPair& pair, double margin,
                           const GradientOptions& options) {
  check_batch(batch);
  const Modality am = batch.anchor_modality;
  const Modality cm = batch.candidate_modality;
  const EmbedderParams& anchor_net = net_for(pair, am);
  const EmbedderParams& candidate_net = net_for(pair, cm);
  const double scale = pair.space.scale;

  const PoolPass anchors =
      run_pool(dataset, am, batch.anchors, anchor_net, pair.space, options.threads);
  const PoolPass candidates =
      run_pool(dataset, cm, batch.candidates, candidate_net, pair.space, options.threads);

  const std::size_t dim = pair.space.dim;
  std::vector<Vector> grad_anchor(batch.anchors.size(), Vector(dim, 0.0));
  std::vector<Vector> grad_candidate(batch.candidates.size(), Vector(dim, 0.0));
  std::vector<double> terms(batch.size(), 0.0);
  const double weight = options.reduction == Reduction::kMean && batch.size() > 0
                            ? 1.0 / static_cast<double>(batch.size())
                            : 1.0;

  // Sequential in triplet order so every accumulation is reproducible.
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& t = batch.triplets[k];
    const Vector& a = anchors.embeddings[t.anchor];
    const Vector& p = candidates.embeddings[t.positive];
    const Vector& n = candidates.embeddings[t.negative];
    const double d_pos = distance(a, p);
    const double d_neg = distance(a, n);
    const double hinge = d_pos - d_neg + margin;
    if (!(hinge > 0.0)) continue;
    terms[k] = hinge;
    Vector& ga = grad_anchor[t.anchor];
    Vector& gp = grad_candidate[t.positive];
    Vector& gn = grad_candidate[t.negative];
    if (d_pos > 0.0) {
      const double c = weight / d_pos;
      for (std::size_t i = 0; i < dim; ++i) {
        const double u = c * (a[i] - p[i]);
        ga[i] += u;
        gp[i] -= u;
      }
    }
    if (d_neg > 0.0) {
      const double c = weight / d_neg;
      for (std::size_t i = 0; i < dim; ++i) {
        const double u = c * (a[i] - n[i]);
        ga[i] -= u;
        gn[i] += u;
      }
    }
  }

  GradientSet out;
  out.loss = reduce_loss(terms, options.reduction);

  auto trainable = [&](const EmbedderParams& net) {
    return options.include_frozen || !net.frozen;
  };

  // Per-sample parameter gradients, one buffer per pool slot.
  auto per_sample = [&](const EmbedderParams& net, const PoolPass& pass,
                        const std::vector<Vector>& grads) {
    std::vector<LayerGradients> parts(grads.size());
    parallel_for(grads.size(), options.threads, [&](std::size_t i) {
      parts[i] = zeros_like(net);
      bool any = false;
      for (double g : grads[i]) any = any || g != 0.0;
      if (any) backprop(net, pass.traces[i], grads[i], scale, parts[i]);
    });
    return parts;
  };

  auto assign = [&](Modality m, LayerGradients g) {
    (m == Modality::kVoice ? out.voice : out.face) = std::move(g);
  };

  if (am == cm) {
    if (trainable(anchor_net)) {
      auto parts = per_sample(anchor_net, anchors, grad_anchor);
      auto more = per_sample(candidate_net, candidates, grad_candidate);
      for (auto& p : more) parts.push_back(std::move(p));
      assign(am, parts.empty() ? zeros_like(anchor_net)
                               : reduce_parts(parts, 0, parts.size()));
    }
    return out;
  }
  if (trainable(anchor_net)) {
    auto parts = per_sample(anchor_net, anchors, grad_anchor);
    assign(am, parts.empty() ? zeros_like(anchor_net) : reduce_parts(parts, 0, parts.size()));
  }
  if (trainable(candidate_net)) {
    auto parts = per_sample(candidate_net, candidates, grad_candidate);
    assign(cm, parts.empty() ? zeros_like(candidate_net)
                             : reduce_parts(parts, 0, parts.size()));
  }
  return out;
}

Optimizer::Optimizer(const TrainingConfig& cfg, const ModalityPair& pair) : cfg_(cfg) {
  cfg_.validate();
  auto check = [](const std::vector<double>& mults, const EmbedderParams& p,
                  const char* which) {
    if (!mults.empty() && mults.size() != p.layers.size()) {
      throw Error(ErrorCode::kInvalidConfig,
                  std::string(which) + " lr multipliers must list one value per layer");
    }
  };
  check(cfg_.voice_lr_multipliers, pair.voice, "voice");
  check(cfg_.face_lr_multipliers, pair.face, "face");
  voice_ = {zeros_like(pair.voice), zeros_like(pair.voice)};
  face_ = {zeros_like(pair.face), zeros_like(pair.face)};
}

void Optimizer::apply(ModalityPair& pair, const GradientSet& grads, std::size_t step) {
  if (grads.voice) update(pair.voice, *grads.voice, cfg_.voice_lr_multipliers, voice_, step);
  if (grads.face) update(pair.face, *grads.face, cfg_.face_lr_multipliers, face_, step);
}

void Optimizer::update(EmbedderParams& params, const LayerGradients& grads,
                       std::span<const double> multipliers, Moments& moments,
                       std::size_t step) {
  const double base_lr = cfg_.learning_rate(step);
  const double t = static_cast<double>(step + 1);
  const double correction1 = 1.0 - std::pow(cfg_.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg_.beta2, t);

  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const double lr = base_lr * (multipliers.empty() ? 1.0 : multipliers[k]);
    auto step_vector = [&](Vector& theta, const Vector& g, Vector& m, Vector& v) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        if (cfg_.optimizer == OptimizerKind::kSgd) {
          theta[i] -= lr * g[i];
          continue;
        }
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        const double m_hat = m[i] / correction1;
        const double v_hat = v[i] / correction2;
        theta[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
      }
    };
    Layer& layer = params.layers[k];
    step_vector(layer.weights, grads[k].weights, moments.first[k].weights,
                moments.second[k].weights);
    step_vector(layer.bias, grads[k].bias, moments.first[k].bias, moments.second[k].bias);
  }
}

namespace {

void check_training_inputs(const Dataset& dataset, const ModalityPair& pair) {
  pair.validate();
  std::size_t usable = 0;
  for (const auto& rec : dataset.identities) {
    if (!rec.voices.empty() && !rec.faces.empty()) ++usable;
  }
  if (usable < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "training needs >= 2 identities with at least one voice and one face");
  }
  if (dataset.voice_dim() != pair.voice.input_dim() ||
      dataset.face_dim() != pair.face.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dataset feature dims do not match the embedder inputs");
  }
}

}  // namespace

TrainResult train(const Dataset& dataset, const ModalityPair& initial,
                  const SamplerConfig& sampler_cfg, const TrainingConfig& cfg) {
  cfg.validate();
  check_training_inputs(dataset, initial);

  TrainResult result{initial, {}, 0};
  BatchSampler sampler(dataset, sampler_cfg);
  Optimizer optimizer(cfg, result.pair);
  const GradientOptions options{cfg.reduction, cfg.threads, false};
  result.history.reserve(cfg.total_steps);
  for (std::size_t step = 0; step < cfg.total_steps; ++step) {
    const TripletBatch batch = sampler.next();
    const GradientSet grads = loss_gradients(dataset, batch, result.pair, cfg.margin, options);
    result.history.push_back({step, grads.loss, cfg.learning_rate(step)});
    optimizer.apply(result.pair, grads, step);
  }
  result.replacement_draws = sampler.replacement_draws();
  return result;
}

ModalityPair warm_start(const Dataset& dataset, const ModalityPair& initial,
                        const SamplerConfig& sampler_cfg, const TrainingConfig& cfg,
                        std::size_t steps) {
  cfg.validate();
  check_training_inputs(dataset, initial);
  ModalityPair pair = initial;
  if (steps == 0) return pair;

  SamplerConfig warm_cfg = sampler_cfg;
  warm_cfg.seed = Rng::derive(cfg.seed, 0x5741524DULL);
  BatchSampler sampler(dataset, warm_cfg);
  TrainingConfig warm = cfg;
  warm.lr_schedule = {{std::numeric_limits<std::size_t>::max(), cfg.learning_rate(0)}};
  Optimizer optimizer(warm, pair);
  const GradientOptions options{cfg.reduction, cfg.threads, true};
  for (std::size_t step = 0; step < 2 * steps; ++step) {
    const Modality m = step % 2 == 0 ? Modality::kVoice : Modality::kFace;
    const TripletBatch batch = sampler.next_unimodal(m);
    const GradientSet grads = loss_gradients(dataset, batch, pair, cfg.margin, options);
    optimizer.apply(pair, grads, step / 2);
  }
  return pair;
}

std::string loss_history_csv(std::span<const LossRecord> history) {
  std::ostringstream out;
  out << "step,loss,learning_rate\n";
  for (const auto& r : history) {
    out << r.step << ',' << detail::format_double(r.loss) << ','
        << detail::format_double(r.learning_rate) << '\n';
  }
  return out.str();
}

}  // namespace vfmr
