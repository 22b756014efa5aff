// src/train/trainer.cpp
//
// Copyright 2026 The sganlab Authors.
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

#include "sgan/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sgan/train/losses.hpp"

namespace sgan::train {

using namespace sgan::nn;

namespace {

// Stream tags for counter-based randomness; every draw in a step is
// reproducible from (master seed, stream, step index).
enum Stream : std::uint64_t {
  kInitG = 1,
  kInitD,
  kData,
  kZ1Disc,
  kZ2Disc,
  kMixDisc,
  kNoiseDisc,
  kGpU,
  kZ1Gen,
  kZ2Gen,
  kMixGen,
  kNoiseGen,
  kGenLabels,
};

void check_finite(double v, const char* what, std::uint64_t step,
                  const StepMetrics& m) {
  if (std::isfinite(v)) return;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "training aborted at step %llu: non-finite %s "
                "(samples=%llu res=%ld alpha=%.4f d_loss=%g g_loss=%g gp=%g)",
                static_cast<unsigned long long>(step), what,
                static_cast<unsigned long long>(m.samples_seen), m.resolution,
                m.alpha, m.d_loss, m.g_loss, m.gp);
  throw NumericError(buf);
}

}  // namespace

gan::GeneratorConfig generator_config(const TrainingConfig& cfg) {
  gan::GeneratorConfig g;
  g.latent_dim = cfg.latent_dim;
  g.class_embed_dim = cfg.class_embed_dim;
  g.channels = cfg.channels;
  g.num_classes = cfg.num_classes;
  g.max_res = cfg.max_resolution;
  g.mapping_lr_scale = cfg.mapping_lr_factor;
  return g;
}

gan::DiscriminatorConfig discriminator_config(const TrainingConfig& cfg) {
  gan::DiscriminatorConfig d;
  d.channels = cfg.channels;
  d.class_embed_dim = cfg.class_embed_dim;
  d.num_classes = cfg.num_classes;
  d.max_res = cfg.max_resolution;
  return d;
}

Trainer::Trainer(const TrainingConfig& cfg, data::MelCache cache)
    : cfg_(cfg), cache_(std::move(cache)) {
  cfg_.validate();
  if (cache_.count() == 0) throw DataError("trainer: empty mel cache");
  g_ = std::make_unique<gan::Generator>(generator_config(cfg_),
                                        derive_seed(cfg_.seed, kInitG, 0));
  d_ = std::make_unique<gan::Discriminator>(discriminator_config(cfg_),
                                            derive_seed(cfg_.seed, kInitD, 0));
  AdamHyper hyper{cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_eps};
  opt_g_ = std::make_unique<Adam>(g_->params(), hyper);
  opt_d_ = std::make_unique<Adam>(d_->params(), hyper);
}

Trainer::Trainer(const std::string& checkpoint_path, const TrainingConfig& cfg,
                 data::MelCache cache)
    : Trainer(cfg, std::move(cache)) {
  CheckpointMeta meta = read_checkpoint_meta(checkpoint_path);
  if (meta.config_hash != config_hash(cfg_))
    throw DataError(
        "refusing to resume: checkpoint config hash does not match the "
        "runtime configuration (" + checkpoint_path + ")");
  meta = load_checkpoint(checkpoint_path, *g_, *d_, opt_g_.get(), opt_d_.get());
  samples_seen_ = meta.samples_seen;
  step_ = meta.step;
}

nn::Variable Trainer::training_fake(long batch,
                                    const std::vector<long>& labels,
                                    const StageState& st,
                                    std::uint64_t z1_seed,
                                    std::uint64_t z2_seed,
                                    std::uint64_t mix_seed,
                                    std::uint64_t noise_seed) const {
  RandomEngine z1_rng(z1_seed);
  Variable z1 =
      Variable::constant(z1_rng.normal_tensor({batch, cfg_.latent_dim}));
  Variable w1 = g_->map_latent(z1, labels);

  const long n_blocks = gan::Generator::blocks_for(st.resolution);
  std::vector<Variable> per_block(static_cast<size_t>(n_blocks), w1);

  if (n_blocks >= 2 && cfg_.style_mix_prob > 0.0) {
    RandomEngine mix_rng(mix_seed);
    std::vector<long> crossover(static_cast<size_t>(batch), n_blocks);
    bool any = false;
    for (long i = 0; i < batch; ++i)
      if (mix_rng.uniform() < cfg_.style_mix_prob) {
        crossover[static_cast<size_t>(i)] = 1 + mix_rng.uniform_int(n_blocks - 1);
        any = true;
      }
    if (any) {
      RandomEngine z2_rng(z2_seed);
      Variable z2 =
          Variable::constant(z2_rng.normal_tensor({batch, cfg_.latent_dim}));
      Variable w2 = g_->map_latent(z2, labels);
      for (long b = 0; b < n_blocks; ++b) {
        std::vector<char> use_first(static_cast<size_t>(batch));
        for (long i = 0; i < batch; ++i)
          use_first[static_cast<size_t>(i)] =
              b < crossover[static_cast<size_t>(i)] ? 1 : 0;
        per_block[static_cast<size_t>(b)] = gan::select_rows(use_first, w1, w2);
      }
    }
  }

  RandomEngine noise_rng(noise_seed);
  auto noises = g_->sample_noises(st.resolution, batch, noise_rng);
  return g_->synthesize(per_block, st.resolution, st.alpha, noises);
}

StepMetrics Trainer::step() {
  const StageState st = schedule_state(samples_seen_, cfg_);
  const std::uint64_t remaining = cfg_.total_samples - samples_seen_;
  const long batch = static_cast<long>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(st.batch_size), remaining));

  data::Batch real = data::next_batch(cache_, batch, st.resolution,
                                      derive_seed(cfg_.seed, kData, step_));

  StepMetrics m;
  m.resolution = st.resolution;
  m.alpha = st.alpha;

  // --- discriminator update ---
  Tensor fake;
  {
    NoGradGuard off;
    fake = training_fake(batch, real.labels, st,
                         derive_seed(cfg_.seed, kZ1Disc, step_),
                         derive_seed(cfg_.seed, kZ2Disc, step_),
                         derive_seed(cfg_.seed, kMixDisc, step_),
                         derive_seed(cfg_.seed, kNoiseDisc, step_))
               .value();
  }

  Variable real_scores =
      d_->forward(Variable::constant(real.mels), real.labels, st.resolution,
                  st.alpha);
  Variable fake_scores = d_->forward(Variable::constant(fake), real.labels,
                                     st.resolution, st.alpha);

  RandomEngine u_rng(derive_seed(cfg_.seed, kGpU, step_));
  Tensor u = u_rng.uniform_tensor({batch});
  Critic critic = [&](const Variable& x) {
    return d_->forward(x, real.labels, st.resolution, st.alpha);
  };
  Variable gp = gradient_penalty(critic, real.mels, fake, u, cfg_.gp_lambda);
  Variable d_loss =
      discriminator_loss(real_scores, fake_scores, gp, cfg_.drift_epsilon);

  m.gp = gp.scalar();
  m.d_loss = d_loss.scalar();
  check_finite(m.d_loss, "discriminator loss", step_, m);

  std::vector<char> reached_d;
  auto d_grads = grad_tensors(d_loss, d_->params().variables(), &reached_d);
  opt_d_->step(st.learning_rate, d_grads, reached_d);
  ++d_updates_;

  // --- generator update ---
  d_->params().set_requires_grad(false);
  RandomEngine label_rng(derive_seed(cfg_.seed, kGenLabels, step_));
  std::vector<long> gen_labels(static_cast<size_t>(batch));
  for (long i = 0; i < batch; ++i)
    gen_labels[static_cast<size_t>(i)] =
        cache_.label(label_rng.uniform_int(cache_.count()));

  Variable fake2 = training_fake(batch, gen_labels, st,
                                 derive_seed(cfg_.seed, kZ1Gen, step_),
                                 derive_seed(cfg_.seed, kZ2Gen, step_),
                                 derive_seed(cfg_.seed, kMixGen, step_),
                                 derive_seed(cfg_.seed, kNoiseGen, step_));
  Variable g_loss = generator_loss(
      d_->forward(fake2, gen_labels, st.resolution, st.alpha));
  m.g_loss = g_loss.scalar();
  check_finite(m.g_loss, "generator loss", step_, m);

  std::vector<char> reached_g;
  auto g_grads = grad_tensors(g_loss, g_->params().variables(), &reached_g);
  opt_g_->step(st.learning_rate, g_grads, reached_g);
  ++g_updates_;
  d_->params().set_requires_grad(true);

  samples_seen_ += static_cast<std::uint64_t>(batch);
  ++step_;
  m.samples_seen = samples_seen_;
  return m;
}

std::string Trainer::metrics_line(const StepMetrics& m) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%llu\t%ld\t%.6f\t%.10g\t%.10g\t%.10g",
                static_cast<unsigned long long>(m.samples_seen), m.resolution,
                m.alpha, m.d_loss, m.g_loss, m.gp);
  return buf;
}

void Trainer::save(const std::string& path) const {
  save_checkpoint(path, cfg_, *g_, *d_, *opt_g_, *opt_d_, samples_seen_, step_,
                  cfg_.seed);
}

void Trainer::run(const std::string& checkpoint_dir, std::ostream* metrics) {
  const bool checkpointing = !checkpoint_dir.empty();
  auto checkpoint_path = [&](std::uint64_t samples) {
    return (std::filesystem::path(checkpoint_dir) /
            ("checkpoint_" + std::to_string(samples) + ".ckpt"))
        .string();
  };
  if (checkpointing) {
    std::filesystem::create_directories(checkpoint_dir);
    if (samples_seen_ == 0) save(checkpoint_path(0));
  }

  StageState prev = schedule_state(samples_seen_, cfg_);
  std::uint64_t bucket = samples_seen_ / cfg_.checkpoint_samples;
  while (samples_seen_ < cfg_.total_samples) {
    StepMetrics m = step();
    if (metrics) *metrics << metrics_line(m) << "\n";

    const StageState now = schedule_state(samples_seen_, cfg_);
    const bool boundary =
        now.resolution != prev.resolution || now.phase != prev.phase;
    const std::uint64_t new_bucket = samples_seen_ / cfg_.checkpoint_samples;
    const bool done = samples_seen_ >= cfg_.total_samples;
    if (checkpointing && (boundary || new_bucket != bucket || done))
      save(checkpoint_path(samples_seen_));
    prev = now;
    bucket = new_bucket;
  }
  if (metrics) metrics->flush();
}

}  // namespace sgan::train
