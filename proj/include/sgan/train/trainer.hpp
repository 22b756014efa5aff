// sgan/train/trainer.hpp
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

#pragma once

#include <memory>
#include <ostream>
#include <string>

#include "sgan/data/dataset.hpp"
#include "sgan/train/checkpoint.hpp"
#include "sgan/train/schedule.hpp"

namespace sgan::train {

gan::GeneratorConfig generator_config(const TrainingConfig& cfg);
gan::DiscriminatorConfig discriminator_config(const TrainingConfig& cfg);

struct StepMetrics {
  std::uint64_t samples_seen = 0;  // cumulative, after the step
  long resolution = 0;
  double alpha = 1.0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double gp = 0.0;
};

// WGAN-GP training loop under the progressive-growing schedule: one
// discriminator update then one generator update per step, style mixing
// on the generator path, all randomness derived from (seed, step) so a
// resumed run continues bit-identically.
class Trainer {
 public:
  Trainer(const TrainingConfig& cfg, data::MelCache cache);

  // Resumes from a checkpoint; refuses if cfg does not hash-match the
  // stored configuration.
  Trainer(const std::string& checkpoint_path, const TrainingConfig& cfg,
          data::MelCache cache);

  StepMetrics step();

  // Runs to total_samples. Checkpoints land in checkpoint_dir (unless
  // empty) at every stage boundary, every checkpoint_samples, at start and
  // at completion; metrics go line-per-step to *metrics when given.
  void run(const std::string& checkpoint_dir, std::ostream* metrics);

  void save(const std::string& path) const;

  const TrainingConfig& config() const { return cfg_; }
  gan::Generator& generator() { return *g_; }
  const gan::Generator& generator() const { return *g_; }
  gan::Discriminator& discriminator() { return *d_; }
  const Adam& generator_opt() const { return *opt_g_; }
  const Adam& discriminator_opt() const { return *opt_d_; }
  std::uint64_t samples_seen() const { return samples_seen_; }
  std::uint64_t steps_taken() const { return step_; }
  std::uint64_t discriminator_updates() const { return d_updates_; }
  std::uint64_t generator_updates() const { return g_updates_; }

  // samples_seen <TAB> resolution <TAB> alpha <TAB> d_loss <TAB> g_loss
  // <TAB> gp
  static std::string metrics_line(const StepMetrics& m);

 private:
  nn::Variable training_fake(long batch, const std::vector<long>& labels,
                             const StageState& st, std::uint64_t z1_seed,
                             std::uint64_t z2_seed, std::uint64_t mix_seed,
                             std::uint64_t noise_seed) const;

  TrainingConfig cfg_;
  data::MelCache cache_;
  std::unique_ptr<gan::Generator> g_;
  std::unique_ptr<gan::Discriminator> d_;
  std::unique_ptr<Adam> opt_g_, opt_d_;
  std::uint64_t samples_seen_ = 0;
  std::uint64_t step_ = 0;
  std::uint64_t d_updates_ = 0, g_updates_ = 0;
};

}  // namespace sgan::train
