// sgan/eval/classifier.hpp
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

#include <string>
#include <vector>

#include "sgan/data/dataset.hpp"
#include "sgan/gan/layers.hpp"

namespace sgan::eval {

// Small mel classifier: four stride-2 3x3 convolution blocks with leaky
// activations, a global average-pooling layer whose output doubles as the
// activation vector for Fréchet-distance scoring, and a linear softmax
// head.
class DigitClassifier {
 public:
  struct Config {
    long input_res = 128;
    long num_classes = 10;
    long base_channels = 16;
    std::uint64_t seed = 1;
  };

  explicit DigitClassifier(const Config& cfg);

  const Config& config() const { return cfg_; }
  long feature_dim() const { return 8 * cfg_.base_channels; }
  gan::ParamStore& params() { return store_; }
  const gan::ParamStore& params() const { return store_; }

  // Pooled pre-softmax features, the FD activation vector.
  nn::Variable features(const nn::Variable& mels) const;
  nn::Variable logits(const nn::Variable& mels) const;

  // Detached conveniences over (N,1,r,r) unit-range mels.
  Tensor activations(const Tensor& mels) const;
  std::vector<long> predict(const Tensor& mels) const;

  void save(const std::string& path) const;
  static DigitClassifier load(const std::string& path);

 private:
  Config cfg_;
  gan::ParamStore store_;
  std::vector<gan::EqConv> convs_;
  gan::EqLinear head_;
};

struct ClassifierTrainStats {
  std::uint64_t presentations = 0;
  double held_out_accuracy = 0.0;
  double final_loss = 0.0;
};

// Softmax cross-entropy training over cache batches; `presentations`
// counts samples shown. Needs at least two classes in the training set.
ClassifierTrainStats train_digit_classifier(DigitClassifier& clf,
                                            const data::MelCache& train_set,
                                            const data::MelCache& held_out,
                                            std::uint64_t presentations,
                                            long batch_size, double lr,
                                            std::uint64_t seed);

// Fraction of cache records whose argmax matches the label.
double classifier_accuracy(const DigitClassifier& clf,
                           const data::MelCache& cache);

}  // namespace sgan::eval
