// src/eval/classifier.cpp
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

#include "sgan/eval/classifier.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "sgan/train/adam.hpp"

namespace sgan::eval {

using namespace sgan::nn;

DigitClassifier::DigitClassifier(const Config& cfg) : cfg_(cfg) {
  if (cfg_.input_res % 16 != 0 || cfg_.input_res < 16)
    throw DataError("classifier: input resolution must be a multiple of 16");
  RandomEngine rng(cfg_.seed);
  const double gain = std::sqrt(2.0);
  long cin = 1;
  for (int i = 0; i < 4; ++i) {
    const long cout = cfg_.base_channels << i;
    convs_.emplace_back(store_, "clf.conv" + std::to_string(i), cin, cout, 3,
                        2, gain, 1.0, rng);
    cin = cout;
  }
  head_ = gan::EqLinear(store_, "clf.head", feature_dim(), cfg_.num_classes,
                        1.0, 1.0, rng);
}

nn::Variable DigitClassifier::features(const nn::Variable& mels) const {
  const Tensor& t = mels.value();
  if (t.rank() != 4 || t.dim(1) != 1 || t.dim(2) != cfg_.input_res ||
      t.dim(3) != cfg_.input_res)
    throw DataError("classifier: input must be (N,1," +
                    std::to_string(cfg_.input_res) + "," +
                    std::to_string(cfg_.input_res) + "), got " + t.shape_str());
  Variable x = mels;
  for (const auto& conv : convs_)
    x = leaky_relu(conv.forward(x), gan::kLeakySlope);
  const long hw = x.value().dim(2) * x.value().dim(3);
  // global average pooling: the FD activation layer
  return scale(reduce_spatial(x), 1.0 / static_cast<double>(hw));
}

nn::Variable DigitClassifier::logits(const nn::Variable& mels) const {
  return head_.forward(features(mels));
}

Tensor DigitClassifier::activations(const Tensor& mels) const {
  NoGradGuard off;
  return features(Variable::constant(mels)).value();
}

std::vector<long> DigitClassifier::predict(const Tensor& mels) const {
  NoGradGuard off;
  Tensor lg = logits(Variable::constant(mels)).value();
  const long n = lg.dim(0), k = lg.dim(1);
  std::vector<long> labels(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    long arg = 0;
    for (long j = 1; j < k; ++j)
      if (lg[i * k + j] > lg[i * k + arg]) arg = j;
    labels[static_cast<size_t>(i)] = arg;
  }
  return labels;
}

namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', 'L'};
constexpr std::uint32_t kVersion = 1;

nn::Variable cross_entropy(const DigitClassifier& clf, const Variable& mels,
                           const std::vector<long>& labels) {
  Variable lg = clf.logits(mels);
  const long n = lg.value().dim(0), k = lg.value().dim(1);
  Tensor onehot({n, k});
  for (long i = 0; i < n; ++i) onehot[i * k + labels[static_cast<size_t>(i)]] = 1.0;
  Variable picked = reduce_rows(mul(lg, Variable::constant(onehot)));
  Variable nll = sub(logsumexp_rows(lg), picked);
  return scale(sum_all(nll), 1.0 / static_cast<double>(n));
}

}  // namespace

ClassifierTrainStats train_digit_classifier(DigitClassifier& clf,
                                            const data::MelCache& train_set,
                                            const data::MelCache& held_out,
                                            std::uint64_t presentations,
                                            long batch_size, double lr,
                                            std::uint64_t seed) {
  if (train_set.num_classes() < 2)
    throw DataError("train_digit_classifier: need at least two classes");
  train::Adam opt(clf.params(), train::AdamHyper{0.9, 0.999, 1e-8});

  ClassifierTrainStats stats;
  std::uint64_t step = 0;
  const long res = clf.config().input_res;
  while (stats.presentations < presentations) {
    const long batch = static_cast<long>(std::min<std::uint64_t>(
        static_cast<std::uint64_t>(batch_size),
        presentations - stats.presentations));
    data::Batch b = data::next_batch(train_set, batch, res,
                                     derive_seed(seed, 0xC1A55, step));
    Variable loss =
        cross_entropy(clf, Variable::constant(b.mels), b.labels);
    stats.final_loss = loss.scalar();
    if (!std::isfinite(stats.final_loss))
      throw NumericError("classifier training diverged (non-finite loss)");
    std::vector<char> reached;
    auto grads = grad_tensors(loss, clf.params().variables(), &reached);
    opt.step(lr, grads, reached);
    stats.presentations += static_cast<std::uint64_t>(batch);
    ++step;
  }
  stats.held_out_accuracy =
      held_out.count() > 0 ? classifier_accuracy(clf, held_out) : 0.0;
  return stats;
}

double classifier_accuracy(const DigitClassifier& clf,
                           const data::MelCache& cache) {
  if (cache.count() == 0) throw DataError("classifier_accuracy: empty cache");
  const long res = clf.config().input_res;
  const long chunk = 64;
  long correct = 0;
  for (long start = 0; start < cache.count(); start += chunk) {
    const long n = std::min(chunk, cache.count() - start);
    Tensor mels({n, 1, res, res});
    const long cells = res * res;
    for (long i = 0; i < n; ++i) {
      Tensor level = data::downsample_mel(cache.mel_db(start + i), res);
      for (long j = 0; j < cells; ++j)
        mels[i * cells + j] = dsp::db_to_unit(level[j]);
    }
    std::vector<long> pred = clf.predict(mels);
    for (long i = 0; i < n; ++i)
      if (pred[static_cast<size_t>(i)] == cache.label(start + i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(cache.count());
}

void DigitClassifier::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write classifier: " + path);
  out.write(kMagic, 4);
  auto put_u32 = [&](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
  };
  auto put_u64 = [&](std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
  };
  put_u32(kVersion);
  put_u64(static_cast<std::uint64_t>(cfg_.input_res));
  put_u64(static_cast<std::uint64_t>(cfg_.num_classes));
  put_u64(static_cast<std::uint64_t>(cfg_.base_channels));
  put_u64(cfg_.seed);
  put_u32(static_cast<std::uint32_t>(store_.entries().size()));
  for (const auto& p : store_.entries()) {
    put_u32(static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    const Tensor& t = p.var.value();
    put_u32(static_cast<std::uint32_t>(t.rank()));
    for (int i = 0; i < t.rank(); ++i)
      put_u64(static_cast<std::uint64_t>(t.dim(i)));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.numel() * 8));
  }
  if (!out) throw DataError("short write to classifier file: " + path);
}

DigitClassifier DigitClassifier::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open classifier: " + path);
  auto fail = [&](const char* what) {
    throw DataError("classifier file truncated reading " + std::string(what) +
                    ": " + path);
  };
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a classifier file: " + path);
  auto get_u32 = [&](const char* what) {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) fail(what);
    return v;
  };
  auto get_u64 = [&](const char* what) {
    std::uint64_t v;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) fail(what);
    return v;
  };
  if (get_u32("version") != kVersion)
    throw DataError("unsupported classifier file version: " + path);
  Config cfg;
  cfg.input_res = static_cast<long>(get_u64("input_res"));
  cfg.num_classes = static_cast<long>(get_u64("num_classes"));
  cfg.base_channels = static_cast<long>(get_u64("base_channels"));
  cfg.seed = get_u64("seed");
  DigitClassifier clf(cfg);
  const std::uint32_t count = get_u32("parameter count");
  if (count != clf.store_.entries().size())
    throw DataError("classifier parameter count mismatch: " + path);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = get_u32("name length");
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) fail("name");
    const std::uint32_t rank = get_u32("rank");
    std::vector<long> shape(rank);
    for (std::uint32_t j = 0; j < rank; ++j)
      shape[j] = static_cast<long>(get_u64("dims"));
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * 8));
    if (!in) fail("tensor data");
    Tensor& dst = clf.store_.at(name).var.node()->value;
    if (!dst.same_shape(t))
      throw DataError("classifier shape mismatch for " + name + ": " + path);
    dst = t;
  }
  return clf;
}

}  // namespace sgan::eval
