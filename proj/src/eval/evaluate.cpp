// src/eval/evaluate.cpp
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

#include "sgan/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "sgan/dsp/wav.hpp"

namespace sgan::eval {

using namespace sgan::nn;

namespace {

constexpr long kEvalChunk = 32;

enum EvalStream : std::uint64_t {
  kEvalZ = 0xE1,
  kEvalNoise,
  kEvalLabels,
  kEvalRealPick,
};

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = static_cast<size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

Tensor sample_generated_mels(const gan::Generator& g,
                             const std::vector<long>& labels, long resolution,
                             std::uint64_t seed) {
  NoGradGuard off;
  const long n = static_cast<long>(labels.size());
  const long cells = resolution * resolution;
  Tensor out({n, 1, resolution, resolution});
  for (long start = 0, chunk_idx = 0; start < n; start += kEvalChunk, ++chunk_idx) {
    const long m = std::min(kEvalChunk, n - start);
    RandomEngine z_rng(derive_seed(seed, kEvalZ, chunk_idx));
    Variable z = Variable::constant(
        z_rng.normal_tensor({m, g.config().latent_dim}));
    std::vector<long> chunk_labels(labels.begin() + start,
                                   labels.begin() + start + m);
    RandomEngine noise_rng(derive_seed(seed, kEvalNoise, chunk_idx));
    auto noises = g.sample_noises(resolution, m, noise_rng);
    Variable mels = g.forward(z, chunk_labels, resolution, 1.0, noises);
    std::copy(mels.value().data(), mels.value().data() + m * cells,
              out.data() + start * cells);
  }
  return out;
}

Tensor fit_mel_grid(const Tensor& grid, long target) {
  if (grid.rank() != 2 || grid.dim(0) != grid.dim(1))
    throw DataError("fit_mel_grid: square grid required");
  const long src = grid.dim(0);
  if (target == src) return grid;
  if (target < src) return data::downsample_mel(grid, target);
  if (target % src != 0)
    throw DataError("fit_mel_grid: target must be a multiple of the source");
  NoGradGuard off;
  Variable x = Variable::constant(grid.reshaped({1, 1, src, src}));
  long r = src;
  while (r < target) {
    x = upsample2_bilinear(x);
    r *= 2;
  }
  return x.value().reshaped({target, target});
}

dsp::MelSpectrogram mel_from_unit_grid(const Tensor& grid) {
  Tensor full = fit_mel_grid(grid, dsp::kMelBands);
  dsp::MelSpectrogram mel;
  mel.values = Tensor({dsp::kMelBands, dsp::kMelFrames});
  for (long i = 0; i < full.numel(); ++i)
    mel.values[i] = std::max(dsp::unit_to_db(full[i]), dsp::kDbFloor);
  return mel;
}

Tensor cache_activations(const DigitClassifier& clf,
                         const data::MelCache& cache) {
  if (cache.count() == 0) throw DataError("cache_activations: empty cache");
  const long res = clf.config().input_res;
  const long cells = res * res;
  Tensor acts({cache.count(), clf.feature_dim()});
  for (long start = 0; start < cache.count(); start += kEvalChunk) {
    const long m = std::min(kEvalChunk, cache.count() - start);
    Tensor mels({m, 1, res, res});
    for (long i = 0; i < m; ++i) {
      Tensor level = data::downsample_mel(cache.mel_db(start + i), res);
      for (long j = 0; j < cells; ++j)
        mels[i * cells + j] = dsp::db_to_unit(level[j]);
    }
    Tensor a = clf.activations(mels);
    std::copy(a.data(), a.data() + m * clf.feature_dim(),
              acts.data() + start * clf.feature_dim());
  }
  return acts;
}

double evaluate_fd_classifier(const gan::Generator& g,
                              const DigitClassifier& clf,
                              const data::MelCache& real_cache,
                              long resolution, long n_samples,
                              std::uint64_t seed) {
  if (n_samples < 2)
    throw DataError("evaluate_fd: need at least two generated samples");
  if (clf.config().input_res != resolution)
    throw DataError("evaluate_fd: classifier resolution " +
                    std::to_string(clf.config().input_res) +
                    " does not match requested " + std::to_string(resolution));

  ActivationStats real_stats =
      activation_stats(cache_activations(clf, real_cache));

  RandomEngine label_rng(derive_seed(seed, kEvalLabels, 0));
  std::vector<long> labels(static_cast<size_t>(n_samples));
  for (auto& l : labels) l = label_rng.uniform_int(g.config().num_classes);
  Tensor mels = sample_generated_mels(g, labels, resolution, seed);
  Tensor acts = clf.activations(mels);
  ActivationStats gen_stats = activation_stats(acts);
  return frechet_distance(real_stats, gen_stats);
}

namespace {

std::vector<double> embed_or_throw(const EmbeddingProvider& provider,
                                   const std::string& wav_path) {
  auto e = embed(provider, wav_path);
  if (!e)
    throw NumericError("embedding provider failed on " + wav_path);
  return *e;
}

}  // namespace

double evaluate_fd_embedding(const gan::Generator& g,
                             const EmbeddingProvider& provider,
                             const data::MelCache& real_cache,
                             const dsp::MelFilterbank& fb, long n_real,
                             long n_samples, int gl_iterations,
                             std::uint64_t seed, const std::string& workdir) {
  if (n_real < 2 || n_samples < 2)
    throw DataError("evaluate_fd: need at least two samples per side");
  std::filesystem::create_directories(workdir);

  auto stats_of = [&](const std::vector<Tensor>& mels128_db,
                      const std::string& tag) {
    Tensor acts;
    long dim = -1;
    for (size_t i = 0; i < mels128_db.size(); ++i) {
      dsp::MelSpectrogram mel;
      mel.values = mels128_db[i];
      dsp::AudioClip clip = dsp::mel_to_audio(mel, fb, gl_iterations);
      const std::string path =
          (std::filesystem::path(workdir) /
           (tag + "_" + std::to_string(i) + ".wav")).string();
      dsp::write_wav(path, clip);
      std::vector<double> e = embed_or_throw(provider, path);
      if (dim < 0) {
        dim = static_cast<long>(e.size());
        acts = Tensor({static_cast<long>(mels128_db.size()), dim});
      } else if (static_cast<long>(e.size()) != dim) {
        throw NumericError("embedding provider returned inconsistent dims");
      }
      for (long j = 0; j < dim; ++j) acts[static_cast<long>(i) * dim + j] = e[j];
    }
    return activation_stats(acts);
  };

  RandomEngine pick_rng(derive_seed(seed, kEvalRealPick, 0));
  std::vector<Tensor> real_mels;
  for (long i = 0; i < n_real; ++i)
    real_mels.push_back(real_cache.mel_db(pick_rng.uniform_int(real_cache.count())));

  RandomEngine label_rng(derive_seed(seed, kEvalLabels, 1));
  std::vector<long> labels(static_cast<size_t>(n_samples));
  for (auto& l : labels) l = label_rng.uniform_int(g.config().num_classes);
  Tensor gen = sample_generated_mels(g, labels, g.config().max_res, seed + 1);
  std::vector<Tensor> gen_mels;
  const long r = g.config().max_res;
  for (long i = 0; i < n_samples; ++i) {
    Tensor grid({r, r});
    std::copy(gen.data() + i * r * r, gen.data() + (i + 1) * r * r, grid.data());
    gen_mels.push_back(mel_from_unit_grid(grid).values);
  }

  ActivationStats sr = stats_of(real_mels, "real");
  ActivationStats sg = stats_of(gen_mels, "gen");
  return frechet_distance(sr, sg);
}

namespace {

void finalize_report(CerReport& rep, std::ostream* out) {
  std::vector<double> all;
  std::map<int, std::vector<double>> by_digit;
  for (const CerRecord& r : rep.records) {
    all.push_back(r.value);
    by_digit[r.pseudo_label].push_back(r.value);
  }
  if (!all.empty()) {
    double sum = 0.0;
    for (double v : all) sum += v;
    rep.mean = sum / static_cast<double>(all.size());
    rep.median = percentile(all, 0.5);
    rep.p10 = percentile(all, 0.1);
    rep.p90 = percentile(all, 0.9);
  }
  for (auto& [digit, values] : by_digit)
    rep.per_digit_median[digit] = percentile(values, 0.5);

  if (!out) return;
  *out << "index\tconditioned\tpseudo\treference\thypothesis\tcer\n";
  for (const CerRecord& r : rep.records)
    *out << r.index << "\t" << r.conditioned_digit << "\t" << r.pseudo_label
         << "\t" << r.reference << "\t" << r.hypothesis << "\t" << r.value
         << "\n";
  *out << "# summary\n";
  *out << "# scored\t" << rep.records.size() << "\n";
  *out << "# failures\t" << rep.failures << "\n";
  *out << "# mean\t" << rep.mean << "\n";
  *out << "# median\t" << rep.median << "\n";
  *out << "# p10\t" << rep.p10 << "\n";
  *out << "# p90\t" << rep.p90 << "\n";
  for (const auto& [digit, median] : rep.per_digit_median)
    *out << "# median_digit_" << digit << "\t" << median << "\n";
}

}  // namespace

CerReport evaluate_cer_generator(const gan::Generator& g,
                                 const DigitClassifier& clf,
                                 const TranscriberAdapter& adapter,
                                 const dsp::MelFilterbank& fb,
                                 long samples_per_digit, int gl_iterations,
                                 std::uint64_t seed,
                                 const std::string& workdir,
                                 std::ostream* report) {
  if (samples_per_digit < 1)
    throw DataError("evaluate_cer: samples_per_digit must be >= 1");
  std::filesystem::create_directories(workdir);
  const auto& words = data::digit_words();
  const long res = g.config().max_res;
  const long clf_res = clf.config().input_res;
  const long cells = res * res;

  CerReport rep;
  long index = 0;
  for (long digit = 0; digit < g.config().num_classes; ++digit) {
    std::vector<long> labels(static_cast<size_t>(samples_per_digit), digit);
    Tensor mels = sample_generated_mels(g, labels, res,
                                        seed + static_cast<std::uint64_t>(digit));
    for (long i = 0; i < samples_per_digit; ++i, ++index) {
      Tensor grid({res, res});
      std::copy(mels.data() + i * cells, mels.data() + (i + 1) * cells,
                grid.data());

      // pseudo-label with the classifier, per the evaluation protocol
      Tensor clf_in({1, 1, clf_res, clf_res});
      Tensor fitted = fit_mel_grid(grid, clf_res);
      std::copy(fitted.data(), fitted.data() + clf_res * clf_res, clf_in.data());
      const int pseudo = static_cast<int>(clf.predict(clf_in)[0]);

      dsp::MelSpectrogram mel = mel_from_unit_grid(grid);
      dsp::AudioClip clip = dsp::mel_to_audio(mel, fb, gl_iterations);
      const std::string wav_path =
          (std::filesystem::path(workdir) /
           ("cer_d" + std::to_string(digit) + "_" + std::to_string(i) + ".wav"))
              .string();
      dsp::write_wav(wav_path, clip);

      auto hyp = transcribe(adapter, wav_path);
      if (!hyp) {
        ++rep.failures;
        continue;
      }
      CerRecord rec;
      rec.index = index;
      rec.conditioned_digit = static_cast<int>(digit);
      rec.pseudo_label = pseudo;
      rec.reference = words[static_cast<size_t>(pseudo)];
      rec.hypothesis = *hyp;
      rec.value = cer(rec.reference, rec.hypothesis);
      rep.records.push_back(std::move(rec));
    }
  }
  finalize_report(rep, report);
  return rep;
}

CerReport evaluate_cer_audio_dir(const std::string& audio_dir,
                                 const DigitClassifier& clf,
                                 const TranscriberAdapter& adapter,
                                 const dsp::MelFilterbank& fb,
                                 std::ostream* report) {
  std::vector<std::string> paths;
  for (const auto& e : std::filesystem::directory_iterator(audio_dir))
    if (e.is_regular_file() && e.path().extension() == ".wav")
      paths.push_back(e.path().string());
  std::sort(paths.begin(), paths.end());
  if (paths.empty())
    throw DataError("evaluate_cer: no .wav files under " + audio_dir);

  const auto& words = data::digit_words();
  const long clf_res = clf.config().input_res;
  CerReport rep;
  long index = 0;
  for (const std::string& path : paths) {
    dsp::AudioClip clip;
    try {
      clip = dsp::read_wav(path);
    } catch (const Error& err) {
      log_warn(std::string("evaluate_cer: ") + err.what());
      ++rep.failures;
      continue;
    }
    dsp::MelSpectrogram mel = dsp::audio_to_mel(clip, fb);
    Tensor unit({dsp::kMelBands, dsp::kMelFrames});
    for (long i = 0; i < unit.numel(); ++i)
      unit[i] = dsp::db_to_unit(mel.values[i]);
    Tensor fitted = fit_mel_grid(unit, clf_res);
    Tensor clf_in = fitted.reshaped({1, 1, clf_res, clf_res});
    const int pseudo = static_cast<int>(clf.predict(clf_in)[0]);

    auto hyp = transcribe(adapter, path);
    if (!hyp) {
      ++rep.failures;
      continue;
    }
    CerRecord rec;
    rec.index = index++;
    rec.conditioned_digit = -1;
    rec.pseudo_label = pseudo;
    rec.reference = words[static_cast<size_t>(pseudo)];
    rec.hypothesis = *hyp;
    rec.value = cer(rec.reference, rec.hypothesis);
    rep.records.push_back(std::move(rec));
  }
  finalize_report(rep, report);
  return rep;
}

}  // namespace sgan::eval
