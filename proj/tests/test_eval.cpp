// tests/test_eval.cpp
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

#include <fstream>
#include <sys/stat.h>

#include "doctest.h"
#include "sgan/eval/evaluate.hpp"
#include "test_util.hpp"

using namespace sgan;
using namespace sgan::eval;
using sgan::testing::TempDir;

namespace {

// Two synthetic mel classes: a bright band in the low mel range (class 0)
// or the high range (class 1), with jitter.
data::MelCache synthetic_cache(int records, std::uint64_t seed,
                               double jitter = 2.0) {
  data::MelCache cache;
  RandomEngine rng(seed);
  for (int i = 0; i < records; ++i) {
    Tensor mel = Tensor::full({128, 128}, -40.0);
    const int label = i % 2;
    const long base = label == 0 ? 24 : 88;
    const long shift = rng.uniform_int(9) - 4;
    for (long k = base + shift; k < base + shift + 18; ++k)
      for (long t = 16; t < 112; ++t)
        mel[k * 128 + t] = -6.0 + jitter * rng.uniform();
    cache.append(label, mel);
  }
  return cache;
}

DigitClassifier trained_toy_classifier(const data::MelCache& cache,
                                       long input_res, long classes = 2) {
  DigitClassifier::Config cfg;
  cfg.input_res = input_res;
  cfg.num_classes = classes;
  cfg.base_channels = 8;
  cfg.seed = 5;
  DigitClassifier clf(cfg);
  train_digit_classifier(clf, cache, cache, 1500, 16, 2e-3, 77);
  return clf;
}

void write_script(const std::string& path, const std::string& body) {
  {
    std::ofstream out(path);
    out << "#!/bin/sh\n" << body << "\n";
  }
  ::chmod(path.c_str(), 0755);
}

long brute_force_edit_distance(const std::string& a, const std::string& b) {
  // Textbook full-matrix DP, kept independent of the implementation.
  const size_t n = a.size(), m = b.size();
  std::vector<std::vector<long>> d(n + 1, std::vector<long>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) d[i][0] = static_cast<long>(i);
  for (size_t j = 0; j <= m; ++j) d[0][j] = static_cast<long>(j);
  for (size_t i = 1; i <= n; ++i)
    for (size_t j = 1; j <= m; ++j) {
      const long sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  return d[n][m];
}

}  // namespace

TEST_CASE("activation_stats hand cases") {
  Tensor two = Tensor::from({2, 2}, {0.0, 0.0, 2.0, 2.0});
  ActivationStats s = activation_stats(two);
  CHECK(s.mean[0] == doctest::Approx(1.0));
  CHECK(s.mean[1] == doctest::Approx(1.0));
  for (long i = 0; i < 4; ++i) CHECK(s.cov[i] == doctest::Approx(2.0));

  Tensor same = Tensor::from({3, 2}, {1.0, 2.0, 1.0, 2.0, 1.0, 2.0});
  ActivationStats s2 = activation_stats(same);
  for (long i = 0; i < 4; ++i) CHECK(s2.cov[i] == doctest::Approx(0.0));

  Tensor scalar = Tensor::from({2, 1}, {0.0, 2.0});
  ActivationStats s3 = activation_stats(scalar);
  CHECK(s3.mean[0] == doctest::Approx(1.0));
  CHECK(s3.cov[0] == doctest::Approx(2.0));  // unbiased

  CHECK_THROWS_AS(activation_stats(Tensor::from({1, 2}, {1.0, 2.0})), DataError);
}

TEST_CASE("activation_stats covariance is symmetric PSD") {
  RandomEngine rng(9);
  Tensor acts = rng.normal_tensor({40, 6});
  ActivationStats s = activation_stats(acts);
  for (long i = 0; i < 6; ++i)
    for (long j = 0; j < 6; ++j)
      CHECK(std::abs(s.cov[i * 6 + j] - s.cov[j * 6 + i]) < 1e-10);
  // PSD via the quadratic form on random vectors
  for (int t = 0; t < 20; ++t) {
    Tensor v = rng.normal_tensor({6});
    double q = 0.0;
    for (long i = 0; i < 6; ++i)
      for (long j = 0; j < 6; ++j) q += v[i] * s.cov[i * 6 + j] * v[j];
    CHECK(q >= -1e-8);
  }
}

TEST_CASE("frechet_distance closed forms") {
  ActivationStats a, b;
  a.mean = Tensor::from({1}, {0.0});
  a.cov = Tensor::from({1, 1}, {1.0});
  a.n = 10;
  b.mean = Tensor::from({1}, {1.0});
  b.cov = Tensor::from({1, 1}, {4.0});
  b.n = 10;
  // 1 + (1 + 4 - 2*2) = 2
  CHECK(frechet_distance(a, b) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(frechet_distance(a, a) == 0.0);
  CHECK(frechet_distance(b, a) == doctest::Approx(frechet_distance(a, b)));
}

TEST_CASE("frechet_distance matches the diagonal closed form") {
  RandomEngine rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const long d = 5;
    ActivationStats a, b;
    a.mean = rng.normal_tensor({d});
    b.mean = rng.normal_tensor({d});
    a.cov = Tensor({d, d});
    b.cov = Tensor({d, d});
    double expect = 0.0;
    for (long i = 0; i < d; ++i) {
      const double ca = 0.1 + rng.uniform();
      const double cb = 0.1 + rng.uniform();
      a.cov[i * d + i] = ca;
      b.cov[i * d + i] = cb;
      const double ds = std::sqrt(ca) - std::sqrt(cb);
      const double dm = a.mean[i] - b.mean[i];
      expect += ds * ds + dm * dm;
    }
    CHECK(std::abs(frechet_distance(a, b) - expect) < 1e-9);
  }
}

TEST_CASE("frechet_distance is symmetric and nonnegative on random PSD pairs") {
  RandomEngine rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const long d = 4;
    auto random_stats = [&]() {
      ActivationStats s;
      s.mean = rng.normal_tensor({d});
      Tensor base = rng.normal_tensor({d, d});
      s.cov = Tensor({d, d});
      for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) {
          double acc = 0.0;
          for (long k = 0; k < d; ++k) acc += base[i * d + k] * base[j * d + k];
          s.cov[i * d + j] = acc / d;
        }
      s.n = 8;
      return s;
    };
    ActivationStats a = random_stats();
    ActivationStats b = random_stats();
    const double ab = frechet_distance(a, b);
    const double ba = frechet_distance(b, a);
    CHECK(ab >= 0.0);
    CHECK(std::abs(ab - ba) < 1e-7 * (1.0 + ab));
    CHECK(frechet_distance(a, a) == 0.0);
  }
}

TEST_CASE("frechet_distance rejects dimension mismatch and non-PSD input") {
  ActivationStats a, b;
  a.mean = Tensor::from({2}, {0.0, 0.0});
  a.cov = Tensor::from({2, 2}, {1.0, 0.0, 0.0, 1.0});
  b.mean = Tensor::from({1}, {0.0});
  b.cov = Tensor::from({1, 1}, {1.0});
  CHECK_THROWS_AS(frechet_distance(a, b), DataError);

  ActivationStats bad = a;
  bad.cov = Tensor::from({2, 2}, {1.0, 0.0, 0.0, -0.5});
  CHECK_THROWS_AS(frechet_distance(a, bad), NumericError);
}

TEST_CASE("toy classifier separates synthetic classes almost perfectly") {
  data::MelCache train = synthetic_cache(128, 3);
  data::MelCache held = synthetic_cache(64, 11);
  DigitClassifier clf = trained_toy_classifier(train, 32);
  CHECK(classifier_accuracy(clf, held) >= 0.99);
  CHECK(classifier_accuracy(clf, train) >= 0.99);
}

TEST_CASE("classifier activations are deterministic rows of fixed dimension") {
  data::MelCache cache = synthetic_cache(8, 13);
  DigitClassifier::Config cfg;
  cfg.input_res = 32;
  cfg.num_classes = 2;
  cfg.base_channels = 8;
  DigitClassifier clf(cfg);

  Tensor acts = cache_activations(clf, cache);
  REQUIRE(acts.dim(0) == 8);
  REQUIRE(acts.dim(1) == clf.feature_dim());
  CHECK(acts.all_finite());

  // same input twice -> identical rows
  Tensor batch({2, 1, 32, 32});
  Tensor level = data::downsample_mel(cache.mel_db(0), 32);
  for (long j = 0; j < 1024; ++j) {
    batch[j] = dsp::db_to_unit(level[j]);
    batch[1024 + j] = dsp::db_to_unit(level[j]);
  }
  Tensor two = clf.activations(batch);
  for (long j = 0; j < clf.feature_dim(); ++j)
    CHECK(two[j] == two[clf.feature_dim() + j]);
}

TEST_CASE("classifier predictions are invariant to positive logit scaling") {
  data::MelCache cache = synthetic_cache(32, 17);
  DigitClassifier clf = trained_toy_classifier(cache, 32);
  Tensor batch({4, 1, 32, 32});
  for (long i = 0; i < 4; ++i) {
    Tensor level = data::downsample_mel(cache.mel_db(i), 32);
    for (long j = 0; j < 1024; ++j)
      batch[i * 1024 + j] = dsp::db_to_unit(level[j]);
  }
  std::vector<long> before = clf.predict(batch);
  for (long l : before) CHECK((l == 0 || l == 1));

  // scale the softmax head (and bias) by a positive constant
  for (auto name : {"clf.head.weight", "clf.head.bias"}) {
    Tensor& t = clf.params().at(name).var.node()->value;
    for (long i = 0; i < t.numel(); ++i) t[i] *= 3.5;
  }
  CHECK(clf.predict(batch) == before);
}

TEST_CASE("classifier save/load round trip preserves outputs bit-exactly") {
  TempDir tmp;
  data::MelCache cache = synthetic_cache(32, 19);
  DigitClassifier clf = trained_toy_classifier(cache, 32);
  clf.save(tmp.str("clf.bin"));
  DigitClassifier back = DigitClassifier::load(tmp.str("clf.bin"));

  Tensor batch({2, 1, 32, 32});
  for (long i = 0; i < 2; ++i) {
    Tensor level = data::downsample_mel(cache.mel_db(i), 32);
    for (long j = 0; j < 1024; ++j)
      batch[i * 1024 + j] = dsp::db_to_unit(level[j]);
  }
  Tensor a = clf.activations(batch);
  Tensor b = back.activations(batch);
  for (long i = 0; i < a.numel(); ++i) CHECK(a[i] == b[i]);
  CHECK(clf.predict(batch) == back.predict(batch));
}

TEST_CASE("cer hand cases") {
  CHECK(cer("three", "three") == 0.0);
  CHECK(cer("nine", "five") == doctest::Approx(0.5));  // two substitutions / 4
  CHECK(cer("two", "") == doctest::Approx(1.0));
  CHECK_THROWS_AS(cer("", "anything"), DataError);
}

TEST_CASE("cer agrees with a brute-force DP oracle on all short strings") {
  // all strings of length <= 6 over {a, b, c}
  std::vector<std::string> strings = {""};
  for (int len = 1; len <= 6; ++len) {
    std::vector<std::string> next;
    for (const std::string& s : strings)
      if (static_cast<int>(s.size()) == len - 1)
        for (char c : {'a', 'b', 'c'}) next.push_back(s + c);
    strings.insert(strings.end(), next.begin(), next.end());
  }
  REQUIRE(strings.size() == 1093);

  long checked = 0;
  for (const std::string& a : strings)
    for (const std::string& b : strings) {
      const long impl = levenshtein(a, b);
      const long oracle = brute_force_edit_distance(a, b);
      if (impl != oracle) {
        CAPTURE(a);
        CAPTURE(b);
        REQUIRE(impl == oracle);
      }
      if (!a.empty() &&
          cer(a, b) != static_cast<double>(oracle) / static_cast<double>(a.size())) {
        CAPTURE(a);
        CAPTURE(b);
        REQUIRE(false);
      }
      ++checked;
    }
  CHECK(checked == 1093 * 1093);
}

TEST_CASE("evaluate_cer over an audio directory with stub transcribers") {
  TempDir tmp;
  // Tones with distinct mel signatures; the classifier learns them from
  // their own mels, so pseudo-labels are exact.
  const dsp::MelFilterbank fb = dsp::mel_filterbank_matrix(
      128, dsp::kMelFMin, dsp::kMelFMax, dsp::kFftSize, dsp::kSampleRate);
  std::filesystem::create_directories(tmp.path() / "audio");
  data::MelCache cache;
  for (int i = 0; i < 12; ++i) {
    const int label = i % 2;
    const double freq = label == 0 ? 400.0 + 10 * i : 3000.0 + 25 * i;
    dsp::AudioClip clip = sgan::testing::make_tone(freq, 0.5);
    const std::string name =
        std::string(label == 0 ? "zero" : "one") + "_" + std::to_string(i) + ".wav";
    dsp::write_wav((tmp.path() / "audio" / name).string(), clip);
    cache.append(label, dsp::audio_to_mel(clip, fb).values);
  }
  DigitClassifier clf = trained_toy_classifier(cache, 32);
  REQUIRE(classifier_accuracy(clf, cache) == 1.0);

  // a transcriber that answers with the word carried in the filename
  write_script(tmp.str("true_word.sh"),
               "case \"$1\" in *zero*) echo zero;; *one*) echo one;; *) echo;; esac");
  std::ostringstream report;
  CerReport rep = evaluate_cer_audio_dir((tmp.path() / "audio").string(), clf,
                                         {tmp.str("true_word.sh")}, fb, &report);
  CHECK(rep.records.size() == 12);
  CHECK(rep.failures == 0);
  CHECK(rep.mean == doctest::Approx(0.0));
  CHECK(report.str().find("# mean\t0") != std::string::npos);

  // an empty-output stub drives CER to 1 everywhere
  write_script(tmp.str("empty.sh"), "echo ''");
  CerReport rep_empty = evaluate_cer_audio_dir(
      (tmp.path() / "audio").string(), clf, {tmp.str("empty.sh")}, fb, nullptr);
  CHECK(rep_empty.mean == doctest::Approx(1.0));

  // failing transcriber invocations are excluded but counted
  write_script(tmp.str("fail.sh"), "exit 3");
  CerReport rep_fail = evaluate_cer_audio_dir(
      (tmp.path() / "audio").string(), clf, {tmp.str("fail.sh")}, fb, nullptr);
  CHECK(rep_fail.records.empty());
  CHECK(rep_fail.failures == 12);
}

TEST_CASE("evaluate_cer through a toy generator counts per-digit samples") {
  TempDir tmp;
  gan::GeneratorConfig gcfg;
  gcfg.channels = 8;
  gcfg.num_classes = 2;
  gcfg.max_res = 32;
  gan::Generator g(gcfg, 3);

  data::MelCache cache = synthetic_cache(32, 23);
  DigitClassifier clf = trained_toy_classifier(cache, 32);
  const dsp::MelFilterbank fb = dsp::mel_filterbank_matrix(
      128, dsp::kMelFMin, dsp::kMelFMax, dsp::kFftSize, dsp::kSampleRate);

  write_script(tmp.str("word.sh"), "echo zero");
  std::ostringstream report;
  CerReport rep = evaluate_cer_generator(g, clf, {tmp.str("word.sh")}, fb, 3,
                                         4, 99, tmp.str("work"), &report);
  CHECK(rep.records.size() + rep.failures == 2 * 3);  // classes x per-digit
  CHECK(report.str().find("# scored") != std::string::npos);
  for (const CerRecord& r : rep.records) {
    CHECK((r.pseudo_label == 0 || r.pseudo_label == 1));
    CHECK(r.value >= 0.0);
  }
}

TEST_CASE("evaluate_fd is near zero when 'generated' comes from real data") {
  data::MelCache cache = synthetic_cache(400, 29);
  DigitClassifier clf = trained_toy_classifier(cache, 32);

  Tensor real_acts = cache_activations(clf, cache);
  ActivationStats real_stats = activation_stats(real_acts);

  // bootstrap 5000 rows from the same activations
  RandomEngine rng(31);
  const long d = clf.feature_dim();
  Tensor resampled({5000, d});
  for (long i = 0; i < 5000; ++i) {
    const long pick = rng.uniform_int(real_acts.dim(0));
    for (long j = 0; j < d; ++j) resampled[i * d + j] = real_acts[pick * d + j];
  }
  ActivationStats boot_stats = activation_stats(resampled);
  CHECK(frechet_distance(real_stats, boot_stats) < 0.5);
}

TEST_CASE("evaluate_fd over a toy generator is finite and seed-stable") {
  data::MelCache cache = synthetic_cache(64, 37);
  DigitClassifier clf = trained_toy_classifier(cache, 32);
  gan::GeneratorConfig gcfg;
  gcfg.channels = 8;
  gcfg.num_classes = 2;
  gcfg.max_res = 32;
  gan::Generator g(gcfg, 41);

  const double fd1 = evaluate_fd_classifier(g, clf, cache, 32, 64, 17);
  const double fd2 = evaluate_fd_classifier(g, clf, cache, 32, 64, 17);
  CHECK(std::isfinite(fd1));
  CHECK(fd1 == fd2);
  CHECK(fd1 > 0.0);
  CHECK_THROWS_AS(evaluate_fd_classifier(g, clf, cache, 16, 64, 17), DataError);
}

TEST_CASE("evaluate_fd through an embedding provider stub") {
  TempDir tmp;
  data::MelCache cache = synthetic_cache(12, 43);
  const dsp::MelFilterbank fb = dsp::mel_filterbank_matrix(
      128, dsp::kMelFMin, dsp::kMelFMax, dsp::kFftSize, dsp::kSampleRate);
  gan::GeneratorConfig gcfg;
  gcfg.channels = 8;
  gcfg.num_classes = 2;
  gcfg.max_res = 32;
  gan::Generator g(gcfg, 47);

  // crude waveform statistics as a stand-in embedding
  write_script(tmp.str("embed.py_sh"),
               "python3 - \"$1\" <<'PYEOF'\n"
               "import sys, wave, struct\n"
               "w = wave.open(sys.argv[1])\n"
               "n = w.getnframes()\n"
               "xs = struct.unpack('<%dh' % n, w.readframes(n))\n"
               "mean = sum(xs)/len(xs)\n"
               "rms = (sum(x*x for x in xs)/len(xs)) ** 0.5\n"
               "zc = sum(1 for a, b in zip(xs, xs[1:]) if (a < 0) != (b < 0))\n"
               "print(mean/32768, rms/32768, zc/len(xs))\n"
               "PYEOF");
  const double fd = evaluate_fd_embedding(g, {tmp.str("embed.py_sh")}, cache,
                                          fb, 6, 6, 3, 51, tmp.str("work"));
  CHECK(std::isfinite(fd));
  CHECK(fd >= 0.0);

  write_script(tmp.str("bad.sh"), "exit 7");
  CHECK_THROWS_AS(evaluate_fd_embedding(g, {tmp.str("bad.sh")}, cache, fb, 3,
                                        3, 2, 53, tmp.str("work2")),
                  NumericError);
}
