// tools/sganlab.cpp
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
//
// sganlab: spectrogram-GAN laboratory. Preprocess the Speech Commands
// digit subset into mel caches, train the conditional style-based GAN
// under progressive growing, sample mels, invert them to audio, and score
// models with Frechet distance and CER.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sgan/data/dataset.hpp"
#include "sgan/eval/evaluate.hpp"
#include "sgan/train/trainer.hpp"
#include "sgan/viz/plot.hpp"

namespace {

using namespace sgan;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

dsp::MelFilterbank standard_filterbank() {
  return dsp::mel_filterbank_matrix(dsp::kMelBands, dsp::kMelFMin,
                                    dsp::kMelFMax, dsp::kFftSize,
                                    dsp::kSampleRate);
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

train::TrainingConfig build_config(const std::string& config_path,
                                   const std::vector<std::string>& overrides,
                                   std::uint64_t seed, bool seed_given) {
  train::TrainingConfig cfg;
  if (!config_path.empty()) cfg = train::load_config_file(config_path);
  for (const std::string& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw UsageError("--set expects key=value, got '" + kv + "'");
    train::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (seed_given) cfg.seed = seed;
  cfg.validate();
  return cfg;
}

// Rebuilds generator + discriminator from the config embedded in a
// checkpoint; optimizer state is discarded.
struct LoadedModel {
  train::TrainingConfig cfg;
  std::unique_ptr<gan::Generator> g;
  std::unique_ptr<gan::Discriminator> d;
};

LoadedModel load_model(const std::string& checkpoint_path) {
  train::CheckpointMeta meta = train::read_checkpoint_meta(checkpoint_path);
  LoadedModel model;
  model.cfg = train::parse_config_text(meta.config_text);
  model.g = std::make_unique<gan::Generator>(
      train::generator_config(model.cfg), 0);
  model.d = std::make_unique<gan::Discriminator>(
      train::discriminator_config(model.cfg), 0);
  train::load_checkpoint(checkpoint_path, *model.g, *model.d, nullptr, nullptr);
  return model;
}

Tensor load_mel_record(const std::string& path, long index) {
  data::MelCache cache = data::MelCache::load(path);
  if (cache.count() == 0) throw DataError("mel file has no records: " + path);
  if (index < 0 || index >= cache.count())
    throw DataError("mel record index out of range: " + std::to_string(index));
  return cache.mel_db(index);
}

int run_preprocess(const std::string& root, const std::string& classes_csv,
                   const std::string& out) {
  std::vector<std::string> classes = split_csv(classes_csv);
  if (classes.empty()) classes = data::digit_words();
  auto entries = data::scan_dataset(root, classes);
  data::PreprocessReport report = data::preprocess_cache(entries, out);
  for (size_t i = 0; i < classes.size(); ++i) {
    const auto it = report.per_class.find(static_cast<int>(i));
    std::cout << classes[i] << "\t"
              << (it == report.per_class.end() ? 0 : it->second) << "\n";
  }
  std::cout << "skipped\t" << report.skipped << "\n";
  std::cout << "total " << report.written << "\n";
  return kExitOk;
}

int run_train(const std::string& cache_path, const std::string& config_path,
              const std::vector<std::string>& overrides, std::uint64_t seed,
              bool seed_given, const std::string& checkpoint_dir,
              const std::string& metrics_path, const std::string& resume) {
  train::TrainingConfig cfg = build_config(config_path, overrides, seed, seed_given);
  data::MelCache cache = data::MelCache::load(cache_path);

  std::unique_ptr<train::Trainer> trainer;
  if (resume.empty())
    trainer = std::make_unique<train::Trainer>(cfg, std::move(cache));
  else
    trainer = std::make_unique<train::Trainer>(resume, cfg, std::move(cache));

  std::ofstream metrics_file;
  std::ostream* metrics = &std::cout;
  if (!metrics_path.empty()) {
    metrics_file.open(metrics_path);
    if (!metrics_file) throw DataError("cannot write metrics: " + metrics_path);
    metrics = &metrics_file;
  }
  trainer->run(checkpoint_dir, metrics);
  std::cerr << "training complete: " << trainer->samples_seen()
            << " samples introduced\n";
  return kExitOk;
}

int run_generate(const std::string& checkpoint, int digit, long count,
                 std::uint64_t seed, const std::string& out_dir, bool wav,
                 int gl_iterations) {
  LoadedModel model = load_model(checkpoint);
  if (digit < 0 || digit >= model.cfg.num_classes)
    throw DataError("digit " + std::to_string(digit) +
                    " outside the model's class range [0, " +
                    std::to_string(model.cfg.num_classes) + ")");
  if (count < 1) throw UsageError("--count must be >= 1");
  std::filesystem::create_directories(out_dir);

  const long res = model.cfg.max_resolution;
  std::vector<long> labels(static_cast<size_t>(count), digit);
  Tensor mels = eval::sample_generated_mels(*model.g, labels, res, seed);
  dsp::MelFilterbank fb;
  if (wav) fb = standard_filterbank();

  const long cells = res * res;
  for (long i = 0; i < count; ++i) {
    Tensor grid({res, res});
    std::copy(mels.data() + i * cells, mels.data() + (i + 1) * cells,
              grid.data());
    dsp::MelSpectrogram mel = eval::mel_from_unit_grid(grid);
    data::MelCache one;
    one.append(digit, mel.values);
    const std::string base =
        (std::filesystem::path(out_dir) /
         ("digit" + std::to_string(digit) + "_" + std::to_string(i)))
            .string();
    one.save(base + ".mel");
    if (wav) dsp::write_wav(base + ".wav", dsp::mel_to_audio(mel, fb, gl_iterations));
  }
  std::cout << "wrote " << count << " mel file(s) to " << out_dir << "\n";
  return kExitOk;
}

int run_to_audio(const std::string& mel_file, long index,
                 const std::string& out_wav, int gl_iterations) {
  dsp::MelSpectrogram mel;
  mel.values = load_mel_record(mel_file, index);
  dsp::write_wav(out_wav,
                 dsp::mel_to_audio(mel, standard_filterbank(), gl_iterations));
  std::cout << "wrote " << out_wav << "\n";
  return kExitOk;
}

int run_plot(const std::string& mel_file, long index, const std::string& out_png) {
  viz::plot_mel_png(load_mel_record(mel_file, index), out_png);
  std::cout << "wrote " << out_png << "\n";
  return kExitOk;
}

int run_train_classifier(const std::string& cache_path, const std::string& out,
                         long resolution, long base_channels,
                         std::uint64_t presentations, long batch, double lr,
                         double holdout_fraction, std::uint64_t seed) {
  data::MelCache full = data::MelCache::load(cache_path);
  if (full.count() < 4) throw DataError("classifier cache too small");

  // seed-based holdout split
  RandomEngine rng(derive_seed(seed, 0x5917, 0));
  data::MelCache train_set, held_out;
  for (long i = 0; i < full.count(); ++i) {
    if (rng.uniform() < holdout_fraction)
      held_out.append(full.label(i), full.mel_db(i));
    else
      train_set.append(full.label(i), full.mel_db(i));
  }
  if (train_set.count() == 0 || (holdout_fraction > 0 && held_out.count() == 0))
    throw DataError("holdout split left an empty partition");

  eval::DigitClassifier::Config cfg;
  cfg.input_res = resolution;
  cfg.num_classes = std::max(full.num_classes(), 2);
  cfg.base_channels = base_channels;
  cfg.seed = seed;
  eval::DigitClassifier clf(cfg);
  eval::ClassifierTrainStats stats = eval::train_digit_classifier(
      clf, train_set, held_out.count() ? held_out : train_set, presentations,
      batch, lr, seed);
  clf.save(out);
  std::cout << "presentations\t" << stats.presentations << "\n";
  std::cout << "held_out_accuracy\t" << stats.held_out_accuracy << "\n";
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

int run_evaluate_fd(const std::string& checkpoint, const std::string& cache_path,
                    const std::string& classifier_path,
                    const std::string& embedding_cmd, long n_samples,
                    long n_real, int gl_iterations, std::uint64_t seed,
                    const std::string& workdir) {
  LoadedModel model = load_model(checkpoint);
  data::MelCache cache = data::MelCache::load(cache_path);
  double fd = 0.0;
  if (!embedding_cmd.empty()) {
    fd = eval::evaluate_fd_embedding(*model.g, {embedding_cmd}, cache,
                                     standard_filterbank(), n_real, n_samples,
                                     gl_iterations, seed, workdir);
  } else {
    if (classifier_path.empty())
      throw UsageError("evaluate-fd needs --classifier or --embedding-cmd");
    eval::DigitClassifier clf = eval::DigitClassifier::load(classifier_path);
    fd = eval::evaluate_fd_classifier(*model.g, clf, cache,
                                      model.cfg.max_resolution, n_samples, seed);
  }
  std::cout << "FD\t" << fd << "\n";
  return kExitOk;
}

int run_evaluate_cer(const std::string& checkpoint, const std::string& audio_dir,
                     const std::string& classifier_path,
                     const std::string& transcriber_cmd, long samples_per_digit,
                     int gl_iterations, std::uint64_t seed,
                     const std::string& workdir, const std::string& report_path) {
  if (transcriber_cmd.empty())
    throw UsageError("evaluate-cer needs --transcriber-cmd");
  eval::DigitClassifier clf = eval::DigitClassifier::load(classifier_path);
  const dsp::MelFilterbank fb = standard_filterbank();

  std::ofstream report_file;
  std::ostream* report = &std::cout;
  if (!report_path.empty()) {
    report_file.open(report_path);
    if (!report_file) throw DataError("cannot write report: " + report_path);
    report = &report_file;
  }

  eval::CerReport rep;
  if (!audio_dir.empty()) {
    rep = eval::evaluate_cer_audio_dir(audio_dir, clf, {transcriber_cmd}, fb,
                                       report);
  } else {
    if (checkpoint.empty())
      throw UsageError("evaluate-cer needs --checkpoint or --audio-dir");
    LoadedModel model = load_model(checkpoint);
    rep = eval::evaluate_cer_generator(*model.g, clf, {transcriber_cmd}, fb,
                                       samples_per_digit, gl_iterations, seed,
                                       workdir, report);
  }
  std::cerr << "scored " << rep.records.size() << " sample(s), "
            << rep.failures << " failure(s), total CER mean " << rep.mean
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sganlab: conditional spectrogram-GAN laboratory"};
  app.require_subcommand(1);
  std::function<int()> action;

  // ---- preprocess ----
  {
    auto* cmd = app.add_subcommand(
        "preprocess", "Scan a Speech Commands root and build the mel cache");
    auto root = std::make_shared<std::string>();
    auto classes = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(1);
    cmd->add_option("--data-root", *root, "dataset root directory")->required();
    cmd->add_option("--classes", *classes,
                    "comma-separated class words (default: the ten digits)");
    cmd->add_option("--out", *out, "output cache path")->required();
    cmd->add_option("--seed", *seed, "unused for preprocessing; accepted for symmetry");
    cmd->callback([=, &action]() {
      action = [=]() { return run_preprocess(*root, *classes, *out); };
    });
  }

  // ---- train ----
  {
    auto* cmd = app.add_subcommand("train", "Run adversarial training");
    auto cache = std::make_shared<std::string>();
    auto config = std::make_shared<std::string>();
    auto overrides = std::make_shared<std::vector<std::string>>();
    auto seed = std::make_shared<std::uint64_t>(1);
    auto ckpt_dir = std::make_shared<std::string>();
    auto metrics = std::make_shared<std::string>();
    auto resume = std::make_shared<std::string>();
    cmd->add_option("--cache", *cache, "preprocessed mel cache")->required();
    cmd->add_option("--config", *config, "training config file (key = value)");
    cmd->add_option("--set", *overrides,
                    "config override key=value (repeatable; wins over --config)");
    auto* seed_opt = cmd->add_option("--seed", *seed, "master seed (wins over config)");
    cmd->add_option("--checkpoint-dir", *ckpt_dir, "checkpoint directory");
    cmd->add_option("--metrics", *metrics, "metrics log path (default stdout)");
    cmd->add_option("--resume", *resume, "checkpoint to resume from");
    cmd->callback([=, &action]() {
      const bool seed_given = seed_opt->count() > 0;
      action = [=]() {
        return run_train(*cache, *config, *overrides, *seed, seed_given,
                         *ckpt_dir, *metrics, *resume);
      };
    });
  }

  // ---- generate ----
  {
    auto* cmd = app.add_subcommand("generate",
                                   "Sample conditional mel-spectrograms");
    auto checkpoint = std::make_shared<std::string>();
    auto digit = std::make_shared<int>(0);
    auto count = std::make_shared<long>(1);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto out_dir = std::make_shared<std::string>();
    auto wav = std::make_shared<bool>(false);
    auto gl = std::make_shared<int>(60);
    cmd->add_option("--checkpoint", *checkpoint)->required();
    cmd->add_option("--digit", *digit, "conditioning digit 0-9")->required();
    cmd->add_option("--count", *count, "samples to draw");
    cmd->add_option("--seed", *seed, "sampling seed");
    cmd->add_option("--out-dir", *out_dir)->required();
    cmd->add_flag("--wav", *wav, "also invert each sample to a WAV");
    cmd->add_option("--gl-iterations", *gl, "Griffin-Lim iterations");
    cmd->callback([=, &action]() {
      action = [=]() {
        return run_generate(*checkpoint, *digit, *count, *seed, *out_dir, *wav,
                            *gl);
      };
    });
  }

  // ---- to-audio ----
  {
    auto* cmd = app.add_subcommand("to-audio",
                                   "Invert a mel file to a 16 kHz WAV");
    auto mel = std::make_shared<std::string>();
    auto index = std::make_shared<long>(0);
    auto out = std::make_shared<std::string>();
    auto gl = std::make_shared<int>(60);
    auto seed = std::make_shared<std::uint64_t>(1);
    cmd->add_option("--mel-file", *mel)->required();
    cmd->add_option("--index", *index, "record index inside the mel file");
    cmd->add_option("--out-wav", *out)->required();
    cmd->add_option("--gl-iterations", *gl, "Griffin-Lim iterations");
    cmd->add_option("--seed", *seed, "unused; accepted for symmetry");
    cmd->callback([=, &action]() {
      action = [=]() { return run_to_audio(*mel, *index, *out, *gl); };
    });
  }

  // ---- plot ----
  {
    auto* cmd = app.add_subcommand("plot", "Render a mel file as a PNG");
    auto mel = std::make_shared<std::string>();
    auto index = std::make_shared<long>(0);
    auto out = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(1);
    cmd->add_option("--mel-file", *mel)->required();
    cmd->add_option("--index", *index, "record index inside the mel file");
    cmd->add_option("--out-png", *out)->required();
    cmd->add_option("--seed", *seed, "unused; accepted for symmetry");
    cmd->callback([=, &action]() {
      action = [=]() { return run_plot(*mel, *index, *out); };
    });
  }

  // ---- train-classifier ----
  {
    auto* cmd = app.add_subcommand(
        "train-classifier", "Train the digit classifier used for FD and CER");
    auto cache = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto resolution = std::make_shared<long>(128);
    auto base = std::make_shared<long>(16);
    auto presentations = std::make_shared<std::uint64_t>(150000);
    auto batch = std::make_shared<long>(64);
    auto lr = std::make_shared<double>(1e-3);
    auto holdout = std::make_shared<double>(0.12);
    auto seed = std::make_shared<std::uint64_t>(1);
    cmd->add_option("--cache", *cache)->required();
    cmd->add_option("--out", *out)->required();
    cmd->add_option("--resolution", *resolution, "input resolution");
    cmd->add_option("--base-channels", *base);
    cmd->add_option("--presentations", *presentations,
                    "training samples shown");
    cmd->add_option("--batch", *batch);
    cmd->add_option("--lr", *lr);
    cmd->add_option("--holdout-fraction", *holdout,
                    "seed-based held-out split fraction");
    cmd->add_option("--seed", *seed);
    cmd->callback([=, &action]() {
      action = [=]() {
        return run_train_classifier(*cache, *out, *resolution, *base,
                                    *presentations, *batch, *lr, *holdout,
                                    *seed);
      };
    });
  }

  // ---- evaluate-fd ----
  {
    auto* cmd = app.add_subcommand(
        "evaluate-fd", "Frechet distance between real and generated mels");
    auto checkpoint = std::make_shared<std::string>();
    auto cache = std::make_shared<std::string>();
    auto classifier = std::make_shared<std::string>();
    auto embed_cmd = std::make_shared<std::string>();
    auto n = std::make_shared<long>(5000);
    auto n_real = std::make_shared<long>(256);
    auto gl = std::make_shared<int>(60);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto workdir = std::make_shared<std::string>("fd_work");
    cmd->add_option("--checkpoint", *checkpoint)->required();
    cmd->add_option("--cache", *cache, "real-side mel cache")->required();
    cmd->add_option("--classifier", *classifier, "trained classifier file");
    cmd->add_option("--embedding-cmd", *embed_cmd,
                    "external embedding provider command (overrides --classifier)");
    cmd->add_option("--n-samples", *n, "generated sample count");
    cmd->add_option("--n-real", *n_real,
                    "real clips rendered for the embedding provider");
    cmd->add_option("--gl-iterations", *gl);
    cmd->add_option("--seed", *seed);
    cmd->add_option("--workdir", *workdir, "scratch dir for provider WAVs");
    cmd->callback([=, &action]() {
      action = [=]() {
        return run_evaluate_fd(*checkpoint, *cache, *classifier, *embed_cmd,
                               *n, *n_real, *gl, *seed, *workdir);
      };
    });
  }

  // ---- evaluate-cer ----
  {
    auto* cmd = app.add_subcommand(
        "evaluate-cer",
        "Character error rate via an external transcriber adapter");
    auto checkpoint = std::make_shared<std::string>();
    auto audio_dir = std::make_shared<std::string>();
    auto classifier = std::make_shared<std::string>();
    auto transcriber = std::make_shared<std::string>();
    auto per_digit = std::make_shared<long>(500);
    auto gl = std::make_shared<int>(60);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto workdir = std::make_shared<std::string>("cer_work");
    auto report = std::make_shared<std::string>();
    cmd->add_option("--checkpoint", *checkpoint, "generator checkpoint");
    cmd->add_option("--audio-dir", *audio_dir,
                    "score existing WAVs instead of generating");
    cmd->add_option("--classifier", *classifier, "pseudo-labeling classifier")
        ->required();
    cmd->add_option("--transcriber-cmd", *transcriber)->required();
    cmd->add_option("--samples-per-digit", *per_digit);
    cmd->add_option("--gl-iterations", *gl);
    cmd->add_option("--seed", *seed);
    cmd->add_option("--workdir", *workdir);
    cmd->add_option("--report", *report, "report path (default stdout)");
    cmd->callback([=, &action]() {
      action = [=]() {
        return run_evaluate_cer(*checkpoint, *audio_dir, *classifier,
                                *transcriber, *per_digit, *gl, *seed, *workdir,
                                *report);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
