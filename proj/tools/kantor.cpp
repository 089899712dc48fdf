// Command-line front end: chord labeling, training, harmonization, metric
// reports. Batch-oriented; every command is deterministic under --seed.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kantor/harmonize.hpp"
#include "kantor/json_io.hpp"
#include "kantor/labeler.hpp"
#include "kantor/metrics.hpp"
#include "kantor/midi_io.hpp"
#include "kantor/model.hpp"

namespace fs = std::filesystem;
using namespace kantor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

ScoreFile load_validated(const std::string& path) {
  ScoreFile file = load_score(path);
  auto violations = validate(file.score);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << path << ": invalid score:";
    for (const auto& v : violations)
      msg << "\n  " << v.field << " (frame " << v.frame << "): " << v.message;
    throw DataError(msg.str());
  }
  return file;
}

std::vector<std::pair<std::string, ScoreFile>> load_corpus_dir(
    const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw DataError("no .json scores in " + dir);

  std::vector<std::pair<std::string, ScoreFile>> out;
  for (const auto& p : paths)
    out.emplace_back(fs::path(p).stem().string(), load_validated(p));
  return out;
}

HarmonicRhythm parse_rhythm(const std::string& s) {
  if (s == "beat") return HarmonicRhythm::Beat;
  if (s == "half") return HarmonicRhythm::Half;
  if (s == "measure") return HarmonicRhythm::Measure;
  throw CLI::ValidationError("--harmonic-rhythm", "expected beat|half|measure");
}

int cmd_label(const std::string& input, const std::string& out_path,
              const std::string& rhythm) {
  ScoreFile file = load_validated(input);
  Score labeled = label_score(file.score, parse_rhythm(rhythm));
  save_score(ScoreFile{labeled, file.meta_h, file.meta_seed}, out_path);

  double measures = double(measure_grid(labeled.time_signatures,
                                        labeled.total_frames)
                               .size());
  std::printf("%s: %zu chords (%.2f per measure) -> %s\n", input.c_str(),
              labeled.chords.size(), double(labeled.chords.size()) / measures,
              out_path.c_str());
  return kExitOk;
}

struct TrainArgs {
  std::string corpus_dir;
  std::string out_model = "model.kmdl";
  std::string report_path = "train_report.csv";
  std::string config_path;
  int epochs = 50;
  uint64_t seed = 1;
  std::vector<std::string> ablate;
  double lr = 0.01;
  int batch = 4;
  double val_split = 0.1;
  int hidden = 32;
  int blocks = 3;
  int embed_dim = 32;
  double dropout = 0.2;
};

ModelConfig build_config(const TrainArgs& args) {
  ModelConfig cfg;
  cfg.hidden = args.hidden;
  cfg.blocks = args.blocks;
  cfg.embed_dim = args.embed_dim;
  cfg.dropout = args.dropout;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw DataError("cannot open config: " + args.config_path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("hidden")) cfg.hidden = j["hidden"].get<int>();
    if (j.contains("blocks")) cfg.blocks = j["blocks"].get<int>();
    if (j.contains("embed_dim")) cfg.embed_dim = j["embed_dim"].get<int>();
    if (j.contains("dropout")) cfg.dropout = j["dropout"].get<double>();
  }
  cfg.seed = args.seed;
  for (const auto& a : args.ablate) {
    if (a == "chord")
      cfg.use_chord = false;
    else if (a == "beat")
      cfg.use_beat = false;
    else
      throw CLI::ValidationError("--ablate", "expected chord|beat");
  }
  return cfg;
}

int cmd_train(const TrainArgs& args) {
  auto corpus_files = load_corpus_dir(args.corpus_dir);
  ModelConfig cfg = build_config(args);

  std::vector<FrameSet> corpus;
  for (auto& [name, file] : corpus_files) {
    if (cfg.use_chord && file.score.chords.empty())
      throw DataError(name + ": unlabeled score (no chords); run `kantor "
                             "label` first or train with --ablate chord");
    corpus.push_back(encode_score(file.score));
  }

  if (corpus.size() == 1)
    std::fprintf(stderr,
                 "warning: corpus of 1 piece; validation = training\n");

  ReferenceModel model(cfg);
  TrainReport report =
      model.train(corpus, args.epochs, args.lr, args.batch, args.val_split);
  if (report.validation_is_training && corpus.size() > 1)
    std::fprintf(stderr, "warning: validation split empty; validation = "
                         "training\n");

  model.save(args.out_model);

  std::ofstream csv(args.report_path);
  if (!csv) throw DataError("cannot write report: " + args.report_path);
  csv << "epoch,train_loss,val_ter\n";
  for (const auto& e : report.epochs) {
    char line[96];
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f\n", e.epoch, e.train_loss,
                  e.val_ter);
    csv << line;
  }

  std::printf(
      "trained %d epochs on %zu pieces (hidden=%d blocks=%d chord=%d "
      "beat=%d)\nfinal loss %.4f, validation TER %.2f%%\nmodel -> %s\nreport "
      "-> %s\n",
      args.epochs, corpus.size(), cfg.hidden, cfg.blocks, int(cfg.use_chord),
      int(cfg.use_beat), report.epochs.back().train_loss,
      100.0 * report.epochs.back().val_ter, args.out_model.c_str(),
      args.report_path.c_str());
  return kExitOk;
}

struct HarmonizeArgs {
  std::string input;
  std::string model_path;
  double h = 0.5;
  uint64_t seed = 0;
  std::string policy = "multinomial";
  std::string attr_policy = "literal";
  std::string out_format = "json";
  std::string output;
  bool range_mask = false;
};

int cmd_harmonize(const HarmonizeArgs& args) {
  if (args.h < 0.0 || args.h > 1.0)
    throw CLI::ValidationError("--h", "harmonicity must be in [0,1]");

  ScoreFile file = load_validated(args.input);
  ReferenceModel model = ReferenceModel::load(args.model_path);

  HarmonizeOptions opts;
  opts.h = HarmonicityParam{args.h};
  opts.seed = args.seed;
  opts.range_mask = args.range_mask;
  if (args.policy == "greedy")
    opts.draw = SamplePolicy::Greedy;
  else if (args.policy != "multinomial")
    throw CLI::ValidationError("--policy", "expected multinomial|greedy");
  if (args.attr_policy == "hold-inherit")
    opts.attr = AttributePolicy::HoldInherit;
  else if (args.attr_policy != "literal")
    throw CLI::ValidationError("--attr-policy",
                               "expected literal|hold-inherit");

  HarmonizeResult result = harmonize(file.score, model, opts);
  for (const auto& w : result.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());

  std::string out_path = args.output;
  if (args.out_format == "json") {
    if (out_path.empty())
      out_path = fs::path(args.input).stem().string() + ".harmonized.json";
    ScoreFile out{result.score, args.h, args.seed};
    save_score(out, out_path);
  } else if (args.out_format == "midi") {
    if (out_path.empty())
      out_path = fs::path(args.input).stem().string() + ".harmonized.mid";
    smf::save(result.score, out_path);
  } else {
    throw CLI::ValidationError("--out", "expected json|midi");
  }
  std::printf("%s -> %s (h=%.2f seed=%llu)\n", args.input.c_str(),
              out_path.c_str(), args.h,
              static_cast<unsigned long long>(args.seed));
  return kExitOk;
}

std::vector<double> parse_sweep(const std::string& spec) {
  double lo, hi, step;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
      step <= 0.0)
    throw CLI::ValidationError("--sweep", "expected lo:hi:step");
  std::vector<double> out;
  for (double h = lo; h <= hi + 1e-9; h += step)
    out.push_back(std::round(h * 1e6) / 1e6);
  return out;
}

int cmd_evaluate(const std::string& dir, const std::string& sweep,
                 const std::string& out_csv) {
  auto files = load_corpus_dir(dir);

  std::vector<double> grid;
  if (!sweep.empty()) grid = parse_sweep(sweep);
  auto in_grid = [&](double h) {
    if (grid.empty()) return true;
    for (double g : grid)
      if (std::abs(g - h) < 1e-6) return true;
    return false;
  };

  std::ofstream csv(out_csv);
  if (!csv) throw DataError("cannot write: " + out_csv);
  csv << "piece_id,h,voice,ctnctr,pcs,mctd\n";

  std::vector<double> hs, ct, pc, mc;
  int skipped = 0;
  for (auto& [name, file] : files) {
    if (!file.meta_h) {
      std::fprintf(stderr, "warning: %s has no recorded h; skipped\n",
                   name.c_str());
      ++skipped;
      continue;
    }
    double h = *file.meta_h;
    if (!in_grid(h)) {
      ++skipped;
      continue;
    }
    PieceMetrics metrics = evaluate_piece(file.score);
    auto emit = [&](const char* voice, const VoiceMetrics& m) {
      char line[160];
      std::snprintf(line, sizeof line, "%s,%.2f,%s,%.6f,%.6f,%.6f\n",
                    name.c_str(), h, voice, m.ctnctr, m.pcs, m.mctd);
      csv << line;
    };
    for (Part p : {Part::Alto, Part::Tenor, Part::Bass})
      if (metrics.per_part[size_t(p)])
        emit(part_name(p), *metrics.per_part[size_t(p)]);
    emit("mean", metrics.mean);
    hs.push_back(h);
    ct.push_back(metrics.mean.ctnctr);
    pc.push_back(metrics.mean.pcs);
    mc.push_back(metrics.mean.mctd);
  }

  std::printf("wrote %s (%zu pieces, %d skipped)\n", out_csv.c_str(),
              hs.size(), skipped);
  std::set<double> distinct(hs.begin(), hs.end());
  if (distinct.size() >= 2) {
    std::printf("pearson r vs h: ctnctr %+0.3f  pcs %+0.3f  mctd %+0.3f\n",
                pearson(hs, ct), pearson(hs, pc), pearson(hs, mc));
  } else {
    std::printf("correlation skipped: need >=2 distinct h values\n");
  }
  return kExitOk;
}

int cmd_ter(const std::string& corpus_dir,
            const std::vector<std::string>& model_paths) {
  auto files = load_corpus_dir(corpus_dir);
  bool corpus_has_chords = false;
  std::vector<FrameSet> corpus;
  for (auto& [name, file] : files) {
    corpus_has_chords = corpus_has_chords || !file.score.chords.empty();
    corpus.push_back(encode_score(file.score));
  }

  std::printf("%-32s %8s %8s %8s %8s\n", "model", "alto", "tenor", "bass",
              "mean");
  for (const auto& path : model_paths) {
    ReferenceModel model = ReferenceModel::load(path);
    if (!model.config().use_chord && corpus_has_chords)
      std::fprintf(stderr,
                   "warning: %s ignores the corpus chord sequences "
                   "(chord-ablated model)\n",
                   path.c_str());
    TerReport ter = model.token_error_rate(corpus);
    std::printf("%-32s %7.2f%% %7.2f%% %7.2f%% %7.2f%%\n",
                fs::path(path).filename().string().c_str(), 100.0 * ter.alto,
                100.0 * ter.tenor, 100.0 * ter.bass, 100.0 * ter.mean());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chord-conditioned chorale harmonization toolkit"};
  app.require_subcommand(1);

  // label
  auto* label = app.add_subcommand("label", "chordify and attach chord labels");
  std::string label_input, label_out, label_rhythm = "beat";
  label->add_option("input", label_input, "score json")->required();
  label->add_option("-o,--out", label_out, "output path");
  label->add_option("--harmonic-rhythm", label_rhythm,
                    "label density: beat|half|measure");

  // train
  auto* train = app.add_subcommand("train", "train a model on a labeled corpus");
  TrainArgs train_args;
  train->add_option("corpus", train_args.corpus_dir, "directory of score json")
      ->required();
  train->add_option("-o,--out", train_args.out_model, "model output path");
  train->add_option("--report", train_args.report_path, "per-epoch csv");
  train->add_option("--config", train_args.config_path, "model config json");
  train->add_option("--epochs", train_args.epochs, "training epochs");
  train->add_option("--seed", train_args.seed, "rng seed");
  train->add_option("--ablate", train_args.ablate,
                    "drop a condition: chord|beat (repeatable)");
  train->add_option("--lr", train_args.lr, "learning rate");
  train->add_option("--batch", train_args.batch, "pieces per gradient step");
  train->add_option("--val-split", train_args.val_split,
                    "validation fraction");
  train->add_option("--hidden", train_args.hidden, "hidden size");
  train->add_option("--blocks", train_args.blocks, "block count");
  train->add_option("--embed-dim", train_args.embed_dim, "embedding size");
  train->add_option("--dropout", train_args.dropout, "dropout rate");

  // harmonize
  auto* harm = app.add_subcommand("harmonize", "generate alto/tenor/bass");
  HarmonizeArgs harm_args;
  harm->add_option("input", harm_args.input, "score json with soprano+chords")
      ->required();
  harm->add_option("-m,--model", harm_args.model_path, "trained model")
      ->required();
  harm->add_option("--h", harm_args.h, "harmonicity in [0,1], 0.5 neutral");
  harm->add_option("--seed", harm_args.seed, "rng seed");
  harm->add_option("--policy", harm_args.policy, "multinomial|greedy");
  harm->add_option("--attr-policy", harm_args.attr_policy,
                   "literal|hold-inherit");
  harm->add_option("--out", harm_args.out_format, "output format: json|midi");
  harm->add_option("-o,--output", harm_args.output, "output path");
  harm->add_flag("--range-mask", harm_args.range_mask,
                 "clamp voices to conventional SATB ranges");

  // evaluate
  auto* eval = app.add_subcommand("evaluate",
                                  "harmonicity metrics over generated scores");
  std::string eval_dir, eval_sweep, eval_out = "metrics.csv";
  eval->add_option("dir", eval_dir, "directory of generated json")->required();
  eval->add_option("--sweep", eval_sweep, "restrict to h grid lo:hi:step");
  eval->add_option("-o,--out", eval_out, "csv output path");

  // ter
  auto* ter = app.add_subcommand("ter", "teacher-forced token error rate");
  std::string ter_corpus;
  std::vector<std::string> ter_models;
  ter->add_option("corpus", ter_corpus, "directory of labeled score json")
      ->required();
  ter->add_option("-m,--model", ter_models, "model path (repeatable)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*label) {
      if (label_out.empty())
        label_out = fs::path(label_input).stem().string() + ".labeled.json";
      return cmd_label(label_input, label_out, label_rhythm);
    }
    if (*train) return cmd_train(train_args);
    if (*harm) return cmd_harmonize(harm_args);
    if (*eval) return cmd_evaluate(eval_dir, eval_sweep, eval_out);
    if (*ter) return cmd_ter(ter_corpus, ter_models);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const ModelVersionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const ModelCorruptError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}
