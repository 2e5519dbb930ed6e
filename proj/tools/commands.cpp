#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "alrn/checkpoint.hpp"
#include "alrn/dataset.hpp"
#include "alrn/evaluator.hpp"
#include "alrn/gradcheck.hpp"
#include "alrn/trainer.hpp"
#include "alrn/visualize.hpp"
#include "run_config.hpp"

namespace alrn::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const char* stage_name(TrainStage stage) {
  return stage == TrainStage::kKernelsOnly ? "kernels_only" : "end_to_end";
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

int cmd_synth(const RunConfig& rc, std::ostream& out) {
  require(!rc.out_dir.empty(), "synth needs --out");
  SyntheticData data = generate_synthetic(rc.synth);
  save_dataset(data, rc.out_dir);
  out << "wrote " << (fs::path(rc.out_dir) / "manifest.json").string() << " with "
      << data.dataset.samples.size() << " samples\n";
  return 0;
}

int cmd_train(RunConfig rc, const std::string& variant, std::ostream& out) {
  require(!rc.manifest.empty(), "train needs --manifest");
  require(!rc.out_dir.empty(), "train needs --out");
  SyntheticData data = load_dataset(rc.manifest);
  apply_variant(variant, rc.train.model, rc.train.loss);
  infer_model_shape(rc.train.model, data.dataset);

  fs::create_directories(rc.out_dir);
  std::ofstream log(fs::path(rc.out_dir) / "train_log.jsonl", std::ios::trunc);
  if (!log)
    throw FormatError("cannot write " +
                      (fs::path(rc.out_dir) / "train_log.jsonl").string());

  TrainResult result = train(data.dataset, rc.train, [&](const EpochRecord& r) {
    ordered_json line;
    line["epoch"] = r.epoch;
    line["stage"] = stage_name(r.stage);
    line["total"] = r.mean_total;
    line["ce"] = r.mean_cross_entropy;
    line["mse"] = r.mean_mse;
    line["seconds"] = r.wall_seconds;
    log << line.dump() << "\n";
    out << line.dump() << "\n";
  });

  const fs::path ck_dir = fs::path(rc.out_dir) / "checkpoint";
  save_checkpoint(ck_dir, result.params, rc.train.model);
  out << "checkpoint " << ck_dir.string() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& rc, const MuSweep& sweep, std::ostream& out) {
  require(!rc.manifest.empty(), "eval needs --manifest");
  require(!rc.checkpoint.empty(), "eval needs --checkpoint");
  SyntheticData data = load_dataset(rc.manifest);
  Checkpoint ck = load_checkpoint(rc.checkpoint);
  require(ck.config.num_attributes == data.dataset.num_attributes,
          "checkpoint has " + std::to_string(ck.config.num_attributes) +
              " attributes, dataset has " +
              std::to_string(data.dataset.num_attributes));

  if (!sweep.is_sweep) {
    GzslConfig g = rc.gzsl;
    g.mu = sweep.begin;
    EvalReport report = evaluate(data.dataset, ck.params, ck.config, g);
    out << to_json_string(report) << "\n";
    return 0;
  }
  for (double mu : sweep.values()) {
    GzslConfig g = rc.gzsl;
    g.mu = mu;
    EvalReport report = evaluate(data.dataset, ck.params, ck.config, g);
    ordered_json line;
    line["mu"] = mu;
    line["T1"] = report.czsl_top1;
    line["S"] = report.seen_acc;
    line["U"] = report.unseen_acc;
    line["H"] = report.harmonic;
    line["seen_predictions"] = report.seen_prediction_count;
    out << line.dump() << "\n";
  }
  return 0;
}

int cmd_gradcheck(const std::string& variant, const std::string& stage_sel,
                  std::uint64_t seed, bool all_variants, std::ostream& out) {
  std::vector<std::string> variants =
      all_variants ? variant_names() : std::vector<std::string>{variant};
  std::vector<TrainStage> stages;
  if (stage_sel == "kernels-only") {
    stages = {TrainStage::kKernelsOnly};
  } else if (stage_sel == "end-to-end") {
    stages = {TrainStage::kEndToEnd};
  } else if (stage_sel == "both") {
    stages = {TrainStage::kKernelsOnly, TrainStage::kEndToEnd};
  } else {
    throw ConfigError("unknown stage \"" + stage_sel + "\"");
  }

  bool all_passed = true;
  for (const std::string& v : variants) {
    for (TrainStage stage : stages) {
      GradCheckSpec spec = default_gradcheck_spec();
      spec.seed = seed;
      spec.stage = stage;
      apply_variant(v, spec.model, spec.loss);
      GradCheckResult result = run_gradcheck(spec);
      out << "variant=" << v << " stage=" << stage_name(stage) << "\n";
      for (const GradCheckGroup& g : result.groups) {
        if (g.skipped) {
          out << "  " << g.name << "  frozen (skipped)\n";
        } else {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.3e", g.max_rel_error);
          out << "  " << g.name << "  max_rel_error=" << buf << "\n";
        }
      }
      out << (result.passed ? "  PASS" : "  FAIL") << "\n";
      all_passed = all_passed && result.passed;
    }
  }
  return all_passed ? 0 : 1;
}

int cmd_visualize(const RunConfig& rc, int sample_index, int attribute,
                  std::ostream& out) {
  require(!rc.manifest.empty(), "visualize needs --manifest");
  require(!rc.checkpoint.empty(), "visualize needs --checkpoint");
  require(!rc.out_dir.empty(), "visualize needs --out");
  SyntheticData data = load_dataset(rc.manifest);
  Checkpoint ck = load_checkpoint(rc.checkpoint);
  require(sample_index >= 0 &&
              sample_index < static_cast<int>(data.dataset.samples.size()),
          "sample index " + std::to_string(sample_index) + " outside " +
              std::to_string(data.dataset.samples.size()) + " samples");

  auto [trace, revised] = model_forward(data.dataset.samples[sample_index].features,
                                        ck.params, data.dataset.semantics, ck.config);
  fs::create_directories(rc.out_dir);
  int first = attribute < 0 ? 0 : attribute;
  int last = attribute < 0 ? trace.attention.channels - 1 : attribute;
  int written = 0;
  for (int n = first; n <= last; ++n) {
    char name[48];
    std::snprintf(name, sizeof(name), "attention_s%05d_a%02d.pgm", sample_index, n);
    export_attention(trace.attention, n, fs::path(rc.out_dir) / name);
    ++written;
  }
  out << "wrote " << written << " attention maps to " << rc.out_dir << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"attribute-attention zero-shot classifier"};
  app.require_subcommand(1);
  // a repeated flag overrides its earlier occurrence
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  struct Flags {
    std::string config_file, preset;
    std::uint64_t seed = 0;
    std::string manifest, checkpoint, out_dir;
    std::string variant = "full";
    std::string mu_text;
    std::string stage = "both";
    bool all_variants = false;
    bool raw_czsl = false;
    int sample_index = 0;
    int attribute = -1;
    double tau = 0.0, lambda = 0.0, lr = 0.0;
    int epochs = 0, batches = 0, pretrain = 0, way = 0, shot = 0;
  } f;

  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--config", f.config_file, "JSON configuration file");
    sc->add_option("--preset", f.preset,
                   "named preset applied before the config file")
        ->check(CLI::IsMember(preset_names()));
    sc->add_option("--seed", f.seed, "seed for generation and training");
    return sc;
  };

  CLI::App* synth = add_common(app.add_subcommand("synth", "generate a synthetic dataset"));
  synth->add_option("--out", f.out_dir, "output directory");

  CLI::App* tr = add_common(app.add_subcommand("train", "train on a dataset manifest"));
  tr->add_option("--manifest", f.manifest, "dataset manifest path or directory");
  tr->add_option("--out", f.out_dir, "output directory for checkpoint and log");
  tr->add_option("--ablation", f.variant, "structure variant")
      ->check(CLI::IsMember(variant_names()));
  tr->add_option("--epochs", f.epochs, "total epochs");
  tr->add_option("--batches-per-epoch", f.batches, "episodes per epoch");
  tr->add_option("--pretrain-epochs", f.pretrain, "kernel-only epochs");
  tr->add_option("--episode-classes", f.way, "classes per episode");
  tr->add_option("--shots", f.shot, "samples per episode class");
  tr->add_option("--lr", f.lr, "learning rate");
  tr->add_option("--tau", f.tau, "score temperature");
  tr->add_option("--lambda", f.lambda, "squared-error loss weight");

  CLI::App* ev = add_common(app.add_subcommand("eval", "evaluate a checkpoint"));
  ev->add_option("--manifest", f.manifest, "dataset manifest path or directory");
  ev->add_option("--checkpoint", f.checkpoint, "checkpoint directory");
  ev->add_option("--mu", f.mu_text, "calibration value X, or begin:end:step sweep");
  ev->add_option("--tau", f.tau, "score temperature");
  ev->add_flag("--raw-czsl", f.raw_czsl,
               "unseen-only protocol uses raw class semantics");

  CLI::App* gc = add_common(
      app.add_subcommand("gradcheck", "compare analytic and numeric gradients"));
  gc->add_option("--ablation", f.variant, "structure variant")
      ->check(CLI::IsMember(variant_names()));
  gc->add_option("--stage", f.stage, "kernels-only, end-to-end, or both")
      ->check(CLI::IsMember(std::vector<std::string>{"kernels-only", "end-to-end", "both"}));
  gc->add_flag("--all", f.all_variants, "run every variant");

  CLI::App* vis = add_common(app.add_subcommand("visualize", "export attention maps"));
  vis->add_option("--manifest", f.manifest, "dataset manifest path or directory");
  vis->add_option("--checkpoint", f.checkpoint, "checkpoint directory");
  vis->add_option("--out", f.out_dir, "output directory for PGM files");
  vis->add_option("--sample", f.sample_index, "sample index in the manifest");
  vis->add_option("--attribute", f.attribute, "attribute channel, -1 for all");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("alrn");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    RunConfig rc;
    CLI::App* sc = app.get_subcommands().front();
    // not every option exists on every subcommand
    auto given = [sc](const std::string& name) {
      const CLI::Option* opt = sc->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--preset")) apply_preset(rc, f.preset);
    if (given("--config")) apply_config_file(rc, f.config_file);
    if (given("--seed")) rc.set_seed(f.seed);
    if (given("--manifest")) rc.manifest = f.manifest;
    if (given("--checkpoint")) rc.checkpoint = f.checkpoint;
    if (given("--out")) rc.out_dir = f.out_dir;
    if (given("--tau")) {
      rc.train.loss.tau = f.tau;
      rc.gzsl.tau = f.tau;
      rc.gzsl_tau_explicit = true;
    }
    if (given("--lambda")) rc.train.loss.mse_weight = f.lambda;
    if (given("--lr")) rc.train.learning_rate = f.lr;
    if (given("--epochs")) rc.train.epochs = f.epochs;
    if (given("--batches-per-epoch")) rc.train.batches_per_epoch = f.batches;
    if (given("--pretrain-epochs")) rc.train.pretrain_epochs = f.pretrain;
    if (given("--episode-classes")) rc.train.episode_classes = f.way;
    if (given("--shots")) rc.train.shots_per_class = f.shot;
    if (f.raw_czsl) rc.gzsl.czsl_use_revised = false;
    finalize(rc);

    if (sc == synth) return cmd_synth(rc, out);
    if (sc == tr) return cmd_train(rc, f.variant, out);
    if (sc == ev) {
      MuSweep sweep;
      if (given("--mu")) {
        sweep = parse_mu(f.mu_text);
      } else {
        sweep.begin = rc.gzsl.mu;
      }
      return cmd_eval(rc, sweep, out);
    }
    if (sc == gc) return cmd_gradcheck(f.variant, f.stage, f.seed, f.all_variants, out);
    if (sc == vis) return cmd_visualize(rc, f.sample_index, f.attribute, out);
    err << "error: no command\n";
    return 2;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace alrn::cli
