#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "banet/checkpoint.hpp"
#include "banet/config.hpp"
#include "banet/error.hpp"
#include "banet/gradcheck.hpp"
#include "banet/metrics.hpp"
#include "banet/pipeline.hpp"
#include "banet/probe.hpp"
#include "banet/synth.hpp"

namespace banet::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  // synth
  std::string out;
  SynthSpec synth;
  // train / ablate
  std::string data;
  std::string test;
  std::string config;
  std::vector<std::string> overrides;
  std::string log;
  std::size_t iters = 0;
  // infer
  std::string checkpoint;
  bool diagnostics = false;
  // eval
  std::string pred;
  std::string gt;
  // gradcheck
  std::size_t size = 16;
  std::uint64_t seed = 1;
  // probe-isd
  std::size_t branches = 5;
  bool no_inter = false;
};

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

RunConfig resolve_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw FormatError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.iters > 0) cfg.train.max_iters = o.iters;
  apply_env_overrides(cfg);
  return cfg;
}

fs::path image_dir_of(const fs::path& p) { return fs::is_directory(p / "images") ? p / "images" : p; }

int cmd_synth(const Options& o, std::ostream& out) {
  const SynthManifest m = synth_dataset(o.synth, o.out);
  out << "wrote " << m.names.size() << " samples to " << o.out << "\n";
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const Dataset data = load_dataset(o.data, cfg.train.boundary_radius);
  const fs::path log_path = o.log.empty() ? fs::path(o.out + ".log") : fs::path(o.log);
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot write " + log_path.string());
  const TrainRun run = run_training(cfg, data, &log);
  save_checkpoint(o.out, cfg, run.network, run.state);
  const auto& first = run.log.front();
  const auto& last = run.log.back();
  out << "trained " << run.log.size() << " iterations on " << data.samples.size() << " images\n";
  out << "loss " << format_log_line(first) << " -> " << format_log_line(last) << "\n";
  out << "checkpoint " << o.out << "\n";
  return 0;
}

int cmd_infer(const Options& o, std::ostream& out) {
  const LoadedCheckpoint ck = load_checkpoint(o.checkpoint);
  const double conflict = write_predictions(ck.network, image_dir_of(o.data), o.out, o.diagnostics);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.9g", conflict);
  out << "wrote saliency maps to " << o.out << "\n";
  out << "mean fraction of pixels with M_B*M_I > 0.25: " << buf << "\n";
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const EvalReport report = evaluate(o.pred, o.gt);
  if (!o.out.empty()) write_report(report, o.out);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "images %zu  MAE %.9g  adaptive F %.9g  weighted F %.9g  max F %.9g\n",
                report.images.size(), report.mean_mae, report.mean_adaptive_fbeta,
                report.mean_weighted_fbeta, report.max_fmeasure);
  out << buf;
  return 0;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  std::size_t params = 0;
  const GradCheckResult net = run_network_gradcheck(o.size, o.seed, &params);
  const GradCheckResult elem = run_elementwise_gradcheck(o.seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = net.max_relative_error < 1e-4 && elem.max_relative_error < 1e-6;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "network parameters checked: %zu\n"
                "max relative error (network): %.3e at %s\n"
                "max relative error (elementwise): %.3e at %s\n"
                "elapsed: %.1f s\n%s\n",
                params, net.max_relative_error, net.worst.c_str(), elem.max_relative_error,
                elem.worst.c_str(), secs, pass ? "PASS" : "FAIL");
  out << buf;
  return pass ? 0 : 1;
}

int cmd_probe(const Options& o, std::ostream& out) {
  const IsdProbe p = probe_isd(o.branches, !o.no_inter);
  out << "ISD-" << o.branches << (o.no_inter ? " (inter-branch connections disabled)" : "") << "\n";
  out << "rates " << join(p.rates) << "\n";
  out << "branch reach " << join(p.branch_reach) << "\n";
  out << "deepest-path reach " << p.deepest_reach << "\n";
  out << "output reach " << p.output_reach << "\n";
  out << "deepest-path support " << (2 * p.deepest_reach + 1) << " pixels per axis\n";
  return 0;
}

int cmd_ablate(const Options& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const Dataset train_set = load_dataset(o.data, cfg.train.boundary_radius);
  const Dataset test_set = load_dataset(o.test, cfg.train.boundary_radius);
  const auto rows = run_ablation(cfg, train_set, test_set, &out);
  const std::string table = format_ablation(rows);
  out << table;
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + o.out);
    f << table;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boundary-aware salient object detection: data, training, inference, evaluation", "banet"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic saliency dataset");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--count", o.synth.count, "Number of samples");
  synth->add_option("--size", o.synth.size, "Image side (multiple of 8)");
  synth->add_option("--seed", o.synth.seed, "Random seed");
  synth->add_option("--texture", o.synth.interior_texture_amplitude, "Interior texture amplitude in [0,1]");
  synth->add_option("--contrast", o.synth.boundary_contrast, "Boundary rim blend toward background in [0,1]");
  synth->add_option("--radius", o.synth.boundary_radius, "Boundary ground-truth radius");

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "Training dataset directory")->required();
    sub->add_option("--config", o.config, "key=value config file");
    sub->add_option("--set", o.overrides, "Config override key=value (repeatable)");
    sub->add_option("--iters", o.iters, "Override train.max_iters");
  };

  auto* train = app.add_subcommand("train", "Train the network");
  add_run_options(train);
  train->add_option("--out", o.out, "Checkpoint path")->required();
  train->add_option("--log", o.log, "Loss log path (default <out>.log)");

  auto* infer = app.add_subcommand("infer", "Write saliency maps for a directory of images");
  infer->add_option("--checkpoint", o.checkpoint, "Checkpoint path")->required();
  infer->add_option("--data", o.data, "Dataset directory or directory of .ppm images")->required();
  infer->add_option("--out", o.out, "Output directory")->required();
  infer->add_flag("--diagnostics", o.diagnostics, "Also write M_B and M_I maps");

  auto* eval = app.add_subcommand("eval", "Score saliency maps against ground truth");
  eval->add_option("--pred", o.pred, "Directory of predicted .pgm maps")->required();
  eval->add_option("--gt", o.gt, "Directory of ground-truth .pgm masks")->required();
  eval->add_option("--out", o.out, "Directory for report.txt and curve files");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the full network");
  grad->add_option("--size", o.size, "Input side (multiple of 8, >= 16)");
  grad->add_option("--seed", o.seed, "Random seed");

  auto* probe = app.add_subcommand("probe-isd", "Impulse-response reach of ISD-N");
  probe->add_option("--n", o.branches, "Number of branches")->check(CLI::Range(1, 10));
  probe->add_flag("--no-inter", o.no_inter, "Disable inter-branch connections");

  auto* ablate = app.add_subcommand("ablate", "Train and compare IPS, IPS+BLS and the full model");
  add_run_options(ablate);
  ablate->add_option("--test", o.test, "Held-out dataset directory")->required();
  ablate->add_option("--out", o.out, "Write the comparison table here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (infer->parsed()) return cmd_infer(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (grad->parsed()) return cmd_gradcheck(o, out);
    if (probe->parsed()) return cmd_probe(o, out);
    if (ablate->parsed()) return cmd_ablate(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace banet::cli
