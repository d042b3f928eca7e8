#include "banet/pipeline.hpp"

#include <cstdio>
#include <set>

#include "banet/error.hpp"
#include "banet/image.hpp"

namespace banet {

TrainRun run_training(const RunConfig& config, const Dataset& data, std::ostream* log) {
  Network net(config.model, config.seed);
  std::vector<LossLogEntry> entries;
  TrainState state = train(net, data, config.train_config(), [&](const LossLogEntry& e) {
    entries.push_back(e);
    if (log) *log << format_log_line(e) << "\n";
  });
  return TrainRun{config, std::move(net), std::move(state), std::move(entries)};
}

EvalReport evaluate_network(const Network& net, const Dataset& data) {
  std::vector<std::string> names;
  std::vector<Plane> preds, masks;
  for (const auto& s : data.samples) {
    names.push_back(s.name);
    preds.push_back(predict(net, s.image));
    masks.push_back(s.mask);
  }
  return evaluate_pairs(names, preds, masks);
}

double write_predictions(const Network& net, const std::filesystem::path& image_dir,
                         const std::filesystem::path& out_dir, bool diagnostics) {
  if (!std::filesystem::is_directory(image_dir)) throw IoError("not a directory: " + image_dir.string());
  std::set<std::filesystem::path> inputs;
  for (const auto& e : std::filesystem::directory_iterator(image_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") inputs.insert(e.path());
  }
  if (inputs.empty()) throw DataError("no .ppm images in " + image_dir.string());
  std::filesystem::create_directories(out_dir);
  if (diagnostics) std::filesystem::create_directories(out_dir / "diagnostics");
  double conflict = 0.0;
  for (const auto& path : inputs) {
    const RgbImage img = read_ppm(path);
    Tape tape;
    const ForwardRecord r = net.forward(tape, to_tensor(img));
    const std::string stem = path.stem().string();
    write_pgm(out_dir / (stem + ".pgm"), to_plane(r.s));
    if (r.m_b.defined()) conflict += conflict_fraction(r.m_b, r.m_i);
    if (diagnostics) {
      if (r.m_b.defined()) write_pgm(out_dir / "diagnostics" / (stem + "_mb.pgm"), to_plane(r.m_b));
      write_pgm(out_dir / "diagnostics" / (stem + "_mi.pgm"), to_plane(r.m_i));
    }
  }
  return conflict / static_cast<double>(inputs.size());
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const Dataset& train_set,
                                      const Dataset& test_set, std::ostream* progress) {
  std::vector<AblationRow> rows;
  for (FusionMode mode : {FusionMode::kIps, FusionMode::kIpsBls, FusionMode::kFull}) {
    RunConfig cfg = base;
    cfg.model.mode = mode;
    if (progress) *progress << "training " << to_string(mode) << " for " << cfg.train.max_iters << " iterations\n";
    const TrainRun run = run_training(cfg, train_set);
    const EvalReport report = evaluate_network(run.network, test_set);
    rows.push_back(AblationRow{mode, report.mean_mae, report.mean_weighted_fbeta, report.mean_adaptive_fbeta});
  }
  return rows;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
  std::string out = "config,MAE,wF,F\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g\n", to_string(r.mode).c_str(), r.mae,
                  r.weighted_fbeta, r.adaptive_fbeta);
    out += buf;
  }
  return out;
}

}  // namespace banet
