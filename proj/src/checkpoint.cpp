#include "banet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "banet/error.hpp"

namespace banet {

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

void save_checkpoint(const std::filesystem::path& path, const RunConfig& config, const Network& net,
                     const TrainState& state) {
  const ParameterList& params = net.parameters();
  if (!state.velocities.empty() && state.velocities.size() != params.size()) {
    throw UsageError("save_checkpoint: velocity count does not match parameter count");
  }
  std::ostringstream manifest;
  std::vector<double> payload;
  manifest << "iteration " << state.iteration << "\n";
  for (const auto& key : RunConfig::keys()) manifest << "config " << key << "=" << config.get(key) << "\n";
  for (const auto& p : params) {
    const Shape& s = p.tensor.shape();
    manifest << "tensor " << p.name << " " << p.group << " " << s.n << " " << s.c << " " << s.h << " "
             << s.w << " " << payload.size() << "\n";
    const auto d = p.tensor.data();
    payload.insert(payload.end(), d.begin(), d.end());
  }
  for (std::size_t k = 0; k < state.velocities.size(); ++k) {
    manifest << "velocity " << params[k].name << " " << payload.size() << " "
             << state.velocities[k].size() << "\n";
    payload.insert(payload.end(), state.velocities[k].begin(), state.velocities[k].end());
  }
  const std::string text = manifest.str();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << kCheckpointMagic << "\n" << "manifest " << text.size() << "\n" << text;
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string();

  const std::string magic = std::string(kCheckpointMagic) + "\n";
  if (bytes.compare(0, magic.size(), magic) != 0) throw FormatError(where + ": bad checkpoint magic");
  std::size_t pos = magic.size();
  const auto eol = bytes.find('\n', pos);
  if (eol == std::string::npos) throw FormatError(where + ": truncated checkpoint header");
  std::istringstream header(bytes.substr(pos, eol - pos));
  std::string word;
  std::size_t manifest_size = 0;
  if (!(header >> word >> manifest_size) || word != "manifest") {
    throw FormatError(where + ": missing manifest length");
  }
  pos = eol + 1;
  if (bytes.size() < pos + manifest_size) throw FormatError(where + ": truncated manifest");
  const std::string text = bytes.substr(pos, manifest_size);
  const std::size_t payload_start = pos + manifest_size;
  const std::size_t payload_count = (bytes.size() - payload_start) / sizeof(double);
  if ((bytes.size() - payload_start) % sizeof(double) != 0) throw FormatError(where + ": ragged payload");

  auto read_values = [&](std::size_t offset, std::size_t count) {
    if (offset + count > payload_count) throw FormatError(where + ": tensor extends past payload");
    std::vector<double> v(count);
    std::memcpy(v.data(), bytes.data() + payload_start + offset * sizeof(double), count * sizeof(double));
    return v;
  };

  struct Entry {
    std::string group;
    Shape shape;
    std::size_t offset = 0;
  };
  std::map<std::string, Entry> tensors;
  std::map<std::string, std::pair<std::size_t, std::size_t>> velocities;
  RunConfig config;
  std::size_t iteration = 0;

  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "iteration") {
      if (!(ls >> iteration)) throw FormatError(where + ": bad iteration line");
    } else if (kind == "config") {
      std::string kv;
      std::getline(ls >> std::ws, kv);
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw FormatError(where + ": bad config line");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    } else if (kind == "tensor") {
      std::string name;
      Entry e;
      if (!(ls >> name >> e.group >> e.shape.n >> e.shape.c >> e.shape.h >> e.shape.w >> e.offset)) {
        throw FormatError(where + ": bad tensor line");
      }
      tensors[name] = e;
    } else if (kind == "velocity") {
      std::string name;
      std::size_t offset = 0, count = 0;
      if (!(ls >> name >> offset >> count)) throw FormatError(where + ": bad velocity line");
      velocities[name] = {offset, count};
    } else if (!kind.empty()) {
      throw FormatError(where + ": unknown manifest entry '" + kind + "'");
    }
  }

  Network net(config.model, config.seed);
  TrainState state;
  state.iteration = iteration;
  for (const auto& p : net.parameters()) {
    const auto it = tensors.find(p.name);
    if (it == tensors.end()) throw FormatError(where + ": missing tensor " + p.name);
    if (it->second.shape != p.tensor.shape() || it->second.group != p.group) {
      throw FormatError(where + ": tensor " + p.name + " does not match the configured network");
    }
    const auto values = read_values(it->second.offset, p.tensor.numel());
    Tensor t = p.tensor;
    std::copy(values.begin(), values.end(), t.mutable_data().begin());
    if (!velocities.empty()) {
      const auto v = velocities.find(p.name);
      if (v == velocities.end() || v->second.second != p.tensor.numel()) {
        throw FormatError(where + ": missing or mis-sized velocity for " + p.name);
      }
      state.velocities.push_back(read_values(v->second.first, v->second.second));
    }
  }
  if (tensors.size() != net.parameters().size()) throw FormatError(where + ": unexpected extra tensors");
  return LoadedCheckpoint{std::move(config), std::move(net), std::move(state)};
}

}  // namespace banet
