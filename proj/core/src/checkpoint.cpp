#include "loader_rl/checkpoint.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "loader_rl/errors.hpp"
#include "loader_rl/rng.hpp"
#include "loader_rl/run_config.hpp"

namespace loader_rl {
namespace {

constexpr char kMagic[8] = {'L', 'D', 'R', 'L', 'C', 'K', 'P', 'T'};

struct ArrayEntry {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<double> data;
};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void expect_raw(const char* p, std::size_t n, const char* what) {
    need(n);
    if (std::memcmp(in_.data() + pos_, p, n) != 0)
      throw FormatError(fmt::format("checkpoint: bad {}", what));
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::uint64_t n) {
    if (n > in_.size() - pos_) throw FormatError("checkpoint: truncated file");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void add_mlp(std::vector<ArrayEntry>& arrays, const std::string& prefix,
             const Mlp& mlp) {
  const auto& sizes = mlp.layer_sizes();
  const auto p = mlp.params();
  std::size_t off = 0;
  for (int l = 0; l + 1 < static_cast<int>(sizes.size()); ++l) {
    const auto rows = static_cast<std::size_t>(sizes[l + 1]);
    const auto cols = static_cast<std::size_t>(sizes[l]);
    arrays.push_back({fmt::format("{}.w{}", prefix, l), {rows, cols},
                      {p.begin() + static_cast<long>(off),
                       p.begin() + static_cast<long>(off + rows * cols)}});
    off += rows * cols;
    arrays.push_back({fmt::format("{}.b{}", prefix, l), {rows},
                      {p.begin() + static_cast<long>(off),
                       p.begin() + static_cast<long>(off + rows)}});
    off += rows;
  }
}

Mlp take_mlp(const std::vector<ArrayEntry>& arrays, std::size_t& next,
             const std::string& prefix) {
  std::vector<int> sizes;
  std::vector<double> flat;
  for (int l = 0;; ++l) {
    const std::string wname = fmt::format("{}.w{}", prefix, l);
    if (next >= arrays.size() || arrays[next].name != wname) break;
    const ArrayEntry& w = arrays[next];
    if (next + 1 >= arrays.size() ||
        arrays[next + 1].name != fmt::format("{}.b{}", prefix, l))
      throw FormatError("checkpoint: missing bias for " + wname);
    const ArrayEntry& b = arrays[next + 1];
    if (w.dims.size() != 2 || b.dims.size() != 1 || b.dims[0] != w.dims[0])
      throw FormatError("checkpoint: inconsistent shapes for " + wname);
    if (sizes.empty()) sizes.push_back(static_cast<int>(w.dims[1]));
    else if (static_cast<std::uint64_t>(sizes.back()) != w.dims[1])
      throw FormatError("checkpoint: layer size mismatch at " + wname);
    sizes.push_back(static_cast<int>(w.dims[0]));
    flat.insert(flat.end(), w.data.begin(), w.data.end());
    flat.insert(flat.end(), b.data.begin(), b.data.end());
    next += 2;
  }
  if (sizes.size() < 2) throw FormatError("checkpoint: missing network " + prefix);
  Mlp mlp(sizes);
  std::copy(flat.begin(), flat.end(), mlp.params().begin());
  return mlp;
}

}  // namespace

TrainConfig PolicyCheckpoint::train_config() const {
  return parse_run_config(config_text).train;
}

std::vector<std::uint8_t> save_checkpoint(const PolicyCheckpoint& ckpt) {
  std::vector<ArrayEntry> arrays;
  add_mlp(arrays, "actor", ckpt.params.actor);
  add_mlp(arrays, "critic", ckpt.params.critic);
  if (!ckpt.params.log_std.empty())
    arrays.push_back({"log_std", {ckpt.params.log_std.size()}, ckpt.params.log_std});
  const auto& norm = ckpt.params.normalizer;
  arrays.push_back({"normalizer.mean", {norm.mean.size()}, norm.mean});
  arrays.push_back({"normalizer.var", {norm.var.size()}, norm.var});
  arrays.push_back({"normalizer.count", {1}, {norm.count}});

  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(ckpt.format_version);
  w.str(ckpt.config_digest);
  w.u64(ckpt.env_config_hash);
  w.str(ckpt.config_text);
  w.str(ckpt.rng_state);
  w.u64(ckpt.timesteps);
  w.u32(ckpt.params.mode == ExplorationMode::ContinuousThreshold ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    w.str(a.name);
    w.u32(static_cast<std::uint32_t>(a.dims.size()));
    for (auto d : a.dims) w.u64(d);
  }
  for (const auto& a : arrays)
    for (double v : a.data) w.f64(v);
  const auto& bytes = w.bytes();
  w.u64(fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size())));
  return std::move(w.bytes());
}

PolicyCheckpoint load_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kMagic + 12) throw FormatError("checkpoint: truncated file");
  Reader r(bytes);
  r.expect_raw(kMagic, sizeof kMagic, "magic (not a loader_rl checkpoint)");
  PolicyCheckpoint ckpt;
  ckpt.format_version = r.u32();
  if (ckpt.format_version != kCheckpointFormatVersion)
    throw FormatError(fmt::format("checkpoint: format version {} (expected {})",
                                  ckpt.format_version, kCheckpointFormatVersion));
  // verify the trailer before trusting any length field further in
  const std::size_t body = bytes.size() - 8;
  Reader trailer(bytes.subspan(body));
  const std::uint64_t stored = trailer.u64();
  const std::uint64_t actual =
      fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), body));
  if (stored != actual) throw FormatError("checkpoint: checksum mismatch (truncated or corrupt)");

  ckpt.config_digest = r.str();
  ckpt.env_config_hash = r.u64();
  ckpt.config_text = r.str();
  ckpt.rng_state = r.str();
  ckpt.timesteps = r.u64();
  const std::uint32_t mode = r.u32();
  if (mode > 1) throw FormatError("checkpoint: unknown exploration mode");
  ckpt.params.mode = mode == 1 ? ExplorationMode::ContinuousThreshold
                               : ExplorationMode::BernoulliHeads;
  const std::uint32_t count = r.u32();
  if (count > 4096) throw FormatError("checkpoint: implausible array count");
  std::vector<ArrayEntry> arrays(count);
  for (auto& a : arrays) {
    a.name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 2) throw FormatError("checkpoint: bad rank for " + a.name);
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      a.dims.push_back(r.u64());
      if (a.dims.back() == 0 || a.dims.back() > (1u << 20))
        throw FormatError("checkpoint: bad dimension for " + a.name);
      n *= a.dims.back();
    }
    a.data.resize(n);
  }
  for (auto& a : arrays)
    for (double& v : a.data) v = r.f64();
  if (r.pos() != body) throw FormatError("checkpoint: trailing bytes before checksum");

  // the stored digest and env hash must describe the embedded config
  RunConfig embedded;
  try {
    embedded = parse_run_config(ckpt.config_text);
  } catch (const std::invalid_argument& e) {
    throw FormatError(fmt::format("checkpoint: embedded config: {}", e.what()));
  }
  if (config_digest(embedded) != ckpt.config_digest)
    throw FormatError(fmt::format("checkpoint: digest {} does not match its config ({})",
                                  ckpt.config_digest, config_digest(embedded)));
  if (env_config_hash(embedded.env) != ckpt.env_config_hash)
    throw FormatError("checkpoint: env hash does not match its config");

  std::size_t next = 0;
  ckpt.params.actor = take_mlp(arrays, next, "actor");
  ckpt.params.critic = take_mlp(arrays, next, "critic");
  if (next < arrays.size() && arrays[next].name == "log_std") {
    ckpt.params.log_std = arrays[next++].data;
  }
  auto take = [&](const char* name) -> std::vector<double>& {
    if (next >= arrays.size() || arrays[next].name != name)
      throw FormatError(fmt::format("checkpoint: missing array {}", name));
    return arrays[next++].data;
  };
  ckpt.params.normalizer.mean = take("normalizer.mean");
  ckpt.params.normalizer.var = take("normalizer.var");
  ckpt.params.normalizer.count = take("normalizer.count").at(0);
  if (next != arrays.size()) throw FormatError("checkpoint: unexpected extra arrays");

  const int in = ckpt.params.actor.input_size();
  if (ckpt.params.critic.input_size() != in ||
      ckpt.params.normalizer.mean.size() != static_cast<std::size_t>(in) ||
      ckpt.params.normalizer.var.size() != static_cast<std::size_t>(in) ||
      ckpt.params.actor.output_size() != kActionHeads ||
      ckpt.params.critic.output_size() != 1)
    throw FormatError("checkpoint: network shapes are inconsistent");
  if ((ckpt.params.mode == ExplorationMode::ContinuousThreshold) !=
      (ckpt.params.log_std.size() == static_cast<std::size_t>(kActionHeads)))
    throw FormatError("checkpoint: log_std does not match the exploration mode");
  return ckpt;
}

void write_checkpoint_file(const std::filesystem::path& path,
                           const PolicyCheckpoint& checkpoint) {
  const auto bytes = save_checkpoint(checkpoint);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::filesystem::filesystem_error(
        "cannot open checkpoint for writing", tmp,
        std::make_error_code(std::errc::permission_denied));
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::filesystem::filesystem_error(
        "failed writing checkpoint", tmp, std::make_error_code(std::errc::io_error));
  }
  std::filesystem::rename(tmp, path);
}

PolicyCheckpoint read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::filesystem::filesystem_error(
      "cannot open checkpoint", path,
      std::make_error_code(std::errc::no_such_file_or_directory));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return load_checkpoint(bytes);
}

std::optional<std::string> env_mismatch_warning(
    const PolicyCheckpoint& checkpoint, std::uint64_t env_hash) {
  if (checkpoint.env_config_hash == env_hash) return std::nullopt;
  return fmt::format(
      "checkpoint environment hash {} differs from the current environment {}",
      hex64(checkpoint.env_config_hash), hex64(env_hash));
}

}  // namespace loader_rl
