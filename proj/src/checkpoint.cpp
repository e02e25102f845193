#include "pdprl/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <set>

namespace pdprl {

namespace {

constexpr char kMagic[4] = {'P', 'D', 'P', 'C'};

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw CheckpointError("truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw CheckpointError("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f32_payload(std::ostream& out, const Tensor2<float>& t) {
  // Little-endian hosts write floats directly; this build targets x86-64.
  static_assert(sizeof(float) == 4);
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * 4));
}

// Names and key shapes a store must carry for the given meta. Hidden widths
// are free; intra-record consistency is checked instead.
void validate_against_meta(const ParamStore<float>& store, const CheckpointMeta& meta) {
  int d = meta.d_h;
  auto need = [&](const std::string& name, int rows, int cols) {
    int slot = store.slot(name);
    if (slot < 0) throw CheckpointError("missing parameter: " + name);
    const auto& t = store.value(slot);
    if ((rows > 0 && t.rows != rows) || (cols > 0 && t.cols != cols))
      throw CheckpointError("bad shape for " + name);
  };
  need("encoder.embed.W", 5, d);
  need("encoder.embed.b", 1, d);
  for (const char* nm : {"Wq", "Wk", "Wv", "Wo"})
    need(std::string("encoder.depot_ca.") + nm, d, d);
  int ffn = -1;
  for (int l = 0; l < meta.L; ++l) {
    for (const char* br : {"global", "cluster"})
      for (const char* nm : {"Wq", "Wk", "Wv", "Wo"})
        need(names::layer(l, (std::string(br) + "." + nm).c_str()), d, d);
    need(names::layer(l, "fuse.W"), d, d);
    need(names::layer(l, "fuse.b"), 1, d);
    need(names::layer(l, "ln1.gain"), 1, d);
    need(names::layer(l, "ln1.shift"), 1, d);
    need(names::layer(l, "ln2.gain"), 1, d);
    need(names::layer(l, "ln2.shift"), 1, d);
    const auto& w1 = store.value(names::layer(l, "ffn.W1"));
    if (w1.rows != d) throw CheckpointError("bad shape for ffn.W1");
    if (ffn < 0) ffn = w1.cols;
    if (w1.cols != ffn) throw CheckpointError("ffn widths disagree across layers");
    need(names::layer(l, "ffn.b1"), 1, ffn);
    need(names::layer(l, "ffn.W2"), ffn, d);
    need(names::layer(l, "ffn.b2"), 1, d);
  }
  for (const char* nm :
       {"decoder.Wq_first", "decoder.Wq_last", "decoder.Wq_cluster",
        "decoder.glimpse.Wk", "decoder.glimpse.Wv", "decoder.glimpse.Wo",
        "decoder.logit.Wk"})
    need(nm, d, d);
  const auto& g1 = store.value("gate.W1");
  if (g1.rows != 3 * d) throw CheckpointError("bad shape for gate.W1");
  need("gate.b1", 1, g1.cols);
  need("gate.W2", g1.cols, 1);
  need("gate.b2", 1, 1);

  size_t expected = 2 + 4 + static_cast<size_t>(meta.L) * 18 + 7 + 4;
  if (static_cast<size_t>(store.count()) != expected)
    throw CheckpointError("unexpected parameter count");
  if (meta.heads < 1 || d % meta.heads != 0)
    throw CheckpointError("head count incompatible with embedding dim");
}

}  // namespace

CheckpointMeta meta_from(const ModelConfig& cfg, std::uint64_t step) {
  CheckpointMeta meta;
  meta.d_h = cfg.enc.d_h;
  meta.L = cfg.enc.L;
  meta.heads = cfg.enc.heads;
  meta.cluster_attention_enabled = cfg.enc.cluster_attention_enabled;
  meta.dual_decoder_enabled = cfg.dec.dual_decoder_enabled;
  meta.step = step;
  return meta;
}

ModelConfig model_config_from(const CheckpointMeta& meta,
                              const ParamStore<float>& store) {
  ModelConfig cfg;
  cfg.enc.d_h = meta.d_h;
  cfg.enc.L = meta.L;
  cfg.enc.heads = meta.heads;
  cfg.enc.ffn_hidden = store.value(names::layer(0, "ffn.W1")).cols;
  cfg.enc.cluster_attention_enabled = meta.cluster_attention_enabled;
  cfg.dec.dual_decoder_enabled = meta.dual_decoder_enabled;
  cfg.dec.gate_hidden = store.value("gate.W1").cols;
  return cfg;
}

void save_checkpoint(const std::string& path, const ParamStore<float>& store,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open for write: " + path);
  out.write(kMagic, 4);
  put_u32(out, meta.version);
  put_u32(out, static_cast<std::uint32_t>(meta.d_h));
  put_u32(out, static_cast<std::uint32_t>(meta.L));
  put_u32(out, static_cast<std::uint32_t>(meta.heads));
  std::uint32_t flags = (meta.cluster_attention_enabled ? 1u : 0u) |
                        (meta.dual_decoder_enabled ? 2u : 0u);
  put_u32(out, flags);
  put_u64(out, meta.step);
  put_u32(out, static_cast<std::uint32_t>(store.count()));
  for (int s = 0; s < store.count(); ++s) {
    const std::string& name = store.names()[static_cast<size_t>(s)];
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const auto& t = store.value(s);
    put_u32(out, static_cast<std::uint32_t>(t.rows));
    put_u32(out, static_cast<std::uint32_t>(t.cols));
    put_f32_payload(out, t);
  }
  if (!out) throw CheckpointError("write failed: " + path);
}

std::pair<ParamStore<float>, CheckpointMeta> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw CheckpointError("not a checkpoint file: " + path);
  CheckpointMeta meta;
  meta.version = get_u32(in);
  if (meta.version != 1) throw CheckpointError("unsupported checkpoint version");
  meta.d_h = static_cast<int>(get_u32(in));
  meta.L = static_cast<int>(get_u32(in));
  meta.heads = static_cast<int>(get_u32(in));
  std::uint32_t flags = get_u32(in);
  meta.cluster_attention_enabled = (flags & 1u) != 0;
  meta.dual_decoder_enabled = (flags & 2u) != 0;
  meta.step = get_u64(in);
  std::uint32_t count = get_u32(in);

  ParamStore<float> store;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = get_u32(in);
    if (name_len > 4096) throw CheckpointError("implausible name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    int rows = static_cast<int>(get_u32(in));
    int cols = static_cast<int>(get_u32(in));
    if (rows < 0 || cols < 0 || static_cast<std::uint64_t>(rows) * cols > (1u << 28))
      throw CheckpointError("implausible tensor shape");
    Tensor2<float> t(rows, cols);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * 4));
    if (!in) throw CheckpointError("truncated checkpoint");
    store.add(name, std::move(t));
  }
  validate_against_meta(store, meta);
  return {std::move(store), meta};
}

std::pair<ParamStore<float>, CheckpointMeta> load_checkpoint_expect(
    const std::string& path, const ModelConfig& expected) {
  auto loaded = load_checkpoint(path);
  const CheckpointMeta& meta = loaded.second;
  if (meta.d_h != expected.enc.d_h || meta.L != expected.enc.L ||
      meta.heads != expected.enc.heads)
    throw CheckpointError("checkpoint architecture mismatch");
  return loaded;
}

}  // namespace pdprl
