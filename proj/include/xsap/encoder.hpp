#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xsap/core.hpp"
#include "xsap/hash.hpp"
#include "xsap/io.hpp"
#include "xsap/matrix.hpp"
#include "xsap/rng.hpp"
#include "xsap/text.hpp"

namespace xsap {

// A unit-norm name representation of length embed_dim.
using Embedding = std::vector<double>;

// Trainable state of the character-n-gram encoder: a hashed n-gram table
// plus a square projection. Encoding settings that must match between
// training and inference (n-gram order, truncation limit) travel with the
// parameters and are restored from the checkpoint sidecar.
struct EncoderParams {
  std::uint32_t vocab_size = 0;
  std::uint32_t embed_dim = 0;
  std::uint32_t ngram_order = 3;
  std::uint32_t max_name_chars = 25;
  Matrix table;       // vocab_size x embed_dim
  Matrix projection;  // embed_dim x embed_dim

  bool operator==(const EncoderParams&) const = default;
};

// Hashed feature ids of a name: lowercase (ASCII fold), wrap with '^' and
// '$', slide a window of ngram_order scalar values, FNV-1a each window's
// bytes mod vocab_size. Duplicated n-grams keep their multiplicity. Stable
// across platforms by construction.
inline std::vector<std::uint32_t> featurize(std::string_view name,
                                            std::uint32_t ngram_order,
                                            std::uint32_t vocab_size) {
  const std::string lowered = "^" + ascii_lower(name) + "$";
  // byte offsets of each scalar value, plus the end sentinel
  std::vector<std::size_t> starts;
  starts.reserve(lowered.size() + 1);
  std::size_t i = 0;
  std::uint32_t cp;
  while (i < lowered.size()) {
    starts.push_back(i);
    if (!utf8_next(lowered, i, cp)) ++i;  // validated upstream; skip raw byte
  }
  starts.push_back(lowered.size());

  std::vector<std::uint32_t> ids;
  const std::size_t n_chars = starts.size() - 1;
  if (n_chars < ngram_order) return ids;
  ids.reserve(n_chars - ngram_order + 1);
  for (std::size_t k = 0; k + ngram_order <= n_chars; ++k) {
    const std::string_view gram(lowered.data() + starts[k],
                                starts[k + ngram_order] - starts[k]);
    ids.push_back(static_cast<std::uint32_t>(fnv1a64(gram) % vocab_size));
  }
  return ids;
}

// Table entries i.i.d. uniform in [-0.05, 0.05]; projection starts as the
// identity. Same seed, same bits.
inline EncoderParams init_params(const TrainConfig& config, std::uint64_t seed) {
  EncoderParams p;
  p.vocab_size = config.vocab_size;
  p.embed_dim = config.embed_dim;
  p.ngram_order = config.ngram_order;
  p.max_name_chars = config.max_name_chars;
  p.table = Matrix(config.vocab_size, config.embed_dim);
  Rng rng(seed);
  for (auto& v : p.table.data) v = rng.uniform(-0.05, 0.05);
  p.projection = Matrix::identity(config.embed_dim);
  return p;
}

inline EncoderParams init_params(const TrainConfig& config) {
  return init_params(config, config.seed);
}

namespace detail {

// mean-pooled table rows, before projection; empty feature set gives zero
inline Embedding pool_features(const EncoderParams& p,
                               const std::vector<std::uint32_t>& ids) {
  Embedding v(p.embed_dim, 0.0);
  if (ids.empty()) return v;
  for (const auto id : ids) axpy(1.0, p.table.row(id), v);
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (auto& x : v) x *= inv;
  return v;
}

inline Embedding project(const EncoderParams& p, const Embedding& v) {
  Embedding out(p.embed_dim, 0.0);
  for (std::uint32_t i = 0; i < p.embed_dim; ++i)
    out[i] = dot(p.projection.row(i), v);
  return out;
}

}  // namespace detail

// f(name): mean of the feature rows, projected, L2-normalized. A zero
// pre-normalization vector (impossible with nonzero init, but guarded) maps
// to the first standard basis vector. Pure and deterministic.
inline Embedding encode(const EncoderParams& p, std::string_view name) {
  const auto truncated = truncate_codepoints(name, p.max_name_chars);
  const auto ids = featurize(truncated, p.ngram_order, p.vocab_size);
  const Embedding pooled = detail::pool_features(p, ids);
  Embedding v = detail::project(p, pooled);
  const double norm = std::sqrt(dot(v, v));
  if (norm == 0.0) {
    Embedding e1(p.embed_dim, 0.0);
    e1[0] = 1.0;
    return e1;
  }
  for (auto& x : v) x /= norm;
  return v;
}

// Row i is encode(names[i]).
template <typename NameRange>
Matrix encode_batch(const EncoderParams& p, const NameRange& names) {
  Matrix out(names.size(), p.embed_dim);
  std::size_t i = 0;
  for (const auto& name : names) {
    const Embedding e = encode(p, name);
    std::memcpy(out.row(i).data(), e.data(), sizeof(double) * p.embed_dim);
    ++i;
  }
  return out;
}

// Sparse parameter gradient: only the table rows a batch touched, plus the
// dense projection.
struct ParamGrad {
  std::unordered_map<std::uint32_t, std::vector<double>> table_rows;
  Matrix projection;
};

// Accumulates d(loss)/d(params) for one name given d(loss)/d(embedding).
// Chain: normalization Jacobian (I - uu^T)/|v|, then the projection, then
// the mean pool spread over the touched table rows.
inline void encode_backward_accum(const EncoderParams& p, std::string_view name,
                                  std::span<const double> grad, ParamGrad& accum) {
  const auto truncated = truncate_codepoints(name, p.max_name_chars);
  const auto ids = featurize(truncated, p.ngram_order, p.vocab_size);
  if (accum.projection.rows == 0)
    accum.projection = Matrix(p.embed_dim, p.embed_dim);
  if (ids.empty()) return;  // constant output, zero gradient

  const Embedding pooled = detail::pool_features(p, ids);
  Embedding v = detail::project(p, pooled);
  const double norm = std::sqrt(dot(v, v));
  if (norm == 0.0) return;

  Embedding u(v);
  for (auto& x : u) x /= norm;

  // g1 = (I - uu^T) grad / |v|
  const double gu = dot(grad, u);
  Embedding g1(p.embed_dim);
  for (std::uint32_t i = 0; i < p.embed_dim; ++i)
    g1[i] = (grad[i] - gu * u[i]) / norm;

  // dL/dP = g1 pooled^T
  for (std::uint32_t i = 0; i < p.embed_dim; ++i)
    axpy(g1[i], pooled, accum.projection.row(i));

  // g0 = P^T g1, then spread over the rows with weight multiplicity/K
  Embedding g0(p.embed_dim, 0.0);
  for (std::uint32_t i = 0; i < p.embed_dim; ++i)
    axpy(g1[i], p.projection.row(i), g0);
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (const auto id : ids) {
    auto& row = accum.table_rows[id];
    if (row.empty()) row.assign(p.embed_dim, 0.0);
    axpy(inv, g0, row);
  }
}

inline ParamGrad encode_backward(const EncoderParams& p, std::string_view name,
                                 std::span<const double> grad) {
  ParamGrad g;
  encode_backward_accum(p, name, grad, g);
  return g;
}

// params -= lr * grad
inline void apply_gradient(EncoderParams& p, const ParamGrad& g, double lr) {
  for (const auto& [id, row] : g.table_rows) axpy(-lr, row, p.table.row(id));
  if (g.projection.rows != 0)
    axpy(-lr, g.projection.data, p.projection.data);
}

// --- checkpoint format -----------------------------------------------------
// Little-endian binary: magic "XSAP", u32 version, u32 vocab_size, u32
// embed_dim, table rows then projection rows as f32. A text sidecar at
// <path>.cfg holds the originating config (n-gram order, truncation limit,
// training hyperparameters).

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw std::runtime_error("checkpoint: truncated");
  const auto b = [&](std::size_t k) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + k]));
  };
  const std::uint32_t v = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
  pos += 4;
  return v;
}

inline void put_f32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

inline float get_f32(const std::string& in, std::size_t& pos) {
  const std::uint32_t bits = get_u32(in, pos);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace detail

inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const std::filesystem::path& path,
                            const EncoderParams& params,
                            const TrainConfig& config) {
  std::string out;
  out.reserve(16 + 4 * (params.table.data.size() + params.projection.data.size()));
  out += "XSAP";
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, params.vocab_size);
  detail::put_u32(out, params.embed_dim);
  for (const double d : params.table.data)
    detail::put_f32(out, static_cast<float>(d));
  for (const double d : params.projection.data)
    detail::put_f32(out, static_cast<float>(d));
  atomic_write(path, out);
  auto sidecar = path;
  sidecar += ".cfg";
  save_config(config, sidecar);
}

struct Checkpoint {
  EncoderParams params;
  TrainConfig config;
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string in = read_file(path);
  if (in.size() < 16 || in.compare(0, 4, "XSAP") != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  std::size_t pos = 4;
  const auto version = detail::get_u32(in, pos);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  Checkpoint ck;
  ck.params.vocab_size = detail::get_u32(in, pos);
  ck.params.embed_dim = detail::get_u32(in, pos);
  const std::size_t v = ck.params.vocab_size, d = ck.params.embed_dim;
  if (in.size() != 16 + 4 * (v * d + d * d))
    throw std::runtime_error("checkpoint: size mismatch in " + path.string());
  ck.params.table = Matrix(v, d);
  for (auto& x : ck.params.table.data)
    x = static_cast<double>(detail::get_f32(in, pos));
  ck.params.projection = Matrix(d, d);
  for (auto& x : ck.params.projection.data)
    x = static_cast<double>(detail::get_f32(in, pos));

  auto sidecar = path;
  sidecar += ".cfg";
  ck.config = load_config(sidecar);  // carries ngram_order / max_name_chars
  if (ck.config.vocab_size != ck.params.vocab_size ||
      ck.config.embed_dim != ck.params.embed_dim)
    throw std::runtime_error("checkpoint: sidecar config dims disagree with " +
                             path.string());
  ck.params.ngram_order = ck.config.ngram_order;
  ck.params.max_name_chars = ck.config.max_name_chars;
  return ck;
}

}  // namespace xsap
