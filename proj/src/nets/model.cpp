// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/nets/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "pdr/ad/ops.hpp"

namespace pdr::nets {

using ad::Tensor;

std::string_view block_name(Block b) {
  switch (b) {
    case Block::geom: return "geom";
    case Block::alb: return "alb";
    case Block::cam: return "cam";
    case Block::light: return "light";
  }
  return "?";
}

Block parse_block(std::string_view name) {
  for (auto b : kAllBlocks) {
    if (block_name(b) == name) return b;
  }
  throw std::invalid_argument("unknown feature block '" + std::string(name) + "' (expected geom, alb, cam, light)");
}

std::vector<Block> parse_blocks(std::string_view list) {
  std::vector<Block> out;
  size_t start = 0;
  while (start <= list.size()) {
    const auto end = std::min(list.find(',', start), list.size());
    const auto item = list.substr(start, end - start);
    if (!item.empty()) {
      const auto b = parse_block(item);
      if (std::find(out.begin(), out.end(), b) != out.end()) {
        throw std::invalid_argument("feature block '" + std::string(item) + "' listed twice");
      }
      out.push_back(b);
    }
    start = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("feature block selection is empty");
  return out;
}

std::string format_blocks(const std::vector<Block>& blocks) {
  std::string s;
  for (auto b : blocks) {
    if (!s.empty()) s += ',';
    s += block_name(b);
  }
  return s;
}

std::int64_t Architecture::upsample_blocks() const {
  std::int64_t blocks = 0;
  std::int64_t size = image_size;
  while (blocks < static_cast<std::int64_t>(decoder_widths.size()) && size % 2 == 0 && size > 1) {
    size /= 2;
    ++blocks;
  }
  return blocks;
}

void Architecture::check() const {
  if (image_size < 2) throw std::invalid_argument("image_size must be at least 2");
  if (feature_dim < 1 || mlp_hidden < 1) throw std::invalid_argument("feature_dim and mlp_hidden must be positive");
  if (encoder_widths.empty() || decoder_widths.empty()) throw std::invalid_argument("network widths must be non-empty");
  for (auto w : encoder_widths)
    if (w < 1) throw std::invalid_argument("encoder widths must be positive");
  for (auto w : decoder_widths)
    if (w < 1) throw std::invalid_argument("decoder widths must be positive");
  if (upsample_blocks() < 1) throw std::invalid_argument("image_size must be even");
}

template <typename T>
FeatureSet<T> FeatureSet<T>::detached() const {
  FeatureSet out;
  for (size_t i = 0; i < 4; ++i) out.blocks[i] = blocks[i].detach();
  return out;
}

template <typename T>
Tensor<T> extract_representation(const FeatureSet<T>& z, const std::vector<Block>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("extract_representation: empty block selection");
  std::vector<Tensor<T>> parts;
  for (auto b : kAllBlocks) {
    if (std::find(blocks.begin(), blocks.end(), b) != blocks.end()) parts.push_back(z[b]);
  }
  return parts.size() == 1 ? parts[0] : ad::concat(parts, 1);
}

// --- Encoder ---------------------------------------------------------------

template <typename T>
Encoder<T>::Encoder(const Architecture& arch, Rng& rng) {
  std::int64_t in = 3;
  for (auto w : arch.encoder_widths) {
    convs_.emplace_back(in, w, 3, 2, 1, rng);
    in = w;
  }
  head_ = Linear<T>(in, arch.feature_dim, rng);
}

template <typename T>
Tensor<T> Encoder<T>::operator()(const Tensor<T>& x) const {
  auto h = x;
  for (const auto& conv : convs_) h = ad::relu(conv(h));
  const auto n = h.dim(0), c = h.dim(1);
  auto pooled = ad::mean(ad::reshape(h, {n, c, -1}), 2);  // [N,C]
  return head_(pooled);
}

template <typename T>
void Encoder<T>::collect(const std::string& prefix, NamedParams<T>& out) const {
  for (size_t i = 0; i < convs_.size(); ++i) convs_[i].collect(prefix + ".conv" + std::to_string(i), out);
  head_.collect(prefix + ".head", out);
}

// --- Decoders ----------------------------------------------------------------

template <typename T>
MapDecoder<T>::MapDecoder(const Architecture& arch, std::int64_t out_channels, Rng& rng) {
  const auto blocks = arch.upsample_blocks();
  start_size_ = arch.image_size >> blocks;
  start_channels_ = arch.decoder_widths[0];
  stem_ = Linear<T>(arch.feature_dim, start_channels_ * start_size_ * start_size_, rng);
  for (std::int64_t i = 0; i < blocks; ++i) {
    const auto in = arch.decoder_widths[i];
    const auto out = (i + 1 < blocks) ? arch.decoder_widths[i + 1] : out_channels;
    ups_.emplace_back(in, out, 4, 2, 1, rng);
  }
}

template <typename T>
Tensor<T> MapDecoder<T>::operator()(const Tensor<T>& z) const {
  const auto n = z.dim(0);
  auto h = ad::reshape(ad::relu(stem_(z)), {n, start_channels_, start_size_, start_size_});
  for (size_t i = 0; i < ups_.size(); ++i) {
    h = ups_[i](h);
    if (i + 1 < ups_.size()) h = ad::relu(h);
  }
  return h;
}

template <typename T>
void MapDecoder<T>::collect(const std::string& prefix, NamedParams<T>& out) const {
  stem_.collect(prefix + ".stem", out);
  for (size_t i = 0; i < ups_.size(); ++i) ups_[i].collect(prefix + ".up" + std::to_string(i), out);
}

template <typename T>
VectorDecoder<T>::VectorDecoder(const Architecture& arch, std::int64_t outputs, Rng& rng)
    : hidden_(arch.feature_dim, arch.mlp_hidden, rng), out_(arch.mlp_hidden, outputs, rng) {}

template <typename T>
Tensor<T> VectorDecoder<T>::operator()(const Tensor<T>& z) const {
  return out_(ad::relu(hidden_(z)));
}

template <typename T>
void VectorDecoder<T>::collect(const std::string& prefix, NamedParams<T>& out) const {
  hidden_.collect(prefix + ".hidden", out);
  out_.collect(prefix + ".out", out);
}

// --- InverseRenderer ---------------------------------------------------------

namespace {

// Keeps squashed outputs strictly inside their ranges even where tanh
// saturates to exactly +-1 in floating point.
constexpr double kSquashMargin = 1.0 - 1e-3;

// mid + margin * half * tanh(x), per column of x [N,C].
template <typename T>
Tensor<T> squash_columns(const Tensor<T>& x, const std::vector<std::array<double, 2>>& bounds) {
  std::vector<T> half, mid;
  for (const auto& b : bounds) {
    half.push_back(static_cast<T>(0.5 * kSquashMargin * (b[1] - b[0])));
    mid.push_back(static_cast<T>(0.5 * (b[1] + b[0])));
  }
  const auto c = static_cast<std::int64_t>(bounds.size());
  return ad::tanh(x) * Tensor<T>::from({1, c}, std::move(half)) + Tensor<T>::from({1, c}, std::move(mid));
}

}  // namespace

template <typename T>
InverseRenderer<T>::InverseRenderer(const Architecture& arch, const ParamRanges& ranges, std::uint64_t seed)
    : arch_(arch), ranges_(ranges) {
  arch_.check();
  Rng rng(seed);
  for (auto& e : encoders_) e = Encoder<T>(arch_, rng);
  depth_decoder_ = MapDecoder<T>(arch_, 1, rng);
  albedo_decoder_ = MapDecoder<T>(arch_, 3, rng);
  camera_decoder_ = VectorDecoder<T>(arch_, 6, rng);
  light_decoder_ = VectorDecoder<T>(arch_, 4, rng);
}

template <typename T>
FeatureSet<T> InverseRenderer<T>::encode(const Tensor<T>& images) const {
  if (images.rank() != 4 || images.dim(1) != arch_.image_size || images.dim(2) != arch_.image_size ||
      images.dim(3) != 3) {
    throw std::invalid_argument("encode: expected images [N," + std::to_string(arch_.image_size) + "," +
                                std::to_string(arch_.image_size) + ",3], got " + ad::shape_str(images.shape()));
  }
  auto x = ad::add_scalar(ad::permute(images, {0, 3, 1, 2}), T(-0.5));
  FeatureSet<T> z;
  for (size_t i = 0; i < 4; ++i) z.blocks[i] = encoders_[i](x);
  return z;
}

template <typename T>
SceneParams<T> InverseRenderer<T>::decode(const FeatureSet<T>& z) const {
  for (const auto& b : z.blocks) {
    if (b.rank() != 2 || b.dim(1) != arch_.feature_dim) {
      throw std::invalid_argument("decode: feature blocks must be [N," + std::to_string(arch_.feature_dim) + "]");
    }
  }
  const auto n = z.batch();
  const auto s = arch_.image_size;
  SceneParams<T> p;
  auto raw_depth = ad::reshape(depth_decoder_(z[Block::geom]), {n, s, s});
  p.depth = ad::add_scalar(
      ad::scale(ad::tanh(raw_depth), static_cast<T>(kSquashMargin * ranges_.standoff * ranges_.depth_band)),
      static_cast<T>(ranges_.standoff));
  // sigmoid(x) written as 0.5 + 0.5 tanh(x / 2), pulled in by the margin
  auto raw_albedo = ad::permute(albedo_decoder_(z[Block::alb]), {0, 2, 3, 1});
  p.albedo = ad::add_scalar(ad::scale(ad::tanh(ad::scale(raw_albedo, T(0.5))), static_cast<T>(0.5 * kSquashMargin)),
                            T(0.5));
  std::vector<std::array<double, 2>> light_bounds, camera_bounds;
  for (int i = 0; i < 4; ++i) light_bounds.push_back(ranges_.light_bounds(i));
  for (int i = 0; i < 6; ++i) camera_bounds.push_back(ranges_.camera_bounds(i));
  p.light = squash_columns(light_decoder_(z[Block::light]), light_bounds);
  p.camera = squash_columns(camera_decoder_(z[Block::cam]), camera_bounds);
  return p;
}

template <typename T>
NamedParams<T> InverseRenderer<T>::block_parameters(Block b) const {
  NamedParams<T> out;
  const std::string name(block_name(b));
  encoders_[static_cast<int>(b)].collect("encoder." + name, out);
  switch (b) {
    case Block::geom: depth_decoder_.collect("decoder.geom", out); break;
    case Block::alb: albedo_decoder_.collect("decoder.alb", out); break;
    case Block::cam: camera_decoder_.collect("decoder.cam", out); break;
    case Block::light: light_decoder_.collect("decoder.light", out); break;
  }
  return out;
}

template <typename T>
NamedParams<T> InverseRenderer<T>::named_parameters() const {
  NamedParams<T> out;
  for (auto b : kAllBlocks) {
    auto part = block_parameters(b);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

template <typename T>
std::vector<Tensor<T>> InverseRenderer<T>::parameters() const {
  std::vector<Tensor<T>> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

template <typename T>
std::int64_t InverseRenderer<T>::parameter_count() const {
  std::int64_t n = 0;
  for (auto& [name, t] : named_parameters()) n += t.numel();
  return n;
}

template struct FeatureSet<float>;
template struct FeatureSet<double>;
template Tensor<float> extract_representation(const FeatureSet<float>&, const std::vector<Block>&);
template Tensor<double> extract_representation(const FeatureSet<double>&, const std::vector<Block>&);
template class Encoder<float>;
template class Encoder<double>;
template class MapDecoder<float>;
template class MapDecoder<double>;
template class VectorDecoder<float>;
template class VectorDecoder<double>;
template class InverseRenderer<float>;
template class InverseRenderer<double>;

}  // namespace pdr::nets
