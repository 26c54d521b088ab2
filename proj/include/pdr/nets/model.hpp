// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdr/ad/tensor.hpp"
#include "pdr/nets/layers.hpp"
#include "pdr/scene/scene.hpp"

namespace pdr::nets {

/// The four scene-parameter blocks, in stacking order.
enum class Block : int { geom = 0, alb = 1, cam = 2, light = 3 };

inline constexpr std::array<Block, 4> kAllBlocks{Block::geom, Block::alb, Block::cam, Block::light};

std::string_view block_name(Block b);
Block parse_block(std::string_view name);
/// Parses "geom,alb" style lists; rejects empty and duplicate entries.
std::vector<Block> parse_blocks(std::string_view list);
std::string format_blocks(const std::vector<Block>& blocks);

struct Architecture {
  std::int64_t image_size = 64;
  std::int64_t feature_dim = 256;
  std::vector<std::int64_t> encoder_widths{32, 64, 128, 256};  // stride-2 3x3 convs
  std::vector<std::int64_t> decoder_widths{256, 128, 64, 32};  // stride-2 4x4 transposed convs
  std::int64_t mlp_hidden = 128;

  /// Transposed-conv blocks used by the map decoders at this image size.
  std::int64_t upsample_blocks() const;
  void check() const;
};

/// Per-block embeddings z_geom, z_alb, z_cam, z_light, each [N,F].
template <typename T>
struct FeatureSet {
  std::array<ad::Tensor<T>, 4> blocks;

  const ad::Tensor<T>& operator[](Block b) const { return blocks[static_cast<int>(b)]; }
  ad::Tensor<T>& operator[](Block b) { return blocks[static_cast<int>(b)]; }
  std::int64_t batch() const { return blocks[0].dim(0); }
  std::int64_t dim() const { return blocks[0].dim(1); }
  FeatureSet detached() const;
};

/// Concatenates the selected blocks in fixed (geom, alb, cam, light) order,
/// whatever order `blocks` lists them in. Returns [N, |blocks| * F].
template <typename T>
ad::Tensor<T> extract_representation(const FeatureSet<T>& z, const std::vector<Block>& blocks);

template <typename T>
class Encoder {
 public:
  Encoder() = default;
  Encoder(const Architecture& arch, Rng& rng);
  /// x [N,3,H,W] -> [N,F]
  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const;
  void collect(const std::string& prefix, NamedParams<T>& out) const;

 private:
  std::vector<Conv2d<T>> convs_;
  Linear<T> head_;
};

/// Linear stem followed by stride-2 transposed convolutions.
template <typename T>
class MapDecoder {
 public:
  MapDecoder() = default;
  MapDecoder(const Architecture& arch, std::int64_t out_channels, Rng& rng);
  /// z [N,F] -> [N,C,H,W] (unsquashed)
  ad::Tensor<T> operator()(const ad::Tensor<T>& z) const;
  void collect(const std::string& prefix, NamedParams<T>& out) const;

 private:
  Linear<T> stem_;
  std::vector<ConvTranspose2d<T>> ups_;
  std::int64_t start_channels_ = 0, start_size_ = 0;
};

/// Two-layer perceptron.
template <typename T>
class VectorDecoder {
 public:
  VectorDecoder() = default;
  VectorDecoder(const Architecture& arch, std::int64_t outputs, Rng& rng);
  ad::Tensor<T> operator()(const ad::Tensor<T>& z) const;
  void collect(const std::string& prefix, NamedParams<T>& out) const;

 private:
  Linear<T> hidden_, out_;
};

/// Four independent encoders and four decoders (no weight sharing).
template <typename T>
class InverseRenderer {
 public:
  InverseRenderer(const Architecture& arch, const ParamRanges& ranges, std::uint64_t seed);

  /// images [N,H,W,3] in [0,1] -> per-block features.
  FeatureSet<T> encode(const ad::Tensor<T>& images) const;
  /// Features -> scene parameters squashed into `ranges`.
  SceneParams<T> decode(const FeatureSet<T>& z) const;

  const Architecture& architecture() const { return arch_; }
  const ParamRanges& ranges() const { return ranges_; }

  /// Stable, ordered list of every trainable tensor with its name.
  NamedParams<T> named_parameters() const;
  std::vector<ad::Tensor<T>> parameters() const;
  /// Parameters of one block's encoder and decoder.
  NamedParams<T> block_parameters(Block b) const;
  std::int64_t parameter_count() const;

 private:
  Architecture arch_;
  ParamRanges ranges_;
  std::array<Encoder<T>, 4> encoders_;
  MapDecoder<T> depth_decoder_, albedo_decoder_;
  VectorDecoder<T> camera_decoder_, light_decoder_;
};

extern template class InverseRenderer<float>;
extern template class InverseRenderer<double>;

}  // namespace pdr::nets
