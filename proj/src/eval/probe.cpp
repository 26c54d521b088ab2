// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/eval/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pdr/ad/ops.hpp"
#include "pdr/ad/optim.hpp"

namespace pdr::eval {

using ad::Tensor;

ProbeMode parse_probe_mode(std::string_view name) {
  if (name == "frozen") return ProbeMode::frozen;
  if (name == "finetune") return ProbeMode::finetune;
  throw std::invalid_argument("unknown probe mode '" + std::string(name) + "' (expected frozen or finetune)");
}

std::string_view probe_mode_name(ProbeMode m) { return m == ProbeMode::frozen ? "frozen" : "finetune"; }

void ProbeConfig::check() const {
  if (epochs < 1) throw std::invalid_argument("probe epochs must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("probe learning_rate must be positive");
  if (batch_size < 1) throw std::invalid_argument("probe batch_size must be positive");
  if (hidden < 0) throw std::invalid_argument("probe hidden width must be non-negative");
}

template <typename T>
ProbeHead<T>::ProbeHead(std::vector<T> mean, std::vector<T> inv_std, int classes, std::int64_t hidden, Rng& rng)
    : mean_(std::move(mean)), inv_std_(std::move(inv_std)), classes_(classes), hidden_(hidden) {
  const auto d = static_cast<std::int64_t>(mean_.size());
  if (hidden_ > 0) {
    first_ = nets::Linear<T>(d, hidden_, rng);
    second_ = nets::Linear<T>(hidden_, classes_, rng);
  } else {
    first_ = nets::Linear<T>(d, classes_, rng);
  }
}

template <typename T>
Tensor<T> ProbeHead<T>::logits(const Tensor<T>& features) const {
  const auto d = input_dim();
  if (features.rank() != 2 || features.dim(1) != d)
    throw std::invalid_argument("probe: expected features [B," + std::to_string(d) + "], got " +
                                ad::shape_str(features.shape()));
  auto x = (features - Tensor<T>::from({1, d}, mean_)) * Tensor<T>::from({1, d}, inv_std_);
  return hidden_ > 0 ? second_(ad::relu(first_(x))) : first_(x);
}

template <typename T>
std::vector<Tensor<T>> ProbeHead<T>::parameters() const {
  std::vector<Tensor<T>> out{first_.weight, first_.bias};
  if (hidden_ > 0) {
    out.push_back(second_.weight);
    out.push_back(second_.bias);
  }
  return out;
}

template class ProbeHead<float>;
template class ProbeHead<double>;

namespace {

int class_count(std::span<const int> a, std::span<const int> b) {
  int c = 0;
  for (auto s : {a, b})
    for (int v : s) {
      if (v < 0) throw std::invalid_argument("probe labels must be non-negative");
      c = std::max(c, v + 1);
    }
  if (c < 2) throw std::invalid_argument("probe needs at least two classes");
  return c;
}

template <typename T>
void standardization(const Matrix& x, std::vector<T>& mean, std::vector<T>& inv_std) {
  mean.assign(static_cast<std::size_t>(x.cols), T(0));
  inv_std.assign(static_cast<std::size_t>(x.cols), T(1));
  for (std::int64_t j = 0; j < x.cols; ++j) {
    double m = 0.0;
    for (std::int64_t i = 0; i < x.rows; ++i) m += x(i, j);
    m /= static_cast<double>(x.rows);
    double v = 0.0;
    for (std::int64_t i = 0; i < x.rows; ++i) v += (x(i, j) - m) * (x(i, j) - m);
    v /= static_cast<double>(x.rows);
    mean[static_cast<std::size_t>(j)] = static_cast<T>(m);
    inv_std[static_cast<std::size_t>(j)] = static_cast<T>(v > 1e-24 ? 1.0 / std::sqrt(v) : 1.0);
  }
}

template <typename T>
Tensor<T> rows_of(const Matrix& x, std::span<const std::size_t> idx) {
  std::vector<T> v;
  v.reserve(idx.size() * static_cast<std::size_t>(x.cols));
  for (auto i : idx)
    for (double e : x.row(static_cast<std::int64_t>(i))) v.push_back(static_cast<T>(e));
  return Tensor<T>::from({static_cast<std::int64_t>(idx.size()), x.cols}, std::move(v));
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  std::vector<std::int64_t> idx(labels.begin(), labels.end());
  return ad::neg(ad::mean(ad::gather(ad::log_softmax(logits), idx, 1)));
}

template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& logits) {
  const auto n = logits.dim(0), c = logits.dim(1);
  const auto d = logits.data();
  std::vector<int> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto row = d.subspan(static_cast<std::size_t>(i * c), static_cast<std::size_t>(c));
    out[static_cast<std::size_t>(i)] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double accuracy(std::span<const int> pred, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

std::vector<int> pick(std::span<const int> labels, std::span<const std::size_t> idx) {
  std::vector<int> out;
  for (auto i : idx) out.push_back(labels[i]);
  return out;
}

}  // namespace

std::vector<std::size_t> sample_subset(std::size_t available, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n_train must be positive");
  if (static_cast<std::size_t>(n) > available)
    throw std::invalid_argument("n_train=" + std::to_string(n) + " exceeds the " + std::to_string(available) +
                                " available training samples");
  std::vector<std::size_t> all(available);
  std::iota(all.begin(), all.end(), 0);
  Rng rng(seed);
  shuffle(all, rng);
  all.resize(static_cast<std::size_t>(n));
  std::sort(all.begin(), all.end());
  return all;
}

ProbeResult train_probe(const Matrix& train_x, std::span<const int> train_y, const Matrix& test_x,
                        std::span<const int> test_y, const ProbeConfig& cfg) {
  cfg.check();
  if (train_x.rows < 1 || train_x.rows != static_cast<std::int64_t>(train_y.size()))
    throw std::invalid_argument("probe: training features and labels disagree in count");
  if (test_x.rows != static_cast<std::int64_t>(test_y.size()) || (test_x.rows > 0 && test_x.cols != train_x.cols))
    throw std::invalid_argument("probe: test features do not match the training layout");
  const int classes = class_count(train_y, test_y);

  std::vector<double> mean, inv_std;
  standardization(train_x, mean, inv_std);
  Rng rng(cfg.seed);
  ProbeResult r;
  r.head = ProbeHead<double>(mean, inv_std, classes, cfg.hidden, rng);
  ad::Adam<double> opt(r.head.parameters(), {cfg.learning_rate, 0.9, 0.999, 1e-8});

  std::vector<std::size_t> order(static_cast<std::size_t>(train_x.rows));
  std::iota(order.begin(), order.end(), 0);
  const auto b = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += b) {
      std::span<const std::size_t> idx(order.data() + start, std::min(b, order.size() - start));
      const auto y = pick(train_y, idx);
      auto loss = cross_entropy(r.head.logits(rows_of<double>(train_x, idx)), std::span<const int>(y));
      loss.backward();
      opt.step();
      loss_sum += loss.item() * static_cast<double>(idx.size());
    }
    r.loss_trace.push_back(loss_sum / static_cast<double>(order.size()));
  }

  ad::NoGradGuard no_grad;
  std::vector<std::size_t> all_train(static_cast<std::size_t>(train_x.rows));
  std::iota(all_train.begin(), all_train.end(), 0);
  r.train_accuracy = accuracy(argmax_rows(r.head.logits(rows_of<double>(train_x, all_train))), train_y);
  if (test_x.rows > 0) {
    std::vector<std::size_t> all_test(static_cast<std::size_t>(test_x.rows));
    std::iota(all_test.begin(), all_test.end(), 0);
    r.test_predictions = argmax_rows(r.head.logits(rows_of<double>(test_x, all_test)));
    r.test_accuracy = accuracy(r.test_predictions, test_y);
  }
  r.classes = classes;
  r.n_train = train_x.rows;
  r.n_test = test_x.rows;
  return r;
}

nets::FeatureSet<float> encode_all(const nets::InverseRenderer<float>& model, const Tensor<float>& images,
                                   std::int64_t batch) {
  ad::NoGradGuard no_grad;
  const auto n = images.dim(0);
  std::vector<nets::FeatureSet<float>> parts;
  for (std::int64_t s = 0; s < n; s += batch) parts.push_back(model.encode(ad::slice(images, 0, s, std::min(batch, n - s))));
  nets::FeatureSet<float> z;
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<Tensor<float>> blocks;
    for (const auto& p : parts) blocks.push_back(p.blocks[k]);
    z.blocks[k] = blocks.size() == 1 ? blocks[0] : ad::concat(blocks, 0);
  }
  return z;
}

Matrix representation_matrix(const nets::FeatureSet<float>& z, const std::vector<nets::Block>& blocks) {
  ad::NoGradGuard no_grad;
  const auto rep = nets::extract_representation(z, blocks);
  Matrix m(rep.dim(0), rep.dim(1));
  const auto d = rep.data();
  std::copy(d.begin(), d.end(), m.values.begin());
  return m;
}

ProbeResult finetune_probe(nets::InverseRenderer<float>& model, const std::vector<nets::Block>& blocks,
                           const Tensor<float>& train_images, std::span<const int> train_y,
                           const Tensor<float>& test_images, std::span<const int> test_y, const ProbeConfig& cfg) {
  cfg.check();
  if (train_images.dim(0) != static_cast<std::int64_t>(train_y.size()) ||
      test_images.dim(0) != static_cast<std::int64_t>(test_y.size()))
    throw std::invalid_argument("probe: images and labels disagree in count");
  const int classes = class_count(train_y, test_y);
  const auto initial = representation_matrix(encode_all(model, train_images), blocks);
  std::vector<float> mean, inv_std;
  standardization(initial, mean, inv_std);
  Rng rng(cfg.seed);
  ProbeHead<float> head(mean, inv_std, classes, cfg.hidden, rng);

  auto params = head.parameters();
  for (auto b : blocks)
    for (auto& [name, t] : model.block_parameters(b))
      if (name.rfind("encoder.", 0) == 0) params.push_back(t);
  ad::Adam<float> opt(params, {cfg.learning_rate, 0.9, 0.999, 1e-8});

  ProbeResult r;
  std::vector<std::size_t> order(train_y.size());
  std::iota(order.begin(), order.end(), 0);
  const auto b = static_cast<std::size_t>(cfg.batch_size);
  auto batch_images = [&](std::span<const std::size_t> idx) {
    std::vector<Tensor<float>> rows;
    for (auto i : idx) rows.push_back(ad::slice(train_images, 0, static_cast<std::int64_t>(i), 1));
    return rows.size() == 1 ? rows[0] : ad::concat(rows, 0);
  };
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += b) {
      std::span<const std::size_t> idx(order.data() + start, std::min(b, order.size() - start));
      const auto y = pick(train_y, idx);
      auto rep = nets::extract_representation(model.encode(batch_images(idx)), blocks);
      auto loss = cross_entropy(head.logits(rep), std::span<const int>(y));
      loss.backward();
      opt.step();
      loss_sum += static_cast<double>(loss.item()) * static_cast<double>(idx.size());
    }
    r.loss_trace.push_back(loss_sum / static_cast<double>(order.size()));
  }

  ad::NoGradGuard no_grad;
  auto predict = [&](const Tensor<float>& images) {
    const auto z = encode_all(model, images);
    return argmax_rows(head.logits(nets::extract_representation(z, blocks)));
  };
  r.train_accuracy = accuracy(predict(train_images), train_y);
  r.test_predictions = predict(test_images);
  r.test_accuracy = accuracy(r.test_predictions, test_y);
  r.classes = classes;
  r.n_train = train_images.dim(0);
  r.n_test = test_images.dim(0);
  return r;
}

io::Json to_json(const ProbeResult& r, ProbeMode mode) {
  return {{"task", "probe"},
          {"probe_mode", probe_mode_name(mode)},
          {"accuracy", r.test_accuracy},
          {"train_accuracy", r.train_accuracy},
          {"classes", r.classes},
          {"chance", 1.0 / static_cast<double>(std::max(r.classes, 1))},
          {"n_train", r.n_train},
          {"n_test", r.n_test},
          {"epochs", r.loss_trace.size()},
          {"final_train_loss", r.loss_trace.empty() ? 0.0 : r.loss_trace.back()}};
}

}  // namespace pdr::eval
