// Copyright 2026 The PGRD-DL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pgrd/bonusnet.h"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pgrd {
namespace {

constexpr int kCheckpointVersion = 1;

int ParseInt(std::string_view text, std::string_view descriptor) {
  if (text.empty()) {
    throw ConfigError("bad network descriptor '" + std::string(descriptor) + "'");
  }
  int value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') {
      throw ConfigError("bad network descriptor '" + std::string(descriptor) +
                        "'");
    }
    value = value * 10 + (c - '0');
  }
  return value;
}

std::vector<std::string_view> Split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

void ConvForward(const ConvLayer& conv, const NetworkSpec::LayerInfo& info,
                 const double* params, const std::vector<double>& in,
                 std::vector<double>& out) {
  const Shape3& is = info.in;
  const Shape3& os = info.out;
  const double* weights = params + info.param_offset;
  const double* bias = weights + info.weight_count;
  const std::size_t filter_size =
      static_cast<std::size_t>(is.channels) * conv.kernel_h * conv.kernel_w;
  out.assign(os.size(), 0.0);
  for (int f = 0; f < os.channels; ++f) {
    const double* wf = weights + f * filter_size;
    for (int oy = 0; oy < os.height; ++oy) {
      for (int ox = 0; ox < os.width; ++ox) {
        double acc = bias[f];
        const double* w = wf;
        for (int c = 0; c < is.channels; ++c) {
          for (int ky = 0; ky < conv.kernel_h; ++ky) {
            const double* row =
                in.data() + (static_cast<std::size_t>(c) * is.height +
                             oy * conv.stride + ky) * is.width +
                ox * conv.stride;
            for (int kx = 0; kx < conv.kernel_w; ++kx) acc += *w++ * row[kx];
          }
        }
        out[(static_cast<std::size_t>(f) * os.height + oy) * os.width + ox] = acc;
      }
    }
  }
}

// Accumulates parameter gradients into `grad` and, when `in_grad` is not
// null, writes the gradient with respect to the layer input.
void ConvBackward(const ConvLayer& conv, const NetworkSpec::LayerInfo& info,
                  const double* params, const std::vector<double>& in,
                  const std::vector<double>& out_grad, double* grad,
                  std::vector<double>* in_grad) {
  const Shape3& is = info.in;
  const Shape3& os = info.out;
  const double* weights = params + info.param_offset;
  double* wgrad = grad + info.param_offset;
  double* bgrad = wgrad + info.weight_count;
  const std::size_t filter_size =
      static_cast<std::size_t>(is.channels) * conv.kernel_h * conv.kernel_w;
  if (in_grad != nullptr) in_grad->assign(is.size(), 0.0);
  for (int f = 0; f < os.channels; ++f) {
    for (int oy = 0; oy < os.height; ++oy) {
      for (int ox = 0; ox < os.width; ++ox) {
        const double g =
            out_grad[(static_cast<std::size_t>(f) * os.height + oy) * os.width + ox];
        if (g == 0.0) continue;
        bgrad[f] += g;
        std::size_t w = f * filter_size;
        for (int c = 0; c < is.channels; ++c) {
          for (int ky = 0; ky < conv.kernel_h; ++ky) {
            const std::size_t base =
                (static_cast<std::size_t>(c) * is.height + oy * conv.stride + ky) *
                    is.width +
                ox * conv.stride;
            for (int kx = 0; kx < conv.kernel_w; ++kx, ++w) {
              wgrad[w] += g * in[base + kx];
              if (in_grad != nullptr) (*in_grad)[base + kx] += g * weights[w];
            }
          }
        }
      }
    }
  }
}

void DenseForward(const NetworkSpec::LayerInfo& info, const double* params,
                  const std::vector<double>& in, std::vector<double>& out) {
  const std::size_t n_in = info.in.size();
  const std::size_t n_out = info.out.size();
  const double* weights = params + info.param_offset;
  const double* bias = weights + info.weight_count;
  out.assign(n_out, 0.0);
  for (std::size_t u = 0; u < n_out; ++u) {
    const double* w = weights + u * n_in;
    double acc = bias[u];
    for (std::size_t i = 0; i < n_in; ++i) acc += w[i] * in[i];
    out[u] = acc;
  }
}

void DenseBackward(const NetworkSpec::LayerInfo& info, const double* params,
                   const std::vector<double>& in,
                   const std::vector<double>& out_grad, double* grad,
                   std::vector<double>* in_grad) {
  const std::size_t n_in = info.in.size();
  const std::size_t n_out = info.out.size();
  const double* weights = params + info.param_offset;
  double* wgrad = grad + info.param_offset;
  double* bgrad = wgrad + info.weight_count;
  if (in_grad != nullptr) in_grad->assign(n_in, 0.0);
  for (std::size_t u = 0; u < n_out; ++u) {
    const double g = out_grad[u];
    if (g == 0.0) continue;
    bgrad[u] += g;
    const double* w = weights + u * n_in;
    double* wg = wgrad + u * n_in;
    for (std::size_t i = 0; i < n_in; ++i) {
      wg[i] += g * in[i];
      if (in_grad != nullptr) (*in_grad)[i] += g * w[i];
    }
  }
}

}  // namespace

NetworkSpec::NetworkSpec(Shape3 input, std::vector<LayerSpec> layers)
    : input_(input), layers_(std::move(layers)) {
  if (input_.channels < 1 || input_.height < 1 || input_.width < 1) {
    throw ConfigError("network input shape must be positive");
  }
  if (layers_.empty() || !std::holds_alternative<DenseLayer>(layers_.back())) {
    throw ConfigError("network must end with a dense output layer");
  }
  Shape3 shape = input_;
  std::size_t offset = 0;
  for (const LayerSpec& layer : layers_) {
    LayerInfo info;
    info.in = shape;
    info.param_offset = offset;
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      if (conv->filters < 1 || conv->kernel_h < 1 || conv->kernel_w < 1 ||
          conv->stride < 1) {
        throw ConfigError("conv layer parameters must be positive");
      }
      if (conv->kernel_h > shape.height || conv->kernel_w > shape.width) {
        throw ConfigError("conv kernel larger than its input");
      }
      info.out = {conv->filters, (shape.height - conv->kernel_h) / conv->stride + 1,
                  (shape.width - conv->kernel_w) / conv->stride + 1};
      info.fan_in = static_cast<std::size_t>(shape.channels) * conv->kernel_h *
                    conv->kernel_w;
      info.weight_count = conv->filters * info.fan_in;
      info.bias_count = conv->filters;
    } else if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      if (dense->units < 1) throw ConfigError("dense layer needs units >= 1");
      info.out = {dense->units, 1, 1};
      info.fan_in = shape.size();
      info.weight_count = dense->units * info.fan_in;
      info.bias_count = dense->units;
    } else {
      info.out = shape;
    }
    offset += info.weight_count + info.bias_count;
    shape = info.out;
    info_.push_back(info);
  }
  num_params_ = offset;
}

NetworkSpec NetworkSpec::Parse(std::string_view descriptor, Shape3 input) {
  std::vector<LayerSpec> layers;
  for (std::string_view raw : Split(descriptor, ',')) {
    const std::string_view token = Trim(raw);
    if (token == "relu") {
      layers.emplace_back(RectifierLayer{});
    } else if (token.starts_with("dense:")) {
      layers.emplace_back(DenseLayer{ParseInt(token.substr(6), descriptor)});
    } else if (token.starts_with("conv:")) {
      const std::string_view body = token.substr(5);
      const auto slash = Split(body, '/');
      if (slash.size() != 2) {
        throw ConfigError("conv layer needs a stride: '" + std::string(token) + "'");
      }
      const auto dims = Split(slash[0], 'x');
      ConvLayer conv;
      conv.stride = ParseInt(slash[1], descriptor);
      if (dims.size() == 2) {
        conv.filters = ParseInt(dims[0], descriptor);
        conv.kernel_h = conv.kernel_w = ParseInt(dims[1], descriptor);
      } else if (dims.size() == 3) {
        conv.filters = ParseInt(dims[0], descriptor);
        conv.kernel_h = ParseInt(dims[1], descriptor);
        conv.kernel_w = ParseInt(dims[2], descriptor);
      } else {
        throw ConfigError("bad conv layer '" + std::string(token) + "'");
      }
      layers.emplace_back(conv);
    } else {
      throw ConfigError("unknown layer '" + std::string(token) + "'");
    }
  }
  return NetworkSpec(input, std::move(layers));
}

NetworkSpec NetworkSpec::ArcadeArchitecture(int num_actions) {
  return NetworkSpec(
      {4, 84, 84},
      {ConvLayer{16, 8, 8, 4}, RectifierLayer{}, ConvLayer{32, 4, 4, 2},
       RectifierLayer{}, DenseLayer{256}, RectifierLayer{},
       DenseLayer{num_actions}});
}

std::string NetworkSpec::Descriptor() const {
  std::string out;
  for (const LayerSpec& layer : layers_) {
    if (!out.empty()) out += ',';
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      out += "conv:" + std::to_string(conv->filters) + "x" +
             std::to_string(conv->kernel_h) + "x" +
             std::to_string(conv->kernel_w) + "/" + std::to_string(conv->stride);
    } else if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      out += "dense:" + std::to_string(dense->units);
    } else {
      out += "relu";
    }
  }
  return out;
}

int NetworkSpec::num_outputs() const {
  return std::get<DenseLayer>(layers_.back()).units;
}

ParamVector& ParamVector::operator+=(const ParamVector& other) {
  Axpy(1.0, other);
  return *this;
}

ParamVector& ParamVector::operator*=(double scale) {
  for (double& v : values_) v *= scale;
  return *this;
}

void ParamVector::Axpy(double scale, const ParamVector& other) {
  if (other.size() != size()) throw UsageError("ParamVector size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += scale * other[i];
}

void ParamVector::SetZero() { std::fill(values_.begin(), values_.end(), 0.0); }

double ParamVector::Norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

bool ParamVector::AllFinite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::uint64_t ParamVector::Fingerprint() const {
  std::uint64_t h = HashCombine(0x9a7a, values_.size());
  for (double v : values_) h = HashCombine(h, std::bit_cast<std::uint64_t>(v));
  return h;
}

ParamVector InitParams(const NetworkSpec& spec, Rng& rng) {
  ParamVector params(spec.num_params());
  const auto& info = spec.layer_info();
  for (std::size_t k = 0; k + 1 < info.size(); ++k) {
    if (info[k].weight_count == 0) continue;
    const double stddev = std::sqrt(2.0 / static_cast<double>(info[k].fan_in));
    for (std::size_t w = 0; w < info[k].weight_count; ++w) {
      params[info[k].param_offset + w] = rng.Normal(0.0, stddev);
    }
  }
  return params;
}

ForwardResult Forward(const NetworkSpec& spec, const ParamVector& params,
                      const Observation& obs) {
  const Shape3& in = spec.input_shape();
  if (obs.channels != in.channels || obs.height != in.height ||
      obs.width != in.width || obs.data.size() != in.size()) {
    throw UsageError("Forward: observation shape does not match network input");
  }
  if (params.size() != spec.num_params()) {
    throw UsageError("Forward: parameter vector has wrong length");
  }
  ForwardResult result;
  auto& acts = result.cache.activations;
  acts.reserve(spec.layers().size() + 1);
  acts.push_back(obs.data);
  const double* p = params.span().data();
  for (std::size_t k = 0; k < spec.layers().size(); ++k) {
    const LayerSpec& layer = spec.layers()[k];
    const auto& info = spec.layer_info()[k];
    std::vector<double> out;
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      ConvForward(*conv, info, p, acts.back(), out);
    } else if (std::holds_alternative<DenseLayer>(layer)) {
      DenseForward(info, p, acts.back(), out);
    } else {
      out = acts.back();
      for (double& v : out) v = v > 0.0 ? v : 0.0;
    }
    acts.push_back(std::move(out));
  }
  result.bonus = acts.back();
  result.cache.param_fingerprint = params.Fingerprint();
  return result;
}

void BackwardInto(const NetworkSpec& spec, const ParamVector& params,
                  const ForwardCache& cache,
                  std::span<const double> output_grad, ParamVector& grad) {
  if (cache.param_fingerprint != params.Fingerprint() ||
      cache.activations.size() != spec.layers().size() + 1) {
    throw UsageError("Backward: cache was produced under different parameters");
  }
  if (output_grad.size() != static_cast<std::size_t>(spec.num_outputs())) {
    throw UsageError("Backward: output gradient has wrong length");
  }
  if (grad.size() != spec.num_params()) {
    throw UsageError("Backward: gradient vector has wrong length");
  }
  const double* p = params.span().data();
  double* g = grad.span().data();
  std::vector<double> upstream(output_grad.begin(), output_grad.end());
  std::vector<double> downstream;
  for (std::size_t k = spec.layers().size(); k-- > 0;) {
    const LayerSpec& layer = spec.layers()[k];
    const auto& info = spec.layer_info()[k];
    const auto& in = cache.activations[k];
    // The first layer's input gradient is never needed.
    std::vector<double>* in_grad = k == 0 ? nullptr : &downstream;
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      ConvBackward(*conv, info, p, in, upstream, g, in_grad);
    } else if (std::holds_alternative<DenseLayer>(layer)) {
      DenseBackward(info, p, in, upstream, g, in_grad);
    } else if (in_grad != nullptr) {
      downstream.assign(in.size(), 0.0);
      for (std::size_t i = 0; i < in.size(); ++i) {
        downstream[i] = in[i] > 0.0 ? upstream[i] : 0.0;
      }
    }
    if (k > 0) upstream.swap(downstream);
  }
}

ParamVector Backward(const NetworkSpec& spec, const ParamVector& params,
                     const ForwardCache& cache,
                     std::span<const double> output_grad) {
  ParamVector grad(spec.num_params());
  BackwardInto(spec, params, cache, output_grad, grad);
  return grad;
}

void WriteCheckpoint(std::ostream& out, const NetworkSpec& spec,
                     const ParamVector& params) {
  if (params.size() != spec.num_params()) {
    throw UsageError("checkpoint: parameter vector does not match network");
  }
  const Shape3& in = spec.input_shape();
  out << "pgrd-checkpoint " << kCheckpointVersion << '\n'
      << "input " << in.channels << ' ' << in.height << ' ' << in.width << '\n'
      << "network " << spec.Descriptor() << '\n'
      << "params " << params.size() << '\n';
  char buf[64];
  for (double v : params) {
    std::snprintf(buf, sizeof(buf), "%a\n", v);
    out << buf;
  }
  out << "end\n";
}

Checkpoint ReadCheckpoint(std::istream& in) {
  auto fail = [](const std::string& what) -> ConfigError {
    return ConfigError("bad checkpoint: " + what);
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "pgrd-checkpoint") {
    throw fail("missing header");
  }
  if (version != kCheckpointVersion) {
    throw fail("unsupported version " + std::to_string(version));
  }
  std::string key;
  Shape3 shape;
  if (!(in >> key >> shape.channels >> shape.height >> shape.width) ||
      key != "input") {
    throw fail("missing input shape");
  }
  std::string descriptor;
  if (!(in >> key >> descriptor) || key != "network") {
    throw fail("missing network descriptor");
  }
  std::size_t count = 0;
  if (!(in >> key >> count) || key != "params") throw fail("missing params");
  NetworkSpec spec = NetworkSpec::Parse(descriptor, shape);
  if (count != spec.num_params()) throw fail("parameter count mismatch");
  std::vector<double> values(count);
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> token)) throw fail("truncated parameter list");
    char* end = nullptr;
    values[i] = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw fail("bad value " + token);
  }
  if (!(in >> token) || token != "end") throw fail("missing end marker");
  return {std::move(spec), ParamVector(std::move(values))};
}

void SaveCheckpoint(const std::string& path, const NetworkSpec& spec,
                    const ParamVector& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  WriteCheckpoint(out, spec, params);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  return ReadCheckpoint(in);
}

}  // namespace pgrd
