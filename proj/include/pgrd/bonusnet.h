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

// Feed-forward reward-bonus network: valid convolutions, dense layers and
// rectifiers over a stacked Observation, one output unit per action.
//
// Parameter layout (frozen; checkpoints, traces and ADAM moments rely on it):
// layers in order; per layer all weights, then all biases.
//   Conv:  weight[filter][in_channel][ky][kx], bias[filter]
//   Dense: weight[unit][input], bias[unit]  (inputs flattened C,H,W)

#ifndef PGRD_BONUSNET_H_
#define PGRD_BONUSNET_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pgrd/common.h"
#include "pgrd/envsim.h"

namespace pgrd {

struct Shape3 {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  bool operator==(const Shape3&) const = default;
};

struct ConvLayer {
  int filters = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int stride = 1;
};
struct DenseLayer {
  int units = 0;
};
struct RectifierLayer {};

using LayerSpec = std::variant<ConvLayer, DenseLayer, RectifierLayer>;

class NetworkSpec {
 public:
  struct LayerInfo {
    Shape3 in;
    Shape3 out;
    std::size_t param_offset = 0;
    std::size_t weight_count = 0;
    std::size_t bias_count = 0;
    // Fan-in of one output unit; 0 for rectifiers.
    std::size_t fan_in = 0;
  };

  // Validates shape chaining; throws ConfigError.
  NetworkSpec(Shape3 input, std::vector<LayerSpec> layers);

  // Descriptor grammar: comma-separated layers,
  //   conv:FILTERSxKHxKW/STRIDE | dense:UNITS | relu
  static NetworkSpec Parse(std::string_view descriptor, Shape3 input);
  // conv(16, 8x8, /4) -> relu -> conv(32, 4x4, /2) -> relu -> dense(256)
  // -> relu -> dense(num_actions) on 4x84x84.
  static NetworkSpec ArcadeArchitecture(int num_actions);

  std::string Descriptor() const;
  const Shape3& input_shape() const { return input_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<LayerInfo>& layer_info() const { return info_; }
  int num_outputs() const;
  std::size_t num_params() const { return num_params_; }
  // Offset and length of the output layer's slice of the parameter vector.
  std::size_t output_offset() const { return info_.back().param_offset; }
  std::size_t output_param_count() const {
    return info_.back().weight_count + info_.back().bias_count;
  }

  bool operator==(const NetworkSpec& other) const {
    return input_ == other.input_ && Descriptor() == other.Descriptor();
  }

 private:
  Shape3 input_;
  std::vector<LayerSpec> layers_;
  std::vector<LayerInfo> info_;
  std::size_t num_params_ = 0;
};

// Flat parameter vector; also the shape of gradients, traces and moments.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t n, double value = 0.0) : values_(n, value) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  const std::vector<double>& values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  ParamVector& operator+=(const ParamVector& other);
  ParamVector& operator*=(double scale);
  // this += scale * other
  void Axpy(double scale, const ParamVector& other);
  void SetZero();
  double Norm() const;
  bool AllFinite() const;
  // Identifies the exact bit pattern of the parameters.
  std::uint64_t Fingerprint() const;

  bool operator==(const ParamVector& other) const = default;

 private:
  std::vector<double> values_;
};

// Per-layer activations of one forward pass, tagged with the parameters
// that produced them.
struct ForwardCache {
  std::uint64_t param_fingerprint = 0;
  // activations[0] is the input, activations[k + 1] the output of layer k.
  std::vector<std::vector<double>> activations;
};

struct ForwardResult {
  std::vector<double> bonus;  // one entry per action
  ForwardCache cache;
};

// Hidden weights ~ N(0, 2 / fan_in); hidden biases and the entire output
// layer are zero, so the bonus is identically zero at initialization.
ParamVector InitParams(const NetworkSpec& spec, Rng& rng);

// Throws UsageError on shape mismatch.
ForwardResult Forward(const NetworkSpec& spec, const ParamVector& params,
                      const Observation& obs);

// Gradient of dot(output_grad, bonus) with respect to the parameters.
// Throws UsageError if the cache came from different parameters.
ParamVector Backward(const NetworkSpec& spec, const ParamVector& params,
                     const ForwardCache& cache,
                     std::span<const double> output_grad);
// Same, accumulated into `grad`.
void BackwardInto(const NetworkSpec& spec, const ParamVector& params,
                  const ForwardCache& cache,
                  std::span<const double> output_grad, ParamVector& grad);

// Checkpoint container: text header with the network descriptor, then the
// parameters as hex floats (bit-exact round trip).
struct Checkpoint {
  NetworkSpec spec;
  ParamVector params;
};

void WriteCheckpoint(std::ostream& out, const NetworkSpec& spec,
                     const ParamVector& params);
Checkpoint ReadCheckpoint(std::istream& in);
void SaveCheckpoint(const std::string& path, const NetworkSpec& spec,
                    const ParamVector& params);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace pgrd

#endif  // PGRD_BONUSNET_H_
