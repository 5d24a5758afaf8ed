#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irsim/mapper.hpp"

namespace irsim {

enum class LayerKind { DigitalFirst, IrcGconv, DigitalLast };

/// One layer of the network. Weights are ternary for every kind; digital
/// layers are evaluated in exact integer arithmetic, IRC layers through the
/// simulated macro. Grouped convolution: in_channels splits into
/// in_channels / group_channels groups, output channels evenly among them.
struct LayerSpec {
  LayerKind kind = LayerKind::IrcGconv;
  std::string name;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int padding = 0;
  int group_channels = 0;

  std::vector<int8_t> weights;     // [out][group_ch][ky][kx]; digital_last: [class][c][h][w]
  std::vector<BnParams> bn;        // per out channel; empty = no BN
  std::vector<double> thresholds;  // digital layers: activation fires when sum > threshold

  int groups() const { return group_channels > 0 ? in_channels / group_channels : 1; }
  int weights_per_channel() const { return kernel * kernel * group_channels; }
  bool has_bn() const { return !bn.empty(); }

  void out_shape(int ih, int iw, int& oh, int& ow) const;
};

struct TernaryConvModel {
  int input_channels = 0;
  int input_h = 0;
  int input_w = 0;
  int classes = 0;
  std::vector<LayerSpec> layers;

  void validate() const;

  std::string to_bytes() const;
  static TernaryConvModel from_bytes(const std::string& bytes);
  void save(const std::string& path) const;
  static TernaryConvModel load(const std::string& path);
};

/// Binary classification fixture data: bit inputs plus integer labels.
struct Dataset {
  int channels = 0;
  int height = 0;
  int width = 0;
  int classes = 0;
  std::vector<uint8_t> bits;  // unpacked 0/1, [sample][channel][y][x]
  std::vector<uint16_t> labels;

  int samples() const { return static_cast<int>(labels.size()); }
  int sample_size() const { return channels * height * width; }
  const uint8_t* sample(int i) const { return bits.data() + static_cast<size_t>(i) * sample_size(); }

  void validate() const;

  std::string to_bytes() const;
  static Dataset from_bytes(const std::string& bytes);
  void save(const std::string& path) const;
  static Dataset load(const std::string& path);
};

/// Whole-file read/write helpers (binary-safe).
std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

/// FNV-1a 64-bit content hash, printed as 16 hex digits. Used for the report
/// fingerprint over all inputs.
uint64_t fnv1a64(const std::string& bytes, uint64_t h = 0xcbf29ce484222325ULL);
std::string hash_hex(uint64_t h);

}  // namespace irsim
