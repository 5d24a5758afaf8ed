#include "irsim/mapper.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "irsim/model.hpp"

namespace irsim {

PatternPair map_ternary(std::span<const int8_t> weights) {
  PatternPair out;
  out.plus.resize(weights.size());
  out.minus.resize(weights.size());
  for (size_t i = 0; i < weights.size(); ++i) {
    switch (weights[i]) {
      case 1:
        out.plus[i] = CellState::LRS;
        out.minus[i] = CellState::HRS;
        break;
      case -1:
        out.plus[i] = CellState::HRS;
        out.minus[i] = CellState::LRS;
        break;
      case 0:
        out.plus[i] = CellState::HRS;
        out.minus[i] = CellState::HRS;
        break;
      default:
        throw std::invalid_argument("map_ternary: weight outside {-1, 0, +1}");
    }
  }
  return out;
}

std::vector<int8_t> decode_ternary(const PatternPair& pair) {
  if (pair.plus.size() != pair.minus.size())
    throw std::invalid_argument("decode_ternary: column length mismatch");
  std::vector<int8_t> w(pair.plus.size());
  for (size_t i = 0; i < w.size(); ++i) {
    bool p = pair.plus[i] == CellState::LRS;
    bool m = pair.minus[i] == CellState::LRS;
    if (p && m) throw std::invalid_argument("decode_ternary: (LRS, LRS) is not a weight");
    w[i] = p ? 1 : (m ? -1 : 0);
  }
  return w;
}

PatternPair map_binary_baseline(std::span<const int8_t> weights) {
  PatternPair out;
  out.plus.resize(weights.size());
  out.minus.resize(weights.size());
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] != 1 && weights[i] != -1)
      throw std::invalid_argument("map_binary_baseline: weight outside {-1, +1}");
    out.plus[i] = weights[i] == 1 ? CellState::LRS : CellState::HRS;
    out.minus[i] = (i % 2 == 0) ? CellState::LRS : CellState::HRS;
  }
  return out;
}

BnFold fold_bn_to_threshold(const BnParams& bn) {
  if (bn.gamma == 0.0) throw std::invalid_argument("fold_bn_to_threshold: gamma must be nonzero");
  if (bn.var < 0.0) throw std::invalid_argument("fold_bn_to_threshold: var must be >= 0");
  BnFold f;
  f.theta = bn.mean - bn.beta * std::sqrt(bn.var + bn.eps) / bn.gamma;
  f.flip = bn.gamma < 0.0;
  return f;
}

QuantizedBias quantize_bias_units(double value) {
  QuantizedBias q;
  double r = std::round(value);
  // round() takes ties away from zero; pull exact .5 ties back toward it
  if (std::abs(std::abs(value - std::trunc(value)) - 0.5) == 0.0) r = std::trunc(value);
  q.units = static_cast<int>(r);
  q.residual = value - r;
  return q;
}

PatternPair map_bias_rows(int bias_units, int n_bias_rows) {
  if (std::abs(bias_units) > n_bias_rows)
    throw std::invalid_argument("map_bias_rows: bias magnitude exceeds available rows");
  PatternPair out;
  out.plus.assign(n_bias_rows, CellState::HRS);
  out.minus.assign(n_bias_rows, CellState::HRS);
  auto& target = bias_units > 0 ? out.plus : out.minus;
  for (int i = 0; i < std::abs(bias_units); ++i) target[i] = CellState::LRS;
  return out;
}

DistributionReport check_weight_distribution(std::span<const int8_t> weights, double tolerance) {
  DistributionReport r;
  if (weights.empty()) return r;
  size_t neg = 0, zero = 0, pos = 0;
  for (int8_t w : weights) {
    if (w == -1) ++neg;
    else if (w == 0) ++zero;
    else if (w == 1) ++pos;
    else throw std::invalid_argument("check_weight_distribution: non-ternary weight");
  }
  double n = static_cast<double>(weights.size());
  r.frac_neg = neg / n;
  r.frac_zero = zero / n;
  r.frac_pos = pos / n;
  // each +/-1 weight contributes one LRS cell across the two columns
  r.lrs_fraction = (r.frac_neg + r.frac_pos) / 2.0;
  r.pass = std::abs(r.frac_neg - 0.2) <= tolerance && std::abs(r.frac_zero - 0.6) <= tolerance &&
           std::abs(r.frac_pos - 0.2) <= tolerance;
  return r;
}

int bias_rows_for(MappingStyle style, int conv_rows) {
  double ref = style == MappingStyle::BaselineBn ? 96.0 : 32.0;
  int n = static_cast<int>(std::lround(conv_rows * ref / 540.0));
  return n < 1 ? 1 : n;
}

namespace {

const char* style_name(MappingStyle s) {
  return s == MappingStyle::BaselineBn ? "baseline" : "proposed";
}

MappingStyle style_from(const std::string& s) {
  if (s == "baseline") return MappingStyle::BaselineBn;
  if (s == "proposed") return MappingStyle::ProposedNoBn;
  throw std::invalid_argument("unknown mapping style: " + s);
}

}  // namespace

std::string MappingManifest::serialize() const {
  std::ostringstream os;
  os << "irsim-manifest v1\n";
  os << "style " << style_name(style) << "\n";
  os << "geometry rows=" << rows << " columns=" << columns << "\n";
  os << "layers " << layers.size() << "\n";
  for (const auto& l : layers) {
    os << "layer name=" << l.name << " model_index=" << l.model_layer_index
       << " kernel=" << l.kernel << " stride=" << l.stride << " padding=" << l.padding
       << " group=" << l.group_channels << " out=" << l.out_channels
       << " extra_bias=" << l.extra_bias_units << "\n";
    for (const auto& c : l.channels) {
      os << "channel pair=" << c.pair_index << " conv=" << c.conv_row_begin << "+" << c.conv_rows
         << " bias=" << c.bias_row_begin << "+" << c.bias_rows << " units=" << c.bias_units
         << " flipped=" << (c.flipped ? 1 : 0) << "\n";
    }
  }
  return os.str();
}

MappingManifest MappingManifest::parse(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  auto fail = [](const std::string& why) -> void {
    throw std::runtime_error("manifest parse error: " + why);
  };
  if (!std::getline(is, line) || line != "irsim-manifest v1") fail("bad magic/version");

  MappingManifest m;
  auto read_kv = [&fail](const std::string& tok, const std::string& key) {
    if (tok.rfind(key + "=", 0) != 0) fail("expected " + key + "=");
    return tok.substr(key.size() + 1);
  };

  std::string word;
  is >> word;
  if (word != "style") fail("expected style");
  is >> word;
  m.style = style_from(word);
  is >> word;
  if (word != "geometry") fail("expected geometry");
  is >> word;
  m.rows = std::stoi(read_kv(word, "rows"));
  is >> word;
  m.columns = std::stoi(read_kv(word, "columns"));
  is >> word;
  if (word != "layers") fail("expected layers");
  size_t n_layers;
  is >> n_layers;
  for (size_t i = 0; i < n_layers; ++i) {
    is >> word;
    if (word != "layer") fail("expected layer");
    LayerMapping l;
    is >> word; l.name = read_kv(word, "name");
    is >> word; l.model_layer_index = std::stoi(read_kv(word, "model_index"));
    is >> word; l.kernel = std::stoi(read_kv(word, "kernel"));
    is >> word; l.stride = std::stoi(read_kv(word, "stride"));
    is >> word; l.padding = std::stoi(read_kv(word, "padding"));
    is >> word; l.group_channels = std::stoi(read_kv(word, "group"));
    is >> word; l.out_channels = std::stoi(read_kv(word, "out"));
    is >> word; l.extra_bias_units = std::stoi(read_kv(word, "extra_bias"));
    for (int c = 0; c < l.out_channels; ++c) {
      is >> word;
      if (word != "channel") fail("expected channel");
      ChannelPlacement p;
      is >> word; p.pair_index = std::stoi(read_kv(word, "pair"));
      is >> word; {
        std::string v = read_kv(word, "conv");
        auto plus = v.find('+');
        if (plus == std::string::npos) fail("bad conv range");
        p.conv_row_begin = std::stoi(v.substr(0, plus));
        p.conv_rows = std::stoi(v.substr(plus + 1));
      }
      is >> word; {
        std::string v = read_kv(word, "bias");
        auto plus = v.find('+');
        if (plus == std::string::npos) fail("bad bias range");
        p.bias_row_begin = std::stoi(v.substr(0, plus));
        p.bias_rows = std::stoi(v.substr(plus + 1));
      }
      is >> word; p.bias_units = std::stoi(read_kv(word, "units"));
      is >> word; p.flipped = std::stoi(read_kv(word, "flipped")) != 0;
      l.channels.push_back(p);
    }
    m.layers.push_back(std::move(l));
  }
  if (!is) fail("truncated manifest");
  return m;
}

MappingManifest build_manifest(const TernaryConvModel& model, const MacroGeometry& geometry,
                               MappingStyle style, double distribution_tolerance) {
  geometry.validate();
  MappingManifest m;
  m.style = style;
  m.rows = geometry.rows;
  m.columns = geometry.columns;

  int next_pair = 0;
  const int max_pairs = geometry.columns / 2;

  for (size_t li = 0; li < model.layers.size(); ++li) {
    const LayerSpec& spec = model.layers[li];
    if (spec.kind != LayerKind::IrcGconv) continue;

    const int conv_rows = spec.weights_per_channel();
    const int n_bias = bias_rows_for(style, conv_rows);
    if (conv_rows + n_bias > geometry.rows)
      throw std::runtime_error("build_manifest: layer '" + spec.name + "' does not fit: " +
                               std::to_string(conv_rows + n_bias) + " rows needed");
    if (style == MappingStyle::BaselineBn && !spec.has_bn())
      throw std::runtime_error("build_manifest: baseline style needs BN parameters in layer '" +
                               spec.name + "'");
    if (style == MappingStyle::ProposedNoBn) {
      auto dist = check_weight_distribution(spec.weights, distribution_tolerance);
      if (!dist.pass)
        throw std::runtime_error("build_manifest: layer '" + spec.name +
                                 "' fails the ternary distribution gate");
    }

    LayerMapping lm;
    lm.name = spec.name;
    lm.model_layer_index = static_cast<int>(li);
    lm.kernel = spec.kernel;
    lm.stride = spec.stride;
    lm.padding = spec.padding;
    lm.group_channels = spec.group_channels;
    lm.out_channels = spec.out_channels;
    lm.extra_bias_units = 0;

    for (int ch = 0; ch < spec.out_channels; ++ch) {
      if (next_pair >= max_pairs)
        throw std::runtime_error("build_manifest: out of column pairs");
      ChannelPlacement p;
      p.pair_index = next_pair++;
      p.conv_rows = conv_rows;
      p.bias_rows = n_bias;
      if (style == MappingStyle::BaselineBn) {
        // BN bias rows closest to the driver, convolution cells behind them.
        p.bias_row_begin = 0;
        p.conv_row_begin = n_bias;
        BnFold fold = fold_bn_to_threshold(spec.bn[ch]);
        QuantizedBias q = quantize_bias_units(fold.theta);
        p.bias_units = -q.units;  // comparison against theta becomes a bias of -theta
        p.flipped = fold.flip;
        if (std::abs(p.bias_units) > n_bias)
          throw std::runtime_error("build_manifest: folded BN bias exceeds bias rows in layer '" +
                                   spec.name + "'");
      } else {
        // Convolution cells nearest the driver; extra-bias region behind them.
        p.conv_row_begin = 0;
        p.bias_row_begin = conv_rows;
        p.bias_units = 0;
      }
      lm.channels.push_back(p);
    }
    m.layers.push_back(std::move(lm));
  }
  return m;
}

void apply_extra_bias(MappingManifest& manifest, int layer_index, int bias_units) {
  auto& layer = manifest.layers.at(layer_index);
  layer.extra_bias_units = bias_units;
  for (auto& ch : layer.channels) {
    if (std::abs(bias_units) > ch.bias_rows)
      throw std::invalid_argument("apply_extra_bias: bias magnitude exceeds available rows");
    ch.bias_units = bias_units;
  }
}

}  // namespace irsim
