#include "irsim/model.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace irsim {

namespace {

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::DigitalFirst: return "digital_first";
    case LayerKind::IrcGconv: return "irc_gconv";
    case LayerKind::DigitalLast: return "digital_last";
  }
  return "?";
}

LayerKind kind_from(const std::string& s) {
  if (s == "digital_first") return LayerKind::DigitalFirst;
  if (s == "irc_gconv") return LayerKind::IrcGconv;
  if (s == "digital_last") return LayerKind::DigitalLast;
  throw std::runtime_error("model parse: unknown layer kind " + s);
}

void put_doubles(std::string& out, const double* v, size_t n) {
  size_t at = out.size();
  out.resize(at + n * sizeof(double));
  std::memcpy(out.data() + at, v, n * sizeof(double));
}

void get_doubles(const std::string& in, size_t& at, double* v, size_t n) {
  if (at + n * sizeof(double) > in.size()) throw std::runtime_error("model parse: truncated data");
  std::memcpy(v, in.data() + at, n * sizeof(double));
  at += n * sizeof(double);
}

// 2-bit weight codes: 00 -> 0, 01 -> +1, 10 -> -1 (11 invalid), four per byte.
void pack_weights(std::string& out, const std::vector<int8_t>& w) {
  uint8_t byte = 0;
  int fill = 0;
  for (int8_t x : w) {
    uint8_t code = x == 0 ? 0u : (x == 1 ? 1u : 2u);
    if (x != 0 && x != 1 && x != -1) throw std::runtime_error("pack_weights: non-ternary weight");
    byte |= static_cast<uint8_t>(code << (2 * fill));
    if (++fill == 4) {
      out.push_back(static_cast<char>(byte));
      byte = 0;
      fill = 0;
    }
  }
  if (fill) out.push_back(static_cast<char>(byte));
}

std::vector<int8_t> unpack_weights(const std::string& in, size_t& at, size_t count) {
  std::vector<int8_t> w(count);
  size_t bytes = (count + 3) / 4;
  if (at + bytes > in.size()) throw std::runtime_error("model parse: truncated weights");
  for (size_t i = 0; i < count; ++i) {
    uint8_t byte = static_cast<uint8_t>(in[at + i / 4]);
    uint8_t code = (byte >> (2 * (i % 4))) & 3u;
    if (code == 3) throw std::runtime_error("model parse: invalid weight code");
    w[i] = code == 0 ? 0 : (code == 1 ? 1 : -1);
  }
  at += bytes;
  return w;
}

}  // namespace

void LayerSpec::out_shape(int ih, int iw, int& oh, int& ow) const {
  oh = (ih + 2 * padding - kernel) / stride + 1;
  ow = (iw + 2 * padding - kernel) / stride + 1;
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("layer '" + name + "': empty output map");
}

void TernaryConvModel::validate() const {
  if (layers.size() < 2) throw std::invalid_argument("model: need digital first and last layers");
  if (layers.front().kind != LayerKind::DigitalFirst || layers.back().kind != LayerKind::DigitalLast)
    throw std::invalid_argument("model: first/last layers must be the digital ones");
  for (size_t i = 1; i + 1 < layers.size(); ++i)
    if (layers[i].kind != LayerKind::IrcGconv)
      throw std::invalid_argument("model: interior layers must be irc_gconv");
  if (classes <= 0) throw std::invalid_argument("model: classes must be positive");

  int c = input_channels, h = input_h, w = input_w;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::DigitalLast) {
      if (static_cast<int>(l.weights.size()) != classes * c * h * w)
        throw std::invalid_argument("model: classifier weight size mismatch");
      continue;
    }
    if (l.in_channels != c) throw std::invalid_argument("layer '" + l.name + "': channel mismatch");
    if (l.group_channels <= 0 || l.in_channels % l.group_channels != 0)
      throw std::invalid_argument("layer '" + l.name + "': bad group size");
    if (l.out_channels % l.groups() != 0)
      throw std::invalid_argument("layer '" + l.name + "': outputs not divisible among groups");
    if (static_cast<int>(l.weights.size()) != l.out_channels * l.weights_per_channel())
      throw std::invalid_argument("layer '" + l.name + "': weight size mismatch");
    if (!l.bn.empty() && static_cast<int>(l.bn.size()) != l.out_channels)
      throw std::invalid_argument("layer '" + l.name + "': BN size mismatch");
    if (l.kind == LayerKind::DigitalFirst &&
        static_cast<int>(l.thresholds.size()) != l.out_channels)
      throw std::invalid_argument("layer '" + l.name + "': thresholds missing");
    int oh, ow;
    l.out_shape(h, w, oh, ow);
    c = l.out_channels;
    h = oh;
    w = ow;
  }
  for (const auto& l : layers)
    for (int8_t x : l.weights)
      if (x < -1 || x > 1) throw std::invalid_argument("model: weight outside {-1, 0, +1}");
}

std::string TernaryConvModel::to_bytes() const {
  std::ostringstream os;
  os << "irsim-model v1\n";
  os << "classes " << classes << "\n";
  os << "input " << input_channels << " " << input_h << " " << input_w << "\n";
  os << "layers " << layers.size() << "\n";
  for (const auto& l : layers) {
    os << "layer kind=" << kind_name(l.kind) << " name=" << l.name << " in=" << l.in_channels
       << " out=" << l.out_channels << " kernel=" << l.kernel << " stride=" << l.stride
       << " pad=" << l.padding << " group=" << l.group_channels << " bn=" << (l.bn.empty() ? 0 : 1)
       << " thr=" << (l.thresholds.empty() ? 0 : 1) << " nweights=" << l.weights.size() << "\n";
  }
  os << "end-header\n";
  std::string out = os.str();
  for (const auto& l : layers) {
    pack_weights(out, l.weights);
    for (const auto& bn : l.bn) {
      double v[5] = {bn.gamma, bn.beta, bn.mean, bn.var, bn.eps};
      put_doubles(out, v, 5);
    }
    if (!l.thresholds.empty()) put_doubles(out, l.thresholds.data(), l.thresholds.size());
  }
  return out;
}

TernaryConvModel TernaryConvModel::from_bytes(const std::string& bytes) {
  size_t header_end = bytes.find("end-header\n");
  if (header_end == std::string::npos) throw std::runtime_error("model parse: no end-header");
  std::istringstream is(bytes.substr(0, header_end));
  std::string line, word;
  if (!std::getline(is, line) || line != "irsim-model v1")
    throw std::runtime_error("model parse: bad magic/version");

  TernaryConvModel m;
  size_t n_layers = 0;
  std::vector<size_t> n_weights;
  is >> word;
  if (word != "classes") throw std::runtime_error("model parse: expected classes");
  is >> m.classes;
  is >> word;
  if (word != "input") throw std::runtime_error("model parse: expected input");
  is >> m.input_channels >> m.input_h >> m.input_w;
  is >> word;
  if (word != "layers") throw std::runtime_error("model parse: expected layers");
  is >> n_layers;

  auto kv = [](const std::string& tok, const char* key) {
    std::string k(key);
    if (tok.rfind(k + "=", 0) != 0) throw std::runtime_error("model parse: expected " + k + "=");
    return tok.substr(k.size() + 1);
  };
  std::vector<bool> has_bn, has_thr;
  for (size_t i = 0; i < n_layers; ++i) {
    is >> word;
    if (word != "layer") throw std::runtime_error("model parse: expected layer");
    LayerSpec l;
    is >> word; l.kind = kind_from(kv(word, "kind"));
    is >> word; l.name = kv(word, "name");
    is >> word; l.in_channels = std::stoi(kv(word, "in"));
    is >> word; l.out_channels = std::stoi(kv(word, "out"));
    is >> word; l.kernel = std::stoi(kv(word, "kernel"));
    is >> word; l.stride = std::stoi(kv(word, "stride"));
    is >> word; l.padding = std::stoi(kv(word, "pad"));
    is >> word; l.group_channels = std::stoi(kv(word, "group"));
    is >> word; has_bn.push_back(std::stoi(kv(word, "bn")) != 0);
    is >> word; has_thr.push_back(std::stoi(kv(word, "thr")) != 0);
    is >> word; n_weights.push_back(std::stoul(kv(word, "nweights")));
    m.layers.push_back(std::move(l));
  }
  if (!is) throw std::runtime_error("model parse: truncated header");

  size_t at = header_end + std::strlen("end-header\n");
  for (size_t i = 0; i < n_layers; ++i) {
    LayerSpec& l = m.layers[i];
    l.weights = unpack_weights(bytes, at, n_weights[i]);
    if (has_bn[i]) {
      l.bn.resize(l.out_channels);
      for (auto& bn : l.bn) {
        double v[5];
        get_doubles(bytes, at, v, 5);
        bn = BnParams{v[0], v[1], v[2], v[3], v[4]};
      }
    }
    if (has_thr[i]) {
      l.thresholds.resize(l.out_channels);
      get_doubles(bytes, at, l.thresholds.data(), l.thresholds.size());
    }
  }
  m.validate();
  return m;
}

void TernaryConvModel::save(const std::string& path) const { write_file_bytes(path, to_bytes()); }

TernaryConvModel TernaryConvModel::load(const std::string& path) {
  return from_bytes(read_file_bytes(path));
}

void Dataset::validate() const {
  if (channels <= 0 || height <= 0 || width <= 0 || classes <= 0)
    throw std::invalid_argument("dataset: bad shape");
  if (bits.size() != static_cast<size_t>(samples()) * sample_size())
    throw std::invalid_argument("dataset: bits size mismatch");
  for (uint16_t l : labels)
    if (l >= classes) throw std::invalid_argument("dataset: label out of range");
}

std::string Dataset::to_bytes() const {
  std::ostringstream os;
  os << "irsim-dataset v1\n";
  os << "samples " << samples() << "\n";
  os << "shape " << channels << " " << height << " " << width << "\n";
  os << "classes " << classes << "\n";
  os << "end-header\n";
  std::string out = os.str();

  const int per = sample_size();
  const size_t bytes_per = (per + 7) / 8;
  for (int s = 0; s < samples(); ++s) {
    std::string packed(bytes_per, '\0');
    const uint8_t* src = sample(s);
    for (int i = 0; i < per; ++i)
      if (src[i]) packed[i / 8] |= static_cast<char>(1 << (i % 8));
    out += packed;
  }
  for (uint16_t l : labels) {
    out.push_back(static_cast<char>(l & 0xff));
    out.push_back(static_cast<char>((l >> 8) & 0xff));
  }
  return out;
}

Dataset Dataset::from_bytes(const std::string& bytes) {
  size_t header_end = bytes.find("end-header\n");
  if (header_end == std::string::npos) throw std::runtime_error("dataset parse: no end-header");
  std::istringstream is(bytes.substr(0, header_end));
  std::string line, word;
  if (!std::getline(is, line) || line != "irsim-dataset v1")
    throw std::runtime_error("dataset parse: bad magic/version");

  Dataset d;
  int n = 0;
  is >> word;
  if (word != "samples") throw std::runtime_error("dataset parse: expected samples");
  is >> n;
  is >> word;
  if (word != "shape") throw std::runtime_error("dataset parse: expected shape");
  is >> d.channels >> d.height >> d.width;
  is >> word;
  if (word != "classes") throw std::runtime_error("dataset parse: expected classes");
  is >> d.classes;
  if (!is || n < 0) throw std::runtime_error("dataset parse: bad header");

  size_t at = header_end + std::strlen("end-header\n");
  const int per = d.channels * d.height * d.width;
  const size_t bytes_per = (per + 7) / 8;
  if (at + n * bytes_per + n * 2 > bytes.size())
    throw std::runtime_error("dataset parse: truncated data");
  d.bits.resize(static_cast<size_t>(n) * per);
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i < per; ++i)
      d.bits[static_cast<size_t>(s) * per + i] =
          (static_cast<uint8_t>(bytes[at + i / 8]) >> (i % 8)) & 1u;
    at += bytes_per;
  }
  d.labels.resize(n);
  for (int s = 0; s < n; ++s) {
    d.labels[s] = static_cast<uint16_t>(static_cast<uint8_t>(bytes[at]) |
                                        (static_cast<uint8_t>(bytes[at + 1]) << 8));
    at += 2;
  }
  d.validate();
  return d;
}

void Dataset::save(const std::string& path) const { write_file_bytes(path, to_bytes()); }

Dataset Dataset::load(const std::string& path) { return from_bytes(read_file_bytes(path)); }

std::string read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

uint64_t fnv1a64(const std::string& bytes, uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

}  // namespace irsim
