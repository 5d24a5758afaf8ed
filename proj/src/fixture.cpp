#include "irsim/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "irsim/inference.hpp"
#include "irsim/rng.hpp"

namespace irsim {

namespace {

constexpr int kChannels = 15;
constexpr int kClasses = 10;
constexpr int kSide = 16;
constexpr double kPixelNoise = 0.06;
constexpr int kMargin = 8;        // integer dot-product margin of every channel decision
constexpr int kDensityLo = 10;    // per-class ones in each derived channel code
constexpr int kDensityHi = 13;

template <typename T>
void shuffle_vec(std::vector<T>& v, RngStream& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = rng.next_u64() % i;
    std::swap(v[i - 1], v[j]);
  }
}

using Codes = std::vector<std::vector<uint8_t>>;  // [class][channel]

// Input codes: 12-dense, off-triples pairwise sharing at most one channel
// (pairwise Hamming distance >= 4).
Codes make_input_codes(RngStream& rng) {
  for (int attempt = 0; attempt < 20000; ++attempt) {
    std::vector<std::vector<int>> offs;
    bool dead = false;
    while (static_cast<int>(offs.size()) < kClasses && !dead) {
      std::vector<int> perm(kChannels);
      for (int i = 0; i < kChannels; ++i) perm[i] = i;
      shuffle_vec(perm, rng);
      std::vector<int> off(perm.begin(), perm.begin() + 3);
      bool ok = true;
      for (const auto& o : offs) {
        int shared = 0;
        for (int a : off)
          for (int b : o) shared += (a == b);
        if (shared > 1) { ok = false; break; }
      }
      if (ok) offs.push_back(off);
      else dead = true;
    }
    if (static_cast<int>(offs.size()) == kClasses) {
      Codes codes(kClasses, std::vector<uint8_t>(kChannels, 1));
      for (int c = 0; c < kClasses; ++c)
        for (int ch : offs[c]) codes[c][ch] = 0;
      return codes;
    }
  }
  throw std::runtime_error("fixture: input code search failed");
}

// ----- channel split search ------------------------------------------------
//
// One output channel is defined by pos[ch] / neg[ch] kernel-cell counts per
// input channel (ternary) or by pos[ch] with neg = 9 - pos (binary baseline).
// On the constant per-class maps the channel computes
//   s_c = sum_ch (pos[ch] - neg[ch]) * code_c[ch]
// and the output bit is s_c > threshold. The search asks for |s_c - thr|
// >= margin for every class, per-class activated-LRS floors (sensing window),
// per-sign cell budgets (ternary distribution gate), an informative number of
// negative classes, and a preference for splitting still-identical classes.

struct SplitGoal {
  const Codes* codes = nullptr;
  int threshold2 = 0;  // 2*theta folded in (baseline); 0 for ternary
  std::set<int> forced_pos, forced_neg;
  std::vector<std::pair<int, int>> collide_pairs;  // classes to pull apart
  bool ternary = true;
  int neg_lo = 2, neg_hi = 5;
};

struct SplitState {
  std::vector<int> pos, neg;
};

struct SplitScore {
  long hard = 0;  // margins, forced signs, budgets, density floors
  long soft = 0;  // still-identical class pairs left on the same side
  bool operator<=(const SplitScore& o) const {
    return hard < o.hard || (hard == o.hard && soft <= o.soft);
  }
  bool zero() const { return hard == 0 && soft == 0; }
};

// Cached per-class sums so a single-cell move costs O(classes) instead of a
// full rescan.
struct SplitEval {
  const SplitGoal* g = nullptr;
  SplitState st;
  long s[kClasses] = {};   // net dot product minus threshold
  long pp[kClasses] = {};  // activated G+ cells
  long pn[kClasses] = {};  // activated G- cells
  long P = 0, N = 0;

  void reset(const SplitGoal& goal, const SplitState& state) {
    g = &goal;
    st = state;
    P = N = 0;
    for (int c = 0; c < kClasses; ++c) s[c] = pp[c] = pn[c] = 0;
    const Codes& codes = *goal.codes;
    for (int ch = 0; ch < kChannels; ++ch) {
      P += st.pos[ch];
      N += st.neg[ch];
      for (int c = 0; c < kClasses; ++c) {
        if (!codes[c][ch]) continue;
        s[c] += st.pos[ch] - st.neg[ch];
        pp[c] += st.pos[ch];
        pn[c] += st.neg[ch];
      }
    }
    for (int c = 0; c < kClasses; ++c) s[c] -= goal.threshold2;
  }

  void apply(int ch, int dpos, int dneg) {
    st.pos[ch] += dpos;
    st.neg[ch] += dneg;
    P += dpos;
    N += dneg;
    const Codes& codes = *g->codes;
    for (int c = 0; c < kClasses; ++c) {
      if (!codes[c][ch]) continue;
      s[c] += dpos - dneg;
      pp[c] += dpos;
      pn[c] += dneg;
    }
  }

  SplitScore score() const {
    SplitScore sc;
    int negs = 0;
    int sign[kClasses];
    for (int c = 0; c < kClasses; ++c) {
      sign[c] = s[c] > 0 ? 1 : -1;
      if (g->forced_pos.count(c)) {
        if (s[c] < kMargin) sc.hard += kMargin - s[c];
      } else if (g->forced_neg.count(c)) {
        if (s[c] > -kMargin) sc.hard += s[c] + kMargin;
      } else {
        if (std::abs(s[c]) < kMargin) sc.hard += kMargin - std::abs(s[c]);
      }
      negs += s[c] < 0;
      sc.hard += 2 * std::max<long>(0, kDensityLo - pp[c]) +
                 2 * std::max<long>(0, kDensityLo - pn[c]);
    }
    auto h = [](long x) { return x > 0 ? x : 0; };
    if (g->ternary) {
      // per-sign cell fractions within the 20/60/20 gate: [21, 33] of 135
      sc.hard += 3 * (h(21 - P) + h(P - 33) + h(21 - N) + h(N - 33));
    }
    sc.hard += 5 * (h(negs - g->neg_hi) + h(g->neg_lo - negs));
    for (auto [a, b] : g->collide_pairs)
      if (sign[a] == sign[b]) sc.soft += 1;
    return sc;
  }
};

bool split_search(SplitState& st, const SplitGoal& g, RngStream& rng) {
  SplitState best;
  bool have_best = false;
  SplitScore best_sc;
  SplitEval ev;
  for (int restart = 0; restart < 60; ++restart) {
    SplitState init{std::vector<int>(kChannels, 0), std::vector<int>(kChannels, 0)};
    if (g.ternary) {
      for (int ch = 0; ch < kChannels; ++ch) {
        init.pos[ch] = static_cast<int>(rng.next_u64() % 3);
        init.neg[ch] = static_cast<int>(rng.next_u64() % 3);
      }
    } else {
      for (int ch = 0; ch < kChannels; ++ch) {
        init.pos[ch] = static_cast<int>(rng.next_u64() % 10);
        init.neg[ch] = 9 - init.pos[ch];
      }
    }
    ev.reset(g, init);
    SplitScore sc = ev.score();
    int stall = 0;
    for (int iter = 0; iter < 30000 && !sc.zero(); ++iter) {
      int ch = static_cast<int>(rng.next_u64() % kChannels);
      int d = rng.next_bit() ? 1 : -1;
      int dpos = 0, dneg = 0;
      if (g.ternary) {
        if (rng.next_bit()) dpos = d;
        else dneg = d;
        int npos = ev.st.pos[ch] + dpos, nneg = ev.st.neg[ch] + dneg;
        if (npos < 0 || nneg < 0 || npos + nneg > 9) continue;
      } else {
        dpos = d;
        dneg = -d;
        int npos = ev.st.pos[ch] + dpos;
        if (npos < 0 || npos > 9) continue;
      }
      ev.apply(ch, dpos, dneg);
      SplitScore s2 = ev.score();
      if (s2 <= sc) {
        stall = (s2.hard == sc.hard && s2.soft == sc.soft) ? stall + 1 : 0;
        sc = s2;
      } else {
        ev.apply(ch, -dpos, -dneg);
        ++stall;
      }
      if (stall > 800) {
        int kch = static_cast<int>(rng.next_u64() % kChannels);
        int npos, nneg;
        if (g.ternary) {
          npos = static_cast<int>(rng.next_u64() % 6);
          nneg = static_cast<int>(rng.next_u64() % (10 - npos));
          if (npos + nneg > 9) nneg = 9 - npos;
        } else {
          npos = static_cast<int>(rng.next_u64() % 10);
          nneg = 9 - npos;
        }
        ev.apply(kch, npos - ev.st.pos[kch], nneg - ev.st.neg[kch]);
        sc = ev.score();
        stall = 0;
      }
    }
    if (sc.hard == 0 && (!have_best || sc.soft < best_sc.soft)) {
      best = ev.st;
      best_sc = sc;
      have_best = true;
    }
    if (have_best && best_sc.soft == 0) break;
  }
  if (have_best) st = best;
  return have_best;
}

// Kernel cells of one (output channel, input channel): pos[ch] +1 cells from
// position 0 up, neg[ch] -1 cells from position 8 down.
void emit_cells(std::vector<int8_t>& w, const SplitState& st) {
  for (int ch = 0; ch < kChannels; ++ch) {
    int8_t cell[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
    for (int i = 0; i < st.pos[ch]; ++i) cell[i] = 1;
    for (int i = 0; i < st.neg[ch]; ++i) cell[8 - i] = -1;
    w.insert(w.end(), cell, cell + 9);
  }
}

struct BuiltLayer {
  std::vector<int8_t> weights;
  std::vector<BnParams> bn;  // baseline only
  Codes out_codes;
};

// One 15-channel layer on top of the given class codes. Derives the output
// code of every class from the searched splits; retries until all channel
// searches succeed, densities stay in range and the codes remain distinct.
BuiltLayer build_layer(const Codes& codes, bool ternary, RngStream layer_rng) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    RngStream rng = layer_rng.child(static_cast<uint64_t>(attempt));
    BuiltLayer out;
    out.out_codes.assign(kClasses, std::vector<uint8_t>(kChannels, 0));
    std::vector<int> ones(kClasses, 0);
    bool ok = true;

    for (int j = 0; j < kChannels && ok; ++j) {
      SplitGoal g;
      g.codes = &codes;
      g.ternary = ternary;
      int theta = 0;
      bool flip = false;
      if (!ternary) {
        theta = static_cast<int>(rng.next_u64() % 5) - 2;
        flip = j % 7 == 3;  // a few negative-gamma channels
        g.threshold2 = 2 * theta;
      }
      const int remaining = kChannels - j;
      for (int c = 0; c < kClasses; ++c) {
        bool need_one = kDensityLo - ones[c] >= remaining;
        bool need_zero = ones[c] >= kDensityHi;
        // the stored code bit is the channel OUTPUT; for flipped channels the
        // comparison sign is inverted by the mapping
        bool want_pos = flip ? need_zero : need_one;
        bool want_neg = flip ? need_one : need_zero;
        if (want_pos) g.forced_pos.insert(c);
        if (want_neg) g.forced_neg.insert(c);
      }
      for (int a = 0; a < kClasses; ++a)
        for (int b = a + 1; b < kClasses; ++b) {
          bool same = true;
          for (int k = 0; k < j && same; ++k)
            same = out.out_codes[a][k] == out.out_codes[b][k];
          if (same) g.collide_pairs.push_back({a, b});
        }

      SplitState st{std::vector<int>(kChannels, 0), std::vector<int>(kChannels, 0)};
      if (!split_search(st, g, rng)) { ok = false; break; }

      emit_cells(out.weights, st);
      if (!ternary) {
        BnParams bn;
        bn.gamma = flip ? -1.0 : 1.0;
        bn.beta = 0.0;
        bn.mean = static_cast<double>(theta);
        bn.var = 1.0;
        out.bn.push_back(bn);
      }
      for (int c = 0; c < kClasses; ++c) {
        long s = 0;
        for (int ch = 0; ch < kChannels; ++ch)
          if (codes[c][ch]) s += st.pos[ch] - st.neg[ch];
        s -= g.threshold2;
        int bit = s > 0 ? 1 : 0;
        if (flip) bit = 1 - bit;
        out.out_codes[c][j] = static_cast<uint8_t>(bit);
        ones[c] += bit;
      }
    }
    if (!ok) continue;

    bool dense_ok = true;
    for (int c = 0; c < kClasses; ++c)
      dense_ok = dense_ok && ones[c] >= kDensityLo && ones[c] <= kDensityHi;
    // corrupted single code bits must not be able to merge two classes
    bool separated = true;
    for (int a = 0; a < kClasses && separated; ++a)
      for (int b = a + 1; b < kClasses && separated; ++b) {
        int hamming = 0;
        for (int ch = 0; ch < kChannels; ++ch)
          hamming += out.out_codes[a][ch] != out.out_codes[b][ch];
        separated = hamming >= 2;
      }
    if (dense_ok && separated) return out;
  }
  throw std::runtime_error("fixture: layer construction failed");
}

Dataset make_dataset(const Codes& codes, int samples, uint64_t seed, uint64_t tag) {
  Dataset d;
  d.channels = kChannels;
  d.height = kSide;
  d.width = kSide;
  d.classes = kClasses;
  d.labels.resize(samples);
  d.bits.resize(static_cast<size_t>(samples) * d.sample_size());
  RngStream root = RngStream(seed).child(tag);
  for (int s = 0; s < samples; ++s) {
    int cls = s % kClasses;
    d.labels[s] = static_cast<uint16_t>(cls);
    RngStream rs = root.child(static_cast<uint64_t>(s));
    uint8_t* bits = d.bits.data() + static_cast<size_t>(s) * d.sample_size();
    int i = 0;
    for (int ch = 0; ch < kChannels; ++ch)
      for (int px = 0; px < kSide * kSide; ++px, ++i) {
        uint8_t base = codes[cls][ch];
        bits[i] = rs.next_unit() < kPixelNoise ? static_cast<uint8_t>(1 - base) : base;
      }
  }
  d.validate();
  return d;
}

LayerSpec make_majority_front() {
  LayerSpec l;
  l.kind = LayerKind::DigitalFirst;
  l.name = "denoise";
  l.in_channels = kChannels;
  l.out_channels = kChannels;
  l.kernel = 3;
  l.stride = 1;
  l.padding = 0;
  l.group_channels = 1;  // depthwise 3x3 majority
  l.weights.assign(static_cast<size_t>(kChannels) * 9, 1);
  l.thresholds.assign(kChannels, 4.5);
  return l;
}

LayerSpec make_code_classifier(const Codes& codes, int h, int w) {
  LayerSpec l;
  l.kind = LayerKind::DigitalLast;
  l.name = "classifier";
  l.in_channels = kChannels;
  l.out_channels = kClasses;
  l.kernel = 1;
  l.group_channels = kChannels;
  l.weights.resize(static_cast<size_t>(kClasses) * kChannels * h * w);
  size_t i = 0;
  for (int c = 0; c < kClasses; ++c)
    for (int ch = 0; ch < kChannels; ++ch)
      for (int px = 0; px < h * w; ++px, ++i) l.weights[i] = codes[c][ch] ? 1 : -1;
  return l;
}

double exact_accuracy(const TernaryConvModel& model, MappingStyle style,
                      const SimulationConfig& sc, const Dataset& data) {
  NonidealConfig off = sc.cfg;
  off.effects = EffectSwitches{false, false, false, false, false};
  DeviceParams dev = sc.dev;
  dev.hrs_leakage = false;
  MacroEngine engine(dev, sc.geom, off, AccumulationMode::single_shot());
  auto manifest = build_manifest(model, sc.geom, style, sc.distribution_tolerance);
  auto mapped = materialize_layers(model, manifest, sc.geom);
  int hits = 0;
  for (int s = 0; s < data.samples(); ++s) {
    auto r = engine.forward(model, manifest, mapped.data(), data.sample(s),
                            static_cast<uint64_t>(s));
    hits += (r.predicted == data.labels[s]);
  }
  return static_cast<double>(hits) / data.samples();
}

}  // namespace

FixtureBundle synthesize_classification_fixture(uint64_t seed, int test_samples,
                                                int calib_samples) {
  RngStream rng = RngStream(seed).child(0x66697874ULL);
  Codes input_codes = make_input_codes(rng);

  FixtureBundle fb;
  // 135-row channels carry a quarter of the 540-row currents: the 35..300
  // unit window maps to 9..80 at this scale.
  fb.config.cfg.i_min_sense = 9.0;
  fb.config.cfg.i_max = 80.0;
  fb.config.sync();
  fb.config.validate();

  const int irc_layers = 3;
  std::vector<int> map_sizes = {kSide - 2};  // after the 3x3 majority front
  for (int i = 0; i < irc_layers; ++i) map_sizes.push_back(map_sizes.back() - 2);

  auto assemble = [&](bool ternary) {
    TernaryConvModel m;
    m.input_channels = kChannels;
    m.input_h = kSide;
    m.input_w = kSide;
    m.classes = kClasses;
    m.layers.push_back(make_majority_front());
    Codes codes = input_codes;
    RngStream chain = rng.child(ternary ? 0x7465726eULL : 0x62696e61ULL);
    for (int li = 0; li < irc_layers; ++li) {
      BuiltLayer bl = build_layer(codes, ternary, chain.child(static_cast<uint64_t>(li)));
      LayerSpec l;
      l.kind = LayerKind::IrcGconv;
      l.name = "gconv" + std::to_string(li + 1);
      l.in_channels = kChannels;
      l.out_channels = kChannels;
      l.kernel = 3;
      l.stride = 1;
      l.padding = 0;
      l.group_channels = kChannels;
      l.weights = std::move(bl.weights);
      l.bn = std::move(bl.bn);
      m.layers.push_back(std::move(l));
      codes = std::move(bl.out_codes);
    }
    m.layers.push_back(make_code_classifier(codes, map_sizes.back(), map_sizes.back()));
    m.validate();
    return m;
  };

  fb.proposed = assemble(true);
  fb.baseline = assemble(false);

  fb.test = make_dataset(input_codes, test_samples, seed, 0x74657374ULL);
  fb.calibration = make_dataset(input_codes, calib_samples, seed, 0x63616cULL);

  double acc_p = exact_accuracy(fb.proposed, MappingStyle::ProposedNoBn, fb.config, fb.test);
  if (acc_p < 0.97)
    throw std::runtime_error("fixture: proposed ideal accuracy too low: " + std::to_string(acc_p));
  double acc_b = exact_accuracy(fb.baseline, MappingStyle::BaselineBn, fb.config, fb.test);
  if (acc_b < 0.90)
    throw std::runtime_error("fixture: baseline ideal accuracy too low: " + std::to_string(acc_b));
  return fb;
}

CalibrationFixture synthesize_calibration_fixture(uint64_t seed, int samples) {
  constexpr int kIn = 60;  // 3x3x60 -> 540 conv rows
  constexpr int kOut = 4;
  constexpr int kGrid = 4;  // 4x4 maps, 2x2 output pixels
  constexpr int kPos = 115, kNeg = 81;

  CalibrationFixture cf;
  cf.config.validate();  // full-scale defaults, 35..300 window

  RngStream rng = RngStream(seed).child(0x63616c6669ULL);

  cf.model.input_channels = kIn;
  cf.model.input_h = kGrid;
  cf.model.input_w = kGrid;
  cf.model.classes = 2;

  LayerSpec front;
  front.kind = LayerKind::DigitalFirst;
  front.name = "identity";
  front.in_channels = kIn;
  front.out_channels = kIn;
  front.kernel = 1;
  front.group_channels = 1;
  front.weights.assign(kIn, 1);
  front.thresholds.assign(kIn, 0.5);
  cf.model.layers.push_back(std::move(front));

  LayerSpec irc;
  irc.kind = LayerKind::IrcGconv;
  irc.name = "band";
  irc.in_channels = kIn;
  irc.out_channels = kOut;
  irc.kernel = 3;
  irc.padding = 0;
  irc.group_channels = kIn;
  const int wpc = irc.weights_per_channel();  // 540
  for (int ch = 0; ch < kOut; ++ch) {
    std::vector<int8_t> w(wpc, 0);
    std::vector<int> pos(wpc);
    for (int i = 0; i < wpc; ++i) pos[i] = i;
    shuffle_vec(pos, rng);
    for (int i = 0; i < kPos; ++i) w[pos[i]] = 1;
    for (int i = 0; i < kNeg; ++i) w[pos[kPos + i]] = -1;
    irc.weights.insert(irc.weights.end(), w.begin(), w.end());
  }
  cf.model.layers.push_back(std::move(irc));

  LayerSpec last;
  last.kind = LayerKind::DigitalLast;
  last.name = "head";
  last.in_channels = kOut;
  last.kernel = 1;
  last.group_channels = kOut;
  last.out_channels = 2;
  last.weights.assign(static_cast<size_t>(2) * kOut * 2 * 2, 1);
  cf.model.layers.push_back(std::move(last));
  cf.model.validate();

  Dataset d;
  d.channels = kIn;
  d.height = kGrid;
  d.width = kGrid;
  d.classes = 2;
  d.labels.assign(samples, 0);
  d.bits.resize(static_cast<size_t>(samples) * d.sample_size());
  RngStream ds = RngStream(seed).child(0x64617461ULL);
  for (int s = 0; s < samples; ++s) {
    RngStream rs = ds.child(static_cast<uint64_t>(s));
    uint8_t* bits = d.bits.data() + static_cast<size_t>(s) * d.sample_size();
    for (int i = 0; i < d.sample_size(); ++i) bits[i] = rs.next_unit() < 0.8 ? 1 : 0;
  }
  d.validate();
  cf.calibration = std::move(d);
  return cf;
}

}  // namespace irsim
