#include "irsim/config_io.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "irsim/model.hpp"

namespace irsim {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt_bool(bool b) { return b ? "on" : "off"; }

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw std::runtime_error("config: bad boolean for " + key + ": " + v);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

void SimulationConfig::sync() {
  dev.sigma_log_r = cfg.sigma_log_r;
  geom.i_min_sense = cfg.i_min_sense;
  geom.i_max = cfg.i_max;
  geom.block_size = cfg.wire.block_size;
}

void SimulationConfig::validate() const {
  dev.validate();
  geom.validate();
  cfg.validate();
  if (voltage_table.empty()) throw std::invalid_argument("config: empty wl_voltage_table");
  if (distribution_tolerance < 0 || distribution_tolerance > 1)
    throw std::invalid_argument("config: distribution_tolerance out of [0, 1]");
}

const WlVoltagePoint* SimulationConfig::find_voltage(double v) const {
  for (const auto& p : voltage_table)
    if (p.voltage == v) return &p;
  return nullptr;
}

std::string SimulationConfig::serialize() const {
  std::ostringstream os;
  os << "# irsim simulation configuration\n";
  os << "seed = " << cfg.seed << "\n";
  os << "sigma_log_r = " << fmt(cfg.sigma_log_r) << "\n";
  os << "r_lrs = " << fmt(dev.r_lrs_nominal) << "\n";
  os << "r_hrs = " << fmt(dev.r_hrs_nominal) << "\n";
  os << "v_cell = " << fmt(dev.v_cell) << "\n";
  os << "wordline_voltage = " << fmt(dev.wordline_voltage) << "\n";
  os << "hrs_leakage = " << fmt_bool(dev.hrs_leakage) << "\n";
  os << "rows = " << geom.rows << "\n";
  os << "columns = " << geom.columns << "\n";
  os << "block_size = " << cfg.wire.block_size << "\n";
  os << "i_min_sense = " << fmt(cfg.i_min_sense) << "\n";
  os << "i_max = " << fmt(cfg.i_max) << "\n";
  os << "r_segment = " << fmt(cfg.wire.r_segment) << "\n";
  auto poly = [&](const std::array<double, 5>& a) {
    std::string s;
    for (size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + fmt(a[i]);
    return s;
  };
  os << "nonlin_poly_low = " << poly(cfg.nonlin_poly_low) << "\n";
  os << "nonlin_poly_high = " << poly(cfg.nonlin_poly_high) << "\n";
  os << "nonlin_breakpoint = " << cfg.nonlin_breakpoint << "\n";
  os << "nonlin_domain_max = " << cfg.nonlin_domain_max << "\n";
  os << "nonlin_bridge_seam = " << fmt_bool(cfg.nonlin_bridge_seam) << "\n";
  std::string curve;
  for (size_t i = 0; i < cfg.sa_margin_curve.size(); ++i)
    curve += (i ? "," : "") + fmt(cfg.sa_margin_curve[i].p_total) + ":" +
             fmt(cfg.sa_margin_curve[i].margin);
  os << "sa_margin_curve = " << curve << "\n";
  os << "sa_margin_extra = " << fmt(cfg.sa_margin_extra) << "\n";
  os << "effect_device_variation = " << fmt_bool(cfg.effects.device_variation) << "\n";
  os << "effect_nonlinearity = " << fmt_bool(cfg.effects.nonlinearity) << "\n";
  os << "effect_ir_drop = " << fmt_bool(cfg.effects.ir_drop) << "\n";
  os << "effect_sa_window = " << fmt_bool(cfg.effects.sa_window) << "\n";
  os << "effect_sa_offset = " << fmt_bool(cfg.effects.sa_offset) << "\n";
  std::string table;
  for (size_t i = 0; i < voltage_table.size(); ++i)
    table += (i ? "," : "") + fmt(voltage_table[i].voltage) + ":" +
             fmt(voltage_table[i].sigma_log_r) + ":" + fmt(voltage_table[i].current_scale);
  os << "wl_voltage_table = " << table << "\n";
  os << "distribution_tolerance = " << fmt(distribution_tolerance) << "\n";
  return os.str();
}

SimulationConfig SimulationConfig::parse(const std::string& text) {
  SimulationConfig c;
  bool seed_seen = false;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));

    try {
      if (key == "seed") {
        c.cfg.seed = std::stoull(val);
        seed_seen = true;
      } else if (key == "sigma_log_r") {
        c.cfg.sigma_log_r = std::stod(val);
      } else if (key == "r_lrs") {
        c.dev.r_lrs_nominal = std::stod(val);
      } else if (key == "r_hrs") {
        c.dev.r_hrs_nominal = std::stod(val);
      } else if (key == "v_cell") {
        c.dev.v_cell = std::stod(val);
      } else if (key == "wordline_voltage") {
        c.dev.wordline_voltage = std::stod(val);
      } else if (key == "hrs_leakage") {
        c.dev.hrs_leakage = parse_bool(val, key);
      } else if (key == "rows") {
        c.geom.rows = std::stoi(val);
      } else if (key == "columns") {
        c.geom.columns = std::stoi(val);
      } else if (key == "block_size") {
        c.cfg.wire.block_size = std::stoi(val);
      } else if (key == "i_min_sense") {
        c.cfg.i_min_sense = std::stod(val);
      } else if (key == "i_max") {
        c.cfg.i_max = std::stod(val);
      } else if (key == "r_segment") {
        c.cfg.wire.r_segment = std::stod(val);
      } else if (key == "nonlin_poly_low" || key == "nonlin_poly_high") {
        auto parts = split(val, ',');
        if (parts.size() != 5) throw std::runtime_error("need 5 coefficients");
        auto& poly = key == "nonlin_poly_low" ? c.cfg.nonlin_poly_low : c.cfg.nonlin_poly_high;
        for (int i = 0; i < 5; ++i) poly[i] = std::stod(parts[i]);
      } else if (key == "nonlin_breakpoint") {
        c.cfg.nonlin_breakpoint = std::stoi(val);
      } else if (key == "nonlin_domain_max") {
        c.cfg.nonlin_domain_max = std::stoi(val);
      } else if (key == "nonlin_bridge_seam") {
        c.cfg.nonlin_bridge_seam = parse_bool(val, key);
      } else if (key == "sa_margin_curve") {
        c.cfg.sa_margin_curve.clear();
        for (const auto& pt : split(val, ',')) {
          auto kv2 = split(pt, ':');
          if (kv2.size() != 2) throw std::runtime_error("curve point needs p:margin");
          c.cfg.sa_margin_curve.push_back({std::stod(kv2[0]), std::stod(kv2[1])});
        }
      } else if (key == "sa_margin_extra") {
        c.cfg.sa_margin_extra = std::stod(val);
      } else if (key == "effect_device_variation") {
        c.cfg.effects.device_variation = parse_bool(val, key);
      } else if (key == "effect_nonlinearity") {
        c.cfg.effects.nonlinearity = parse_bool(val, key);
      } else if (key == "effect_ir_drop") {
        c.cfg.effects.ir_drop = parse_bool(val, key);
      } else if (key == "effect_sa_window") {
        c.cfg.effects.sa_window = parse_bool(val, key);
      } else if (key == "effect_sa_offset") {
        c.cfg.effects.sa_offset = parse_bool(val, key);
      } else if (key == "wl_voltage_table") {
        c.voltage_table.clear();
        for (const auto& pt : split(val, ',')) {
          auto kv3 = split(pt, ':');
          if (kv3.size() != 3) throw std::runtime_error("table point needs voltage:sigma:scale");
          c.voltage_table.push_back({std::stod(kv3[0]), std::stod(kv3[1]), std::stod(kv3[2])});
        }
      } else if (key == "distribution_tolerance") {
        c.distribution_tolerance = std::stod(val);
      } else {
        throw std::runtime_error("unknown key");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("config line " + std::to_string(lineno) + " (" + key +
                               "): " + e.what());
    }
  }
  if (!seed_seen) throw std::runtime_error("config: seed is mandatory");
  c.sync();
  c.validate();
  return c;
}

void SimulationConfig::save(const std::string& path) const { write_file_bytes(path, serialize()); }

SimulationConfig SimulationConfig::load(const std::string& path) {
  return parse(read_file_bytes(path));
}

}  // namespace irsim
