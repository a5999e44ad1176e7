#include "serpentine/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace serpentine {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& file, int line, int column, const std::string& msg) {
  std::ostringstream out;
  out << file << ':' << line << ':' << column << ": " << msg;
  throw std::runtime_error(out.str());
}

double to_real(const std::string& file, int line, int col, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(file, line, col, "expected a number, got '" + v + "'");
  }
}

int to_int(const std::string& file, int line, int col, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(file, line, col, "expected an integer, got '" + v + "'");
  }
}

std::vector<double> to_list(const std::string& file, int line, int col, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(file, line, col, "empty list entry");
    out.push_back(to_real(file, line, col, item));
  }
  if (out.empty()) fail(file, line, col, "empty list");
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& filename) {
  ExperimentConfig cfg;
  bool kind_seen = false;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(filename, line_no, 1, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      static const std::vector<std::string> known = {
          "geometry", "run", "reference", "sweep_interface", "sweep_mesh", "adaptive",
          "single"};
      if (std::find(known.begin(), known.end(), section) == known.end())
        fail(filename, line_no, 1, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = raw.find('=');
    if (eq == std::string::npos) fail(filename, line_no, 1, "expected 'key = value'");
    const std::string key = trim(raw.substr(0, eq));
    std::string value = raw.substr(eq + 1);
    const auto vhash = value.find('#');
    if (vhash != std::string::npos) value = value.substr(0, vhash);
    value = trim(value);
    const int col = static_cast<int>(eq) + 2;
    if (key.empty()) fail(filename, line_no, 1, "empty key");
    if (value.empty()) fail(filename, line_no, col, "empty value");

    auto real = [&] { return to_real(filename, line_no, col, value); };
    auto integer = [&] { return to_int(filename, line_no, col, value); };
    auto list = [&] { return to_list(filename, line_no, col, value); };
    bool handled = true;

    if (section == "geometry") {
      if (key == "L") cfg.L = real();
      else if (key == "R") cfg.R = real();
      else if (key == "W") cfg.W = real();
      else if (key == "L_out") cfg.L_out = real();
      else if (key == "u_av") cfg.u_av = real();
      else handled = false;
    } else if (section == "run") {
      if (key == "kind") {
        kind_seen = true;
        if (value == "reference") cfg.kind = RunKind::Reference;
        else if (value == "sweep_interface") cfg.kind = RunKind::SweepInterface;
        else if (value == "sweep_mesh") cfg.kind = RunKind::SweepMesh;
        else if (value == "adaptive") cfg.kind = RunKind::Adaptive;
        else if (value == "single") cfg.kind = RunKind::Single;
        else fail(filename, line_no, col, "unknown run kind '" + value + "'");
      } else if (key == "out_dir") cfg.out_dir = value;
      else if (key == "degree") cfg.degree = integer();
      else if (key == "reference") cfg.reference_path = value;
      else handled = false;
    } else if (section == "reference") {
      if (key == "h") cfg.reference_h = real();
      else if (key == "tol") cfg.reference_tol = real();
      else handled = false;
    } else if (section == "sweep_interface") {
      if (key == "h") cfg.sweep_h = real();
      else if (key == "x_gamma") cfg.sweep_x_gamma = list();
      else handled = false;
    } else if (section == "sweep_mesh") {
      if (key == "x_gamma") cfg.sweep_x_gamma_fixed = real();
      else if (key == "h") cfg.sweep_h_list = list();
      else handled = false;
    } else if (section == "adaptive") {
      if (key == "tol") cfg.adaptive.tol = real();
      else if (key == "tol_gamma") cfg.adaptive.tol_gamma = real();
      else if (key == "dx") cfg.adaptive.dx = real();
      else if (key == "delta") cfg.adaptive.delta = real();
      else if (key == "Re") cfg.adaptive.re = real();
      else if (key == "coarse_h") cfg.adaptive.coarse_h = real();
      else if (key == "max_iters") cfg.adaptive.max_iters = integer();
      else handled = false;
    } else if (section == "single") {
      if (key == "x_gamma") cfg.single_x_gamma = real();
      else if (key == "h") cfg.single_h = real();
      else handled = false;
    } else {
      fail(filename, line_no, 1, "key outside of any [section]");
    }
    if (!handled)
      fail(filename, line_no, 1, "unknown key '" + key + "' in section [" + section + "]");
  }
  if (!kind_seen) fail(filename, line_no + 1, 1, "missing [run] kind");
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in, path);
}

}  // namespace serpentine
