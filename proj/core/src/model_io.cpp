#include <fstream>
#include <sstream>

#include "p3/model.hpp"

// Model file format: '#' comments, [section] headers, key = value lines.
// Sections: [model] (name), [params], [field] (v1..v3), [invariants],
// [domain] (box, seed, samples, sing_tol). Unknown sections/keys are errors.

namespace p3 {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ModelIoError("model file line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// value forms: quoted string/expression, or bare number token(s)
std::string unquote(const std::string& v, int line) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    return v.substr(1, v.size() - 2);
  fail(line, "expected a double-quoted value, got '" + v + "'");
}

double number(const std::string& v, int line) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) fail(line, "trailing characters in number '" + v + "'");
    return d;
  } catch (const std::invalid_argument&) {
    fail(line, "expected a number, got '" + v + "'");
  } catch (const std::out_of_range&) {
    fail(line, "number out of range: '" + v + "'");
  }
}

Expression parse_expr_value(const std::string& raw, int line) {
  try {
    return parse(unquote(raw, line));
  } catch (const ParseError& pe) {
    fail(line, std::string("bad expression: ") + pe.what());
  }
}

void parse_box(const std::string& v, SampleBox& box, int line) {
  std::istringstream is(v);
  for (int k = 0; k < 3; ++k) {
    std::string part;
    if (!std::getline(is, part, k < 2 ? ',' : '\0'))
      fail(line, "box needs three lo:hi ranges separated by commas");
    auto colon = part.find(':');
    if (colon == std::string::npos) fail(line, "box range needs lo:hi");
    box.lo[k] = number(trim(part.substr(0, colon)), line);
    box.hi[k] = number(trim(part.substr(colon + 1)), line);
    if (!(box.lo[k] < box.hi[k])) fail(line, "box range must have lo < hi");
  }
}

}  // namespace

Model3D parse_model(const std::string& text) {
  Model3D m;
  bool have_v[3] = {false, false, false};
  bool have_domain_box = false;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = s.substr(1, s.size() - 2);
      if (section != "model" && section != "params" && section != "field" &&
          section != "invariants" && section != "domain")
        fail(line, "unknown section [" + section + "]");
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (section.empty()) fail(line, "key outside any section");

    if (section == "model") {
      if (key == "name")
        m.name = unquote(val, line);
      else
        fail(line, "unknown key '" + key + "' in [model]");
    } else if (section == "params") {
      m.params[key] = number(val, line);
    } else if (section == "field") {
      if (key == "v1" || key == "v2" || key == "v3") {
        int k = key[1] - '1';
        m.v[k] = parse_expr_value(val, line);
        have_v[k] = true;
      } else {
        fail(line, "unknown key '" + key + "' in [field]");
      }
    } else if (section == "invariants") {
      m.invariants[key] = parse_expr_value(val, line);
    } else {  // domain
      if (key == "box") {
        parse_box(val, m.box, line);
        have_domain_box = true;
      } else if (key == "seed") {
        m.box.seed = (std::uint64_t)number(val, line);
      } else if (key == "samples") {
        m.box.samples = (int)number(val, line);
        if (m.box.samples <= 0) fail(line, "samples must be positive");
      } else if (key == "sing_tol") {
        m.box.sing_tol = number(val, line);
        if (m.box.sing_tol <= 0) fail(line, "sing_tol must be positive");
      } else {
        fail(line, "unknown key '" + key + "' in [domain]");
      }
    }
  }
  for (int k = 0; k < 3; ++k)
    if (!have_v[k])
      throw ModelIoError("model file: missing field component v" + std::to_string(k + 1));
  (void)have_domain_box;  // box defaults to [0.1,2]^3 when omitted

  // every parameter referenced anywhere must be bound in [params];
  // this is also what rejects a stray time symbol
  auto check_bound = [&](const Expression& e, const std::string& where) {
    for (const auto& p : free_params(e))
      if (!m.params.count(p))
        throw ModelIoError("model file: unbound parameter '" + p + "' in " + where);
  };
  for (int k = 0; k < 3; ++k) check_bound(m.v[k], "v" + std::to_string(k + 1));
  for (const auto& [name, e] : m.invariants) check_bound(e, "invariant " + name);
  return m;
}

Model3D load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ModelIoError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_model(ss.str());
}

std::string write_model(const Model3D& m) {
  std::ostringstream os;
  os << "[model]\nname = \"" << m.name << "\"\n";
  if (!m.params.empty()) {
    os << "\n[params]\n";
    for (const auto& [k, v] : m.params) os << k << " = " << format_number(v) << "\n";
  }
  os << "\n[field]\n";
  for (int k = 0; k < 3; ++k)
    os << "v" << k + 1 << " = \"" << to_string(m.v[k]) << "\"\n";
  if (!m.invariants.empty()) {
    os << "\n[invariants]\n";
    for (const auto& [k, e] : m.invariants) os << k << " = \"" << to_string(e) << "\"\n";
  }
  os << "\n[domain]\nbox = ";
  for (int k = 0; k < 3; ++k)
    os << format_number(m.box.lo[k]) << ":" << format_number(m.box.hi[k])
       << (k < 2 ? "," : "\n");
  os << "seed = " << m.box.seed << "\n";
  os << "samples = " << m.box.samples << "\n";
  os << "sing_tol = " << format_number(m.box.sing_tol) << "\n";
  return os.str();
}

void save_model(const Model3D& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ModelIoError("cannot write model file '" + path + "'");
  f << write_model(m);
}

}  // namespace p3
