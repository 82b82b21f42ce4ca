#include "rigidity/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rigidity/errors.hpp"

namespace rigidity::config {

namespace {

class TomlParser {
 public:
  explicit TomlParser(std::string_view text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* current = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        const bool array = peek(1) == '[';
        pos_ += array ? 2 : 1;
        skip_ws();
        const auto keys = parse_key();
        skip_ws();
        expect(']');
        if (array) expect(']');
        end_of_line();
        current = array ? &append_table(root, keys) : &open_table(root, keys);
      } else {
        parse_keyval(*current);
        end_of_line();
      }
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
  }

  bool eof() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n')
        get();
      else
        break;
    }
  }
  // Whitespace, comments and newlines inside arrays.
  void skip_all() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r')
        get();
      else
        break;
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (!eof() && peek() != '\n') fail(std::string("unexpected '") + peek() + "' after value");
  }

  static bool bare(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

  std::vector<std::string> parse_key() {
    std::vector<std::string> keys;
    while (true) {
      skip_ws();
      if (peek() == '"')
        keys.push_back(parse_basic_string());
      else if (peek() == '\'')
        keys.push_back(parse_literal_string());
      else {
        const std::size_t start = pos_;
        while (!eof() && bare(peek())) ++pos_;
        if (pos_ == start) fail("expected a key");
        keys.emplace_back(s_.substr(start, pos_ - start));
      }
      skip_ws();
      if (peek() != '.') break;
      ++pos_;
    }
    return keys;
  }

  json& descend(json& table, const std::string& key) {
    json& child = table[key];
    if (child.is_null()) child = json::object();
    if (child.is_array() && !child.empty() && child.back().is_object()) return child.back();
    if (!child.is_object()) fail("key '" + key + "' is not a table");
    return child;
  }

  json& open_table(json& root, const std::vector<std::string>& keys) {
    json* t = &root;
    for (const auto& k : keys) t = &descend(*t, k);
    return *t;
  }

  json& append_table(json& root, const std::vector<std::string>& keys) {
    json* t = &root;
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) t = &descend(*t, keys[i]);
    json& arr = (*t)[keys.back()];
    if (arr.is_null()) arr = json::array();
    if (!arr.is_array()) fail("key '" + keys.back() + "' is not an array of tables");
    arr.push_back(json::object());
    return arr.back();
  }

  void parse_keyval(json& table) {
    const auto keys = parse_key();
    skip_ws();
    expect('=');
    skip_ws();
    json* t = &table;
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) t = &descend(*t, keys[i]);
    if (t->contains(keys.back())) fail("duplicate key '" + keys.back() + "'");
    (*t)[keys.back()] = parse_value();
  }

  json parse_value() {
    const char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    if (s_.substr(pos_, 4) == "true" && !bare(peek(4))) {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false" && !bare(peek(5))) {
      pos_ += 5;
      return false;
    }
    return parse_number();
  }

  std::string parse_basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = get();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated string");
        c = get();
        switch (c) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape '\\") + c + "'");
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  std::string parse_literal_string() {
    expect('\'');
    const std::size_t start = pos_;
    while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
    if (peek() != '\'') fail("unterminated string");
    std::string out(s_.substr(start, pos_ - start));
    ++pos_;
    return out;
  }

  json parse_number() {
    const std::size_t start = pos_;
    while (!eof() && (bare(peek()) || peek() == '.' || peek() == '+')) ++pos_;
    std::string tok(s_.substr(start, pos_ - start));
    if (tok.empty()) fail("expected a value");
    std::string body;
    for (char c : tok)
      if (c != '_') body += c;
    const std::string mag = (body[0] == '+' || body[0] == '-') ? body.substr(1) : body;
    const double sign = body[0] == '-' ? -1.0 : 1.0;
    if (mag == "inf") return sign * std::numeric_limits<double>::infinity();
    if (mag == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = mag.find_first_of(".eE") != std::string::npos &&
                          mag.rfind("0x", 0) != 0;
    std::size_t used = 0;
    try {
      if (is_float) {
        const double v = std::stod(body, &used);
        if (used == body.size()) return v;
      } else {
        int base = 10;
        std::string digits = mag;
        if (mag.rfind("0x", 0) == 0) base = 16;
        if (mag.rfind("0o", 0) == 0) base = 8;
        if (mag.rfind("0b", 0) == 0) base = 2;
        if (base != 10) digits = mag.substr(2);
        const long long v = std::stoll(digits, &used, base);
        if (used == digits.size()) return static_cast<long long>(sign) * v;
      }
    } catch (const std::exception&) {
    }
    fail("invalid value '" + tok + "'");
  }

  json parse_array() {
    expect('[');
    json arr = json::array();
    skip_all();
    while (peek() != ']') {
      if (eof()) fail("unterminated array");
      arr.push_back(parse_value());
      skip_all();
      if (peek() == ',') {
        ++pos_;
        skip_all();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    ++pos_;
    return arr;
  }

  json parse_inline_table() {
    expect('{');
    json t = json::object();
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return t;
    }
    while (true) {
      parse_keyval(t);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
        continue;
      }
      expect('}');
      return t;
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

json parse_toml(std::string_view text) { return TomlParser(text).parse(); }

json load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    try {
      return json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return parse_toml(buf.str());
}

Section::Section(const json& node, std::string path) : node_(&node), path_(std::move(path)) {
  if (!node.is_object()) throw ConfigError(path_.empty() ? "config root must be a table" : path_ + ": must be a table");
}

std::string Section::field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool Section::has(const std::string& key) const { return node_->contains(key); }

const json& Section::raw(const std::string& key) const {
  if (!has(key)) throw ConfigError(field(key) + ": missing");
  return node_->at(key);
}

Section Section::table(const std::string& key) const { return Section(raw(key), field(key)); }

std::optional<Section> Section::optional_table(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return table(key);
}

double Section::number(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
  return v.get<double>();
}

double Section::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

double Section::positive(const std::string& key) const {
  const double v = number(key);
  if (!(v > 0.0)) throw ConfigError(field(key) + ": must be positive");
  return v;
}

double Section::positive(const std::string& key, double fallback) const {
  return has(key) ? positive(key) : fallback;
}

long Section::integer(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
  return v.get<long>();
}

long Section::integer(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool Section::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const json& v = raw(key);
  if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
  return v.get<bool>();
}

std::string Section::string(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
  return v.get<std::string>();
}

std::string Section::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> Section::numbers(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<int> Section::integers(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer())
      throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected an integer");
    out.push_back(v[i].get<int>());
  }
  return out;
}

PeriodicPotential1D potential_from(const json& value, const std::string& field) {
  if (value.is_string()) {
    const auto name = value.get<std::string>();
    if (name == "pendulum") return PeriodicPotential1D::pendulum();
    if (name == "free") return PeriodicPotential1D::constant(0.0);
    throw ConfigError(field + ": unknown potential '" + name + "' (expected pendulum, free or a modes table)");
  }
  const Section t(value, field);
  const json& modes = t.raw("modes");
  if (!modes.is_array()) throw ConfigError(t.field("modes") + ": expected an array of [k, a, b] triples");
  std::map<int, cplx> coeffs;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string f = t.field("modes") + "[" + std::to_string(i) + "]";
    const json& m = modes[i];
    if (!m.is_array() || m.size() < 2 || m.size() > 3 || !m[0].is_number_integer())
      throw ConfigError(f + ": expected [k, a] or [k, a, b] with integer k");
    for (std::size_t j = 1; j < m.size(); ++j)
      if (!m[j].is_number()) throw ConfigError(f + ": amplitudes must be numbers");
    const int k = m[0].get<int>();
    const double a = m[1].get<double>();
    const double b = m.size() == 3 ? m[2].get<double>() : 0.0;
    if (k < 0) throw ConfigError(f + ": use k >= 0");
    if (k == 0)
      coeffs[0] += a;
    else
      coeffs[k] += cplx(0.5 * a, -0.5 * b);
  }
  try {
    return normalize_min_zero(PeriodicPotential1D(coeffs));
  } catch (const DomainError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

std::vector<PeriodicPotential1D> potentials_from(const Section& root) {
  const Section sys = root.table("system");
  const std::size_t d = sys.numbers("mu").size();
  if (d == 0) throw ConfigError(sys.field("mu") + ": must list at least one axis");
  std::vector<PeriodicPotential1D> out;
  const json& pot = sys.has("potential") ? sys.raw("potential") : json("pendulum");
  if (pot.is_array()) {
    if (pot.size() != d)
      throw ConfigError(sys.field("potential") + ": has " + std::to_string(pot.size()) +
                        " entries, system.mu has " + std::to_string(d));
    for (std::size_t i = 0; i < d; ++i)
      out.push_back(potential_from(pot[i], sys.field("potential") + "[" + std::to_string(i) + "]"));
  } else {
    out.assign(d, potential_from(pot, sys.field("potential")));
  }
  return out;
}

std::vector<MechanicalSystem1D> systems_from(const Section& root) {
  const auto pots = potentials_from(root);
  const Section sys = root.table("system");
  const auto mu = sys.numbers("mu");
  std::vector<MechanicalSystem1D> out;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 0.0)) throw ConfigError(sys.field("mu") + "[" + std::to_string(i) + "]: must be >= 0");
    out.push_back(mu[i] == 0.0 ? MechanicalSystem1D::free() : MechanicalSystem1D(mu[i], pots[i]));
  }
  return out;
}

TorusPotential perturbation_from(const Section& root, int dimension) {
  TorusPotential U(dimension);
  const auto pert = root.optional_table("perturbation");
  if (!pert) return U;
  const json& modes = pert->raw("modes");
  if (!modes.is_array()) throw ConfigError(pert->field("modes") + ": expected an array of tables");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const Section m(modes[i], pert->field("modes") + "[" + std::to_string(i) + "]");
    const auto k = m.integers("k");
    if (static_cast<int>(k.size()) != dimension)
      throw ConfigError(m.field("k") + ": has " + std::to_string(k.size()) + " components, system has " +
                        std::to_string(dimension) + " axes");
    const double a = m.number("cos", 0.0);
    const double b = m.number("sin", 0.0);
    U = U + TorusPotential::trig(dimension, k, a, b);
  }
  return U;
}

}  // namespace rigidity::config
