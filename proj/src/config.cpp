#include "hgf/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hgf/presets.hpp"

namespace hgf {

const ConfigValue* ConfigSection::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

const ConfigSection* ConfigFile::find(const std::string& name) const {
  for (const ConfigSection& section : sections) {
    if (section.name == name) return &section;
  }
  return nullptr;
}

std::vector<const ConfigSection*> ConfigFile::children(
    const std::string& prefix) const {
  std::vector<const ConfigSection*> out;
  const std::string needle = prefix + ".";
  for (const ConfigSection& section : sections) {
    if (section.name.rfind(needle, 0) == 0) out.push_back(&section);
  }
  return out;
}

namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
};

[[noreturn]] void fail(const std::string& origin, long line,
                       const std::string& message) {
  throw ValidationError(origin + ":" + std::to_string(line) + ": " + message);
}

std::string strip(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

// Removes a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (ch == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (ch == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string parse_quoted(Cursor& c, const std::string& origin, long line) {
  ++c.pos;  // opening quote
  std::string out;
  while (!c.done()) {
    const char ch = c.text[c.pos++];
    if (ch == '\\') {
      if (c.done()) fail(origin, line, "dangling escape in string");
      const char esc = c.text[c.pos++];
      switch (esc) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail(origin, line, "unsupported escape in string");
      }
      continue;
    }
    if (ch == '"') return out;
    out += ch;
  }
  fail(origin, line, "unterminated string");
}

ConfigValue parse_scalar(const std::string& token, const std::string& origin,
                         long line) {
  ConfigValue value;
  if (token == "true" || token == "false") {
    value.kind = ConfigValue::Kind::Boolean;
    value.boolean = token == "true";
    return value;
  }
  double number = 0.0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, number);
  if (ec == std::errc() && ptr == end) {
    value.kind = ConfigValue::Kind::Number;
    value.num = number;
    return value;
  }
  fail(origin, line, "cannot parse value '" + token + "'");
}

ConfigValue parse_value(Cursor& c, const std::string& origin, long line);

ConfigValue parse_array(Cursor& c, const std::string& origin, long line) {
  ConfigValue value;
  value.kind = ConfigValue::Kind::Array;
  ++c.pos;  // opening bracket
  for (;;) {
    while (!c.done() && std::isspace(static_cast<unsigned char>(c.peek()))) ++c.pos;
    if (c.done()) fail(origin, line, "unterminated array");
    if (c.peek() == ']') {
      ++c.pos;
      return value;
    }
    value.array.push_back(parse_value(c, origin, line));
    while (!c.done() && std::isspace(static_cast<unsigned char>(c.peek()))) ++c.pos;
    if (c.done()) fail(origin, line, "unterminated array");
    if (c.peek() == ',') {
      ++c.pos;
      continue;
    }
    if (c.peek() == ']') {
      ++c.pos;
      return value;
    }
    fail(origin, line, "expected ',' or ']' in array");
  }
}

ConfigValue parse_value(Cursor& c, const std::string& origin, long line) {
  if (c.done()) fail(origin, line, "missing value");
  if (c.peek() == '"') {
    ConfigValue value;
    value.kind = ConfigValue::Kind::String;
    value.str = parse_quoted(c, origin, line);
    return value;
  }
  if (c.peek() == '[') return parse_array(c, origin, line);
  std::size_t end = c.pos;
  while (end < c.text.size() && c.text[end] != ',' && c.text[end] != ']') ++end;
  const std::string token = strip(c.text.substr(c.pos, end - c.pos));
  c.pos = end;
  return parse_scalar(token, origin, line);
}

bool bare_key_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
}

}  // namespace

ConfigFile parse_config_text(const std::string& text, const std::string& origin) {
  ConfigFile file;
  file.sections.push_back(ConfigSection{});  // root
  std::size_t current = 0;

  std::istringstream lines(text);
  std::string raw;
  long line_number = 0;
  while (std::getline(lines, raw)) {
    ++line_number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = strip(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_number, "malformed section header");
      const std::string name = strip(line.substr(1, line.size() - 2));
      if (name.empty()) fail(origin, line_number, "empty section name");
      for (char ch : name) {
        if (!bare_key_char(ch) && ch != '.') {
          fail(origin, line_number, "section names use letters, digits, '_', '-', '.'");
        }
      }
      file.sections.push_back(ConfigSection{name, {}});
      current = file.sections.size() - 1;
      continue;
    }

    Cursor c{line, 0};
    std::string key;
    if (c.peek() == '"') {
      key = parse_quoted(c, origin, line_number);
    } else {
      while (!c.done() && bare_key_char(c.peek())) key += c.text[c.pos++];
    }
    if (key.empty()) fail(origin, line_number, "missing key");
    while (!c.done() && std::isspace(static_cast<unsigned char>(c.peek()))) ++c.pos;
    if (c.done() || c.peek() != '=') fail(origin, line_number, "expected '=' after key");
    ++c.pos;
    while (!c.done() && std::isspace(static_cast<unsigned char>(c.peek()))) ++c.pos;
    ConfigValue value = parse_value(c, origin, line_number);
    while (!c.done() && std::isspace(static_cast<unsigned char>(c.peek()))) ++c.pos;
    if (!c.done()) fail(origin, line_number, "unexpected trailing characters");

    ConfigSection& section = file.sections[current];
    if (section.find(key)) {
      fail(origin, line_number, "duplicate key '" + key + "'");
    }
    section.entries.emplace_back(std::move(key), std::move(value));
  }
  return file;
}

ConfigFile load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

// --- model configuration -----------------------------------------------------

namespace {

[[noreturn]] void config_fail(const std::string& where, const std::string& message) {
  throw ValidationError("config [" + where + "]: " + message);
}

double expect_number(const ConfigValue& value, const std::string& where,
                     const std::string& key) {
  if (value.kind != ConfigValue::Kind::Number) {
    config_fail(where, "'" + key + "' must be a number");
  }
  return value.num;
}

std::string expect_string(const ConfigValue& value, const std::string& where,
                          const std::string& key) {
  if (value.kind != ConfigValue::Kind::String) {
    config_fail(where, "'" + key + "' must be a string");
  }
  return value.str;
}

long expect_integer(const ConfigValue& value, const std::string& where,
                    const std::string& key) {
  const double num = expect_number(value, where, key);
  if (num != std::floor(num)) config_fail(where, "'" + key + "' must be an integer");
  return static_cast<long>(num);
}

void reject_unknown_keys(const ConfigSection& section,
                         const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : section.entries) {
    if (!known.count(key)) config_fail(where, "unknown key '" + key + "'");
  }
}

NodeKind parse_kind(const std::string& token, const std::string& where) {
  if (token == "binary") return NodeKind::Binary;
  if (token == "continuous") return NodeKind::Continuous;
  config_fail(where, "node kind must be 'binary' or 'continuous', got '" + token + "'");
}

ExplicitEdge parse_edge(const std::string& token, const std::string& where) {
  // child:parent:type[:strength]
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= token.size()) {
    const std::size_t colon = token.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(token.substr(start));
      break;
    }
    parts.push_back(token.substr(start, colon - start));
    start = colon + 1;
  }
  if (parts.size() != 3 && parts.size() != 4) {
    config_fail(where, "edges look like 'child:parent:type[:strength]', got '" +
                           token + "'");
  }
  ExplicitEdge edge;
  auto parse_int = [&](const std::string& part) {
    int value = 0;
    auto [ptr, ec] =
        std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size() || value < 0) {
      config_fail(where, "bad node index '" + part + "' in edge '" + token + "'");
    }
    return value;
  };
  edge.child = parse_int(parts[0]);
  edge.parent = parse_int(parts[1]);
  if (parts[2] == "value") {
    edge.type = Coupling::Value;
  } else if (parts[2] == "volatility") {
    edge.type = Coupling::Volatility;
  } else {
    config_fail(where, "edge type must be 'value' or 'volatility'");
  }
  if (parts.size() == 4) {
    double strength = 0.0;
    auto [ptr, ec] = std::from_chars(
        parts[3].data(), parts[3].data() + parts[3].size(), strength);
    if (ec != std::errc() || ptr != parts[3].data() + parts[3].size()) {
      config_fail(where, "bad strength in edge '" + token + "'");
    }
    edge.strength = strength;
  }
  return edge;
}

Prior parse_prior(const std::string& text, const std::string& where) {
  const std::size_t open = text.find('(');
  if (open == std::string::npos || text.back() != ')') {
    config_fail(where, "priors look like 'normal(m, s)', 'halfnormal(s)' or "
                       "'uniform(a, b)', got '" + text + "'");
  }
  const std::string name = strip(text.substr(0, open));
  const std::string args = text.substr(open + 1, text.size() - open - 2);
  std::vector<double> numbers;
  std::size_t start = 0;
  while (start <= args.size()) {
    std::size_t comma = args.find(',', start);
    const std::string part =
        strip(comma == std::string::npos ? args.substr(start)
                                         : args.substr(start, comma - start));
    if (!part.empty()) {
      double value = 0.0;
      auto [ptr, ec] =
          std::from_chars(part.data(), part.data() + part.size(), value);
      if (ec != std::errc() || ptr != part.data() + part.size()) {
        config_fail(where, "bad prior argument '" + part + "'");
      }
      numbers.push_back(value);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (name == "normal" && numbers.size() == 2) {
    return Prior::normal(numbers[0], numbers[1]);
  }
  if ((name == "halfnormal" || name == "half_normal") && numbers.size() == 1) {
    return Prior::half_normal(numbers[0]);
  }
  if (name == "uniform" && numbers.size() == 2) {
    return Prior::uniform(numbers[0], numbers[1]);
  }
  config_fail(where, "unknown prior '" + text + "'");
}

}  // namespace

ModelConfig parse_model_config(const ConfigFile& file,
                               const std::string& name_hint) {
  ModelConfig config;
  config.name = name_hint;

  for (const ConfigSection& section : file.sections) {
    const std::string& name = section.name;
    if (name.empty()) {
      if (!section.entries.empty()) {
        config_fail("", "top-level keys are not used; put everything in sections");
      }
      continue;
    }
    if (name != "network" && name != "parameters" && name != "response" &&
        name != "sampler" && name.rfind("inference.", 0) != 0) {
      config_fail(name, "unknown section");
    }
  }

  if (const ConfigSection* network = file.find("network")) {
    reject_unknown_keys(*network,
                        {"preset", "nodes", "edges", "observation_nodes", "name"},
                        "network");
    if (const ConfigValue* name = network->find("name")) {
      config.name = expect_string(*name, "network", "name");
    }
    if (const ConfigValue* preset = network->find("preset")) {
      config.preset_name = expect_string(*preset, "network", "preset");
    }
    if (const ConfigValue* nodes = network->find("nodes")) {
      if (nodes->kind != ConfigValue::Kind::Array) {
        config_fail("network", "'nodes' must be an array of kinds");
      }
      for (const ConfigValue& v : nodes->array) {
        config.nodes.push_back(
            parse_kind(expect_string(v, "network", "nodes"), "network"));
      }
    }
    if (const ConfigValue* edges = network->find("edges")) {
      if (edges->kind != ConfigValue::Kind::Array) {
        config_fail("network", "'edges' must be an array of edge strings");
      }
      for (const ConfigValue& v : edges->array) {
        config.edges.push_back(
            parse_edge(expect_string(v, "network", "edges"), "network"));
      }
    }
    if (const ConfigValue* observed = network->find("observation_nodes")) {
      if (observed->kind != ConfigValue::Kind::Array) {
        config_fail("network", "'observation_nodes' must be an array");
      }
      config.observation_nodes.clear();
      for (const ConfigValue& v : observed->array) {
        config.observation_nodes.push_back(static_cast<int>(
            expect_integer(v, "network", "observation_nodes")));
      }
    }
  } else {
    config_fail("network", "the config needs a [network] section");
  }
  if (config.preset_name && !config.nodes.empty()) {
    config_fail("network", "give either 'preset' or explicit 'nodes', not both");
  }
  if (!config.preset_name && config.nodes.empty()) {
    config_fail("network", "give either 'preset' or explicit 'nodes'");
  }

  if (const ConfigSection* parameters = file.find("parameters")) {
    for (const auto& [key, value] : parameters->entries) {
      config.parameters.emplace_back(
          key, expect_number(value, "parameters", key));
    }
  }

  if (const ConfigSection* response = file.find("response")) {
    reject_unknown_keys(*response, {"family", "inverse_temperature"}, "response");
    if (const ConfigValue* family = response->find("family")) {
      config.response.family = expect_string(*family, "response", "family");
    }
    if (const ConfigValue* t = response->find("inverse_temperature")) {
      config.response.inverse_temperature =
          expect_number(*t, "response", "inverse_temperature");
    }
  }

  if (const ConfigSection* sampler = file.find("sampler")) {
    reject_unknown_keys(*sampler,
                        {"chains", "draws", "warmup", "seed", "hdi_mass"},
                        "sampler");
    if (const ConfigValue* v = sampler->find("chains")) {
      config.sampler.chains =
          static_cast<int>(expect_integer(*v, "sampler", "chains"));
    }
    if (const ConfigValue* v = sampler->find("draws")) {
      config.sampler.draws =
          static_cast<int>(expect_integer(*v, "sampler", "draws"));
    }
    if (const ConfigValue* v = sampler->find("warmup")) {
      config.sampler.warmup =
          static_cast<int>(expect_integer(*v, "sampler", "warmup"));
    }
    if (const ConfigValue* v = sampler->find("seed")) {
      const long seed = expect_integer(*v, "sampler", "seed");
      if (seed < 0) config_fail("sampler", "'seed' must be non-negative");
      config.sampler.seed = static_cast<std::uint64_t>(seed);
    }
    if (const ConfigValue* v = sampler->find("hdi_mass")) {
      config.sampler.hdi_mass = expect_number(*v, "sampler", "hdi_mass");
      if (!(config.sampler.hdi_mass > 0.0 && config.sampler.hdi_mass <= 1.0)) {
        config_fail("sampler", "'hdi_mass' must lie in (0, 1]");
      }
    }
    if (config.sampler.chains < 1 || config.sampler.draws < 1 ||
        config.sampler.warmup < 1) {
      config_fail("sampler", "chains, draws and warmup must be positive");
    }
  }

  for (const ConfigSection* section : file.children("inference")) {
    const std::string where = section->name;
    const std::string param_name = where.substr(std::string("inference.").size());
    if (param_name.empty()) config_fail(where, "inference sections need a name");
    reject_unknown_keys(*section, {"target", "prior", "transform"}, where);
    ParameterSpec spec;
    spec.name = param_name;
    const ConfigValue* target = section->find("target");
    if (!target) config_fail(where, "missing 'target'");
    spec.target = expect_string(*target, where, "target");
    const ConfigValue* prior = section->find("prior");
    if (!prior) config_fail(where, "missing 'prior'");
    spec.prior = parse_prior(expect_string(*prior, where, "prior"), where);
    if (const ConfigValue* transform = section->find("transform")) {
      const std::string token = expect_string(*transform, where, "transform");
      if (token == "identity") {
        spec.transform = Transform::Identity;
      } else if (token == "log") {
        spec.transform = Transform::Log;
      } else {
        config_fail(where, "transform must be 'identity' or 'log'");
      }
    }
    config.space.push_back(std::move(spec));
  }

  return config;
}

ModelConfig load_model_config(const std::string& path) {
  std::string stem = path;
  const std::size_t slash = stem.find_last_of("/\\");
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  const std::size_t dot = stem.find_last_of('.');
  if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return parse_model_config(load_config_file(path), stem);
}

Network build_network(const ModelConfig& config) {
  Network net;
  if (config.preset_name) {
    net = preset(*config.preset_name);
  } else {
    net = new_network();
    for (NodeKind kind : config.nodes) {
      NodeAttributes attrs;
      if (kind == NodeKind::Binary) {
        attrs.mean = 0.5;
        attrs.expected_mean = 0.5;
      }
      net = add_node(std::move(net), kind, std::move(attrs));
    }
    for (const ExplicitEdge& edge : config.edges) {
      if (!(std::isfinite(edge.strength) && edge.strength >= 0.0)) {
        config_fail("network", "edge strengths must be non-negative");
      }
      if (edge.strength > 0.0) {
        net = add_edge(std::move(net), edge.child, edge.parent, edge.type,
                       edge.strength);
      } else {
        // Strength 0 keeps the edge but freezes the parent's influence.
        net = add_edge(std::move(net), edge.child, edge.parent, edge.type, 1.0);
        const char* attr = edge.type == Coupling::Value ? "value_coupling"
                                                        : "volatility_coupling";
        set_attribute(net,
                      "node." + std::to_string(edge.child) + "." + attr + "." +
                          std::to_string(
                              net.edges.parents(edge.child, edge.type).size() - 1),
                      0.0);
      }
    }
    net.sequence = derive_update_sequence(net);
  }
  for (const auto& [path, value] : config.parameters) {
    set_attribute(net, path, value);
  }
  for (int node : config.observation_nodes) {
    if (node < 0 || node >= net.size()) {
      config_fail("network", "observation node " + std::to_string(node) +
                                 " does not exist");
    }
  }
  return net;
}

Model build_model(const ModelConfig& config) {
  Model model;
  model.network = build_network(config);
  model.response = config.response;
  response_family(model.response.family);  // validates the name eagerly
  return model;
}

ParameterSpace build_space(const ModelConfig& config) {
  if (!config.space.empty()) return ParameterSpace(config.space);
  if (config.preset_name) {
    const Network net = build_network(config);
    return default_inference_space(net.size() >= 2 ? 1 : 0);
  }
  throw ValidationError(
      "explicit networks need [inference.<name>] sections before fitting");
}

}  // namespace hgf
