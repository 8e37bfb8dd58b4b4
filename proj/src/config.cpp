#include "tabrl/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace tabrl {
namespace {

struct Entry {
  std::string value;
  int line;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

class Parser {
 public:
  explicit Parser(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

  std::string where(const std::string& key, const Entry& e) const {
    return origin_ + ":" + std::to_string(e.line) + ": " + key;
  }

  double real(const std::string& key, const Entry& e) const {
    double v = 0.0;
    const auto& s = e.value;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError(where(key, e) + ": expected a number, got '" + s + "'");
    return v;
  }

  long long integer(const std::string& key, const Entry& e) const {
    long long v = 0;
    const auto& s = e.value;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError(where(key, e) + ": expected an integer, got '" + s + "'");
    return v;
  }

  long long positive(const std::string& key, const Entry& e) const {
    const long long v = integer(key, e);
    if (v < 1) throw ConfigError(where(key, e) + ": must be at least 1");
    return v;
  }

  bool boolean(const std::string& key, const Entry& e) const {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ConfigError(where(key, e) + ": expected true or false, got '" + e.value + "'");
  }

 private:
  std::string origin_;
};

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("run.seeds: at least one seed is required");
  if (agent.episodes < 1) throw ConfigError("run.episodes: must be at least 1");
  try {
    agent.validate();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(std::string_view text, std::string_view origin) {
  Parser p{std::string(origin)};
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) p.fail(line_no, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) p.fail(line_no, "missing key");
    if (value.empty()) p.fail(line_no, "missing value for '" + key + "'");
    if (const auto it = entries.find(key); it != entries.end())
      p.fail(line_no, "duplicate key '" + key + "' (first set on line " +
                          std::to_string(it->second.line) + ")");
    entries.emplace(key, Entry{value, line_no});
  }

  const auto env_it = entries.find("env.name");
  if (env_it == entries.end()) throw ConfigError(std::string(origin) + ": env.name is required");
  ExperimentConfig cfg;
  try {
    cfg.agent = AgentConfig::defaults_for(parse_env_kind(env_it->second.value));
  } catch (const InputError& e) {
    p.fail(env_it->second.line, e.what());
  }
  AgentConfig& a = cfg.agent;

  using Setter = std::function<void(const std::string&, const Entry&)>;
  const std::map<std::string, Setter> setters = {
      {"env.name", [](const std::string&, const Entry&) {}},
      {"env.cap", [&](auto& k, auto& e) { a.cap = static_cast<int>(p.positive(k, e)); }},
      {"run.episodes",
       [&](auto& k, auto& e) { a.episodes = static_cast<int>(p.integer(k, e)); }},
      {"run.seeds",
       [&](auto& k, auto& e) {
         cfg.seeds.clear();
         std::stringstream ss(e.value);
         std::string item;
         while (std::getline(ss, item, ',')) {
           const Entry one{trim(item), e.line};
           const long long s = p.integer(k, one);
           if (s < 0) throw ConfigError(p.where(k, e) + ": seeds must be non-negative");
           cfg.seeds.push_back(static_cast<std::uint64_t>(s));
         }
       }},
      {"run.record_timing", [&](auto& k, auto& e) { a.record_timing = p.boolean(k, e); }},
      {"context.budget",
       [&](auto& k, auto& e) { a.budget = static_cast<std::size_t>(p.positive(k, e)); }},
      {"context.operator",
       [&](auto& k, auto& e) {
         try {
           a.truncation = parse_operator(e.value);
         } catch (const InputError& err) {
           throw ConfigError(p.where(k, e) + ": " + err.what());
         }
       }},
      {"context.initial",
       [&](auto& k, auto& e) {
         a.initial_transitions = static_cast<std::size_t>(p.positive(k, e));
       }},
      {"gate.quantile", [&](auto& k, auto& e) { a.gate_quantile = p.real(k, e); }},
      {"fqi.iterations",
       [&](auto& k, auto& e) { a.fqi.iterations = static_cast<int>(p.positive(k, e)); }},
      {"fqi.gamma", [&](auto& k, auto& e) { a.fqi.gamma = p.real(k, e); }},
      {"epsilon.initial", [&](auto& k, auto& e) { a.epsilon.initial = p.real(k, e); }},
      {"epsilon.decay", [&](auto& k, auto& e) { a.epsilon.decay = p.real(k, e); }},
      {"epsilon.min", [&](auto& k, auto& e) { a.epsilon.floor = p.real(k, e); }},
      {"backend.kind",
       [&](auto& k, auto& e) {
         if (e.value == "knn")
           a.backend.kind = BackendKind::Knn;
         else if (e.value == "remote")
           a.backend.kind = BackendKind::Remote;
         else
           throw ConfigError(p.where(k, e) + ": expected knn or remote");
       }},
      {"backend.k",
       [&](auto& k, auto& e) { a.backend.k = static_cast<std::size_t>(p.positive(k, e)); }},
      {"backend.endpoint", [&](auto&, auto& e) { a.backend.endpoint = e.value; }},
      {"backend.embed_layer", [&](auto&, auto& e) { a.backend.embed_layer = e.value; }},
      {"backend.timeout", [&](auto& k, auto& e) { a.backend.timeout_seconds = p.real(k, e); }},
      {"output.dir", [&](auto&, auto& e) { cfg.output_dir = e.value; }},
  };

  for (const auto& [key, entry] : entries) {
    const auto it = setters.find(key);
    if (it == setters.end()) p.fail(entry.line, "unknown key '" + key + "'");
    it->second(key, entry);
  }

  if (const char* endpoint = std::getenv("BRIDGE_ENDPOINT"); endpoint && *endpoint)
    a.backend.endpoint = endpoint;

  // Range checks name the offending field.
  auto check = [&](const char* key, bool ok, const char* what) {
    if (ok) return;
    const auto it = entries.find(key);
    const std::string loc = it == entries.end()
                                ? std::string(origin) + ": " + key
                                : p.where(key, it->second);
    throw ConfigError(loc + ": " + what);
  };
  check("run.episodes", a.episodes >= 1, "must be at least 1");
  check("run.seeds", !cfg.seeds.empty(), "at least one seed is required");
  check("gate.quantile", a.gate_quantile >= 0.0 && a.gate_quantile <= 1.0, "must be in [0, 1]");
  check("fqi.gamma", a.fqi.gamma >= 0.0 && a.fqi.gamma < 1.0, "must be in [0, 1)");
  check("epsilon.initial", a.epsilon.initial >= 0.0 && a.epsilon.initial <= 1.0,
        "must be in [0, 1]");
  check("epsilon.decay", a.epsilon.decay > 0.0 && a.epsilon.decay <= 1.0, "must be in (0, 1]");
  check("epsilon.min", a.epsilon.floor >= 0.0 && a.epsilon.floor <= a.epsilon.initial,
        "must be in [0, epsilon.initial]");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string format_config(const ExperimentConfig& config) {
  const AgentConfig& a = config.agent;
  std::ostringstream out;
  out.precision(17);
  out << "env.name = " << env_name(a.env) << '\n' << "env.cap = " << a.cap << '\n';
  out << "run.seeds = ";
  for (std::size_t i = 0; i < config.seeds.size(); ++i) out << (i ? "," : "") << config.seeds[i];
  out << '\n'
      << "run.episodes = " << a.episodes << '\n'
      << "run.record_timing = " << (a.record_timing ? "true" : "false") << '\n'
      << "context.budget = " << a.budget << '\n'
      << "context.operator = " << operator_name(a.truncation) << '\n'
      << "context.initial = " << a.initial_transitions << '\n'
      << "gate.quantile = " << a.gate_quantile << '\n'
      << "fqi.iterations = " << a.fqi.iterations << '\n'
      << "fqi.gamma = " << a.fqi.gamma << '\n'
      << "epsilon.initial = " << a.epsilon.initial << '\n'
      << "epsilon.decay = " << a.epsilon.decay << '\n'
      << "epsilon.min = " << a.epsilon.floor << '\n'
      << "backend.kind = " << (a.backend.kind == BackendKind::Knn ? "knn" : "remote") << '\n'
      << "backend.k = " << a.backend.k << '\n'
      << "backend.endpoint = " << a.backend.endpoint << '\n'
      << "backend.embed_layer = " << a.backend.embed_layer << '\n'
      << "backend.timeout = " << a.backend.timeout_seconds << '\n'
      << "output.dir = " << config.output_dir.string() << '\n';
  return out.str();
}

}  // namespace tabrl
