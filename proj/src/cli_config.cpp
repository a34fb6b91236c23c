#include "entmix/cli_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "entmix/numerics.hpp"

namespace entmix {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& src, int line, const std::string& msg) {
  throw ConfigError(src + ":" + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_num(const std::string& src, int line, const std::string& value);

template <>
double parse_num<double>(const std::string& src, int line, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) fail(src, line, "trailing characters in number '" + value + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(src, line, "expected a number, got '" + value + "'");
  }
}

template <>
long parse_num<long>(const std::string& src, int line, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) fail(src, line, "trailing characters in integer '" + value + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(src, line, "expected an integer, got '" + value + "'");
  }
}

template <>
int parse_num<int>(const std::string& src, int line, const std::string& value) {
  return static_cast<int>(parse_num<long>(src, line, value));
}

template <>
std::uint64_t parse_num<std::uint64_t>(const std::string& src, int line, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) fail(src, line, "trailing characters in integer '" + value + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(src, line, "expected an unsigned integer, got '" + value + "'");
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& src, int line, const std::string& value) {
  std::vector<T> out;
  std::string item;
  std::stringstream ss(value);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(src, line, "empty list element");
    out.push_back(parse_num<T>(src, line, item));
  }
  if (out.empty()) fail(src, line, "empty list");
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& src) {
  ExperimentConfig cfg;
  cfg.degrees.clear();
  bool degrees_set = false;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(src, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"experiment", "ensemble", "grid",    "starts",
                                    "reference",  "concentrate", "forward", "mix", "beta"};
      if (std::find_if(std::begin(known), std::end(known),
                       [&](const char* k) { return section == k; }) == std::end(known))
        fail(src, lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(src, lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail(src, lineno, "expected 'key = value'");

    auto unknown_key = [&]() { fail(src, lineno, "unknown key '" + key + "' in [" + section + "]"); };

    if (section == "experiment") {
      if (key == "seed") cfg.seed = parse_num<std::uint64_t>(src, lineno, value);
      else if (key == "n") cfg.n = parse_num<int>(src, lineno, value);
      else if (key == "trials") cfg.trials = parse_num<long>(src, lineno, value);
      else if (key == "eps") cfg.eps = parse_num<double>(src, lineno, value);
      else if (key == "output") cfg.output = value;
      else if (key == "matrix_out") cfg.matrix_out = value;
      else unknown_key();
    } else if (section == "ensemble") {
      if (key == "kind") {
        if (value == "out_degrees") cfg.kind = EnsembleSpec::Kind::out_degrees;
        else if (value == "pareto") cfg.kind = EnsembleSpec::Kind::pareto;
        else if (value == "profile_file") cfg.kind = EnsembleSpec::Kind::profile_file;
        else fail(src, lineno, "kind must be out_degrees | pareto | profile_file");
      } else if (key == "degrees") {
        cfg.degrees = parse_list<int>(src, lineno, value);
        degrees_set = true;
      } else if (key == "alpha") cfg.alpha = parse_num<double>(src, lineno, value);
      else if (key == "profile_path") cfg.profile_path = value;
      else unknown_key();
    } else if (section == "grid") {
      if (key == "lambdas") cfg.lambdas = parse_list<double>(src, lineno, value);
      else if (key == "ts") cfg.ts = parse_list<long>(src, lineno, value);
      else unknown_key();
    } else if (section == "starts") {
      if (key == "policy") {
        if (value == "all") cfg.start_policy = StartPolicy::Kind::all;
        else if (value == "sample") cfg.start_policy = StartPolicy::Kind::sample;
        else fail(src, lineno, "policy must be all | sample");
      } else if (key == "sample_size") cfg.sample_size = parse_num<int>(src, lineno, value);
      else unknown_key();
    } else if (section == "reference") {
      if (key == "kind") {
        if (value == "pi_hat") cfg.ref_stationary = false;
        else if (value == "stationary") cfg.ref_stationary = true;
        else fail(src, lineno, "kind must be pi_hat | stationary");
      } else if (key == "tol") cfg.ref_tol = parse_num<double>(src, lineno, value);
      else if (key == "max_iter") cfg.ref_max_iter = parse_num<long>(src, lineno, value);
      else unknown_key();
    } else if (section == "concentrate") {
      if (key == "t") cfg.conc_t = parse_num<int>(src, lineno, value);
      else if (key == "starts") cfg.conc_starts = parse_num<int>(src, lineno, value);
      else unknown_key();
    } else if (section == "forward") {
      if (key == "roots") {
        cfg.fw_roots = parse_list<int>(src, lineno, value);
        for (int& r : cfg.fw_roots) {
          if (r < 1) fail(src, lineno, "roots are 1-based");
          --r;
        }
      } else if (key == "n_roots") cfg.fw_n_roots = parse_num<int>(src, lineno, value);
      else if (key == "s") cfg.fw_s = parse_num<int>(src, lineno, value);
      else if (key == "h") cfg.fw_h = parse_num<int>(src, lineno, value);
      else if (key == "eps") cfg.fw_eps = parse_num<double>(src, lineno, value);
      else if (key == "edges_out") cfg.fw_edges_out = value;
      else unknown_key();
    } else if (section == "mix") {
      if (key == "eps") cfg.mix_eps = parse_num<double>(src, lineno, value);
      else if (key == "horizon") cfg.mix_horizon = parse_num<long>(src, lineno, value);
      else unknown_key();
    } else if (section == "beta") {
      if (key == "samples") cfg.beta_samples = parse_num<long>(src, lineno, value);
      else unknown_key();
    } else {
      fail(src, lineno, "key outside of any section");
    }
  }
  if (!degrees_set) cfg.degrees = {3};
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return parse_config(in, path);
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("config: n must be >= 1");
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  if (!(eps > 0.0)) throw ConfigError("config: eps must be positive");
  if (kind == EnsembleSpec::Kind::pareto && !(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("config: alpha must lie in (0,1)");
  if (kind == EnsembleSpec::Kind::profile_file && profile_path.empty())
    throw ConfigError("config: profile_path required for kind = profile_file");
  for (long t : ts)
    if (t < 0) throw ConfigError("config: grid times must be >= 0");
  for (double l : lambdas)
    if (l < 0.0) throw ConfigError("config: lambdas must be >= 0");
  if (sample_size < 1) throw ConfigError("config: sample_size must be >= 1");
  if (conc_starts < 1) throw ConfigError("config: concentrate starts must be >= 1");
  if (fw_n_roots < 1) throw ConfigError("config: n_roots must be >= 1");
  for (int r : fw_roots)
    if (r < 0 || r >= n) throw ConfigError("config: forward root out of range");
  if (!(fw_eps > 0.0)) throw ConfigError("config: forward eps must be positive");
  if (mix_horizon < 1) throw ConfigError("config: mix horizon must be >= 1");
  if (beta_samples < 1) throw ConfigError("config: beta samples must be >= 1");
  ensemble_spec().validate();
}

EnsembleSpec ExperimentConfig::ensemble_spec() const {
  EnsembleSpec spec;
  spec.kind = kind;
  spec.n = n;
  spec.seed = seed;
  spec.alpha = alpha;
  spec.profile_path = profile_path;
  if (kind == EnsembleSpec::Kind::out_degrees) {
    if (degrees.empty()) throw ConfigError("config: degrees required for kind = out_degrees");
    spec.out_degrees.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      spec.out_degrees[static_cast<std::size_t>(i)] = degrees[static_cast<std::size_t>(i) % degrees.size()];
  }
  return spec;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  char buf[128];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "[experiment]\n";
  out << "seed = " << cfg.seed << "\n";
  out << "n = " << cfg.n << "\n";
  out << "trials = " << cfg.trials << "\n";
  out << "eps = " << num(cfg.eps) << "\n";
  if (!cfg.output.empty()) out << "output = " << cfg.output << "\n";
  if (!cfg.matrix_out.empty()) out << "matrix_out = " << cfg.matrix_out << "\n";
  out << "\n[ensemble]\n";
  out << "kind = "
      << (cfg.kind == EnsembleSpec::Kind::out_degrees
              ? "out_degrees"
              : cfg.kind == EnsembleSpec::Kind::pareto ? "pareto" : "profile_file")
      << "\n";
  out << "degrees = ";
  for (std::size_t i = 0; i < cfg.degrees.size(); ++i) out << (i ? "," : "") << cfg.degrees[i];
  out << "\n";
  out << "alpha = " << num(cfg.alpha) << "\n";
  if (!cfg.profile_path.empty()) out << "profile_path = " << cfg.profile_path << "\n";
  out << "\n[grid]\n";
  if (!cfg.lambdas.empty()) {
    out << "lambdas = ";
    for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) out << (i ? "," : "") << num(cfg.lambdas[i]);
    out << "\n";
  }
  if (!cfg.ts.empty()) {
    out << "ts = ";
    for (std::size_t i = 0; i < cfg.ts.size(); ++i) out << (i ? "," : "") << cfg.ts[i];
    out << "\n";
  }
  out << "\n[starts]\n";
  out << "policy = " << (cfg.start_policy == StartPolicy::Kind::all ? "all" : "sample") << "\n";
  out << "sample_size = " << cfg.sample_size << "\n";
  out << "\n[reference]\n";
  out << "kind = " << (cfg.ref_stationary ? "stationary" : "pi_hat") << "\n";
  out << "tol = " << num(cfg.ref_tol) << "\n";
  out << "max_iter = " << cfg.ref_max_iter << "\n";
  out << "\n[concentrate]\n";
  out << "t = " << cfg.conc_t << "\n";
  out << "starts = " << cfg.conc_starts << "\n";
  out << "\n[forward]\n";
  if (!cfg.fw_roots.empty()) {
    out << "roots = ";
    for (std::size_t i = 0; i < cfg.fw_roots.size(); ++i) out << (i ? "," : "") << cfg.fw_roots[i] + 1;
    out << "\n";
  }
  out << "n_roots = " << cfg.fw_n_roots << "\n";
  out << "s = " << cfg.fw_s << "\n";
  out << "h = " << cfg.fw_h << "\n";
  out << "eps = " << num(cfg.fw_eps) << "\n";
  if (!cfg.fw_edges_out.empty()) out << "edges_out = " << cfg.fw_edges_out << "\n";
  out << "\n[mix]\n";
  out << "eps = " << num(cfg.mix_eps) << "\n";
  out << "horizon = " << cfg.mix_horizon << "\n";
  out << "\n[beta]\n";
  out << "samples = " << cfg.beta_samples << "\n";
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = serialize_config(cfg);
  return fnv1a(text.data(), text.size());
}

}  // namespace entmix
