#include "idslab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "idslab/measure_text.hpp"

namespace idslab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(trim(s.substr(pos)));
      return out;
    }
    out.push_back(trim(s.substr(pos, next - pos)));
    pos = next + 1;
  }
}

bool parse_number(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* b = t.data();
  const char* e = b + t.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e && std::isfinite(out);
}

bool parse_integer(const std::string& s, long long& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* b = t.data();
  const char* e = b + t.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

// name(arg-string) -> true with parts filled; bare names give empty args and
// called=false.
bool parse_call(const std::string& s, std::string& name, std::string& args, bool& called) {
  const std::string t = trim(s);
  std::size_t open = t.find('(');
  if (open == std::string::npos) {
    name = t;
    args.clear();
    called = false;
    return true;
  }
  if (t.empty() || t.back() != ')') return false;
  name = trim(t.substr(0, open));
  args = t.substr(open + 1, t.size() - open - 2);
  called = true;
  return true;
}

// Value lists: plain comma list, range(lo, hi, count) linear, or
// logrange(lo, hi, count) geometric including both endpoints.
bool parse_number_list(const std::string& s, std::vector<double>& out, std::string* err) {
  out.clear();
  std::string name, args;
  bool called = false;
  if (!parse_call(s, name, args, called)) {
    if (err) *err = "unbalanced parentheses";
    return false;
  }
  if (called && (name == "range" || name == "logrange")) {
    const auto parts = split(args, ',');
    double lo, hi;
    long long count;
    if (parts.size() != 3 || !parse_number(parts[0], lo) || !parse_number(parts[1], hi) ||
        !parse_integer(parts[2], count) || count < 1) {
      if (err) *err = name + " needs (lo, hi, count (integer >= 1))";
      return false;
    }
    if (count == 1) {
      out.push_back(lo);
      return true;
    }
    if (name == "logrange" && !(lo > 0.0 && hi > 0.0)) {
      if (err) *err = "logrange endpoints must be positive";
      return false;
    }
    for (long long i = 0; i < count; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(count - 1);
      out.push_back(name == "range" ? lo + t * (hi - lo) : lo * std::pow(hi / lo, t));
    }
    out.front() = lo;
    out.back() = hi;
    return true;
  }
  for (const auto& part : split(s, ',')) {
    double v;
    if (!parse_number(part, v)) {
      if (err) *err = "expected a number, got '" + part + "'";
      return false;
    }
    out.push_back(v);
  }
  return true;
}

std::string join_doubles(const std::vector<double>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

struct RawEntry {
  int line;
  std::string key;
  std::string value;
};

const char* const kSections[] = {"measures", "operator", "grids", "quadrature",
                                 "mc",       "output",   "checks"};

bool known_section(const std::string& s) {
  return std::find(std::begin(kSections), std::end(kSections), s) != std::end(kSections);
}

}  // namespace

std::string format_errors(const std::vector<ConfigError>& errors) {
  std::string out;
  for (const auto& e : errors) {
    out += "line " + std::to_string(e.line) + ": " + e.message + "\n";
  }
  return out;
}

std::optional<GridSpec> parse_grid_literal(const std::string& text, std::string* error) {
  std::string name, args;
  bool called = false;
  if (!parse_call(text, name, args, called) || !called || name != "grid") {
    if (error) *error = "expected grid(xmin, xmax, xcount; epsmin, epsmax, epscount; log|linear)";
    return std::nullopt;
  }
  const auto groups = split(args, ';');
  if (groups.size() != 3) {
    if (error) *error = "grid literal needs three ';'-separated groups";
    return std::nullopt;
  }
  const auto xs = split(groups[0], ',');
  const auto es = split(groups[1], ',');
  GridSpec g;
  long long xc, ec;
  if (xs.size() != 3 || !parse_number(xs[0], g.x_min) || !parse_number(xs[1], g.x_max) ||
      !parse_integer(xs[2], xc)) {
    if (error) *error = "grid x group must be xmin, xmax, xcount";
    return std::nullopt;
  }
  if (es.size() != 3 || !parse_number(es[0], g.eps_min) || !parse_number(es[1], g.eps_max) ||
      !parse_integer(es[2], ec)) {
    if (error) *error = "grid eps group must be epsmin, epsmax, epscount";
    return std::nullopt;
  }
  const std::string spacing = trim(groups[2]);
  if (spacing == "log") {
    g.log_eps = true;
  } else if (spacing == "linear") {
    g.log_eps = false;
  } else {
    if (error) *error = "grid spacing must be log or linear";
    return std::nullopt;
  }
  g.x_count = static_cast<int>(xc);
  g.eps_count = static_cast<int>(ec);
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    if (error) *error = e.what();
    return std::nullopt;
  }
  return g;
}

int resolve_site(const std::string& spec, const OperatorConfig& cfg) {
  const std::string s = trim(spec);
  int site;
  if (s.rfind("center", 0) == 0) {
    site = center_site(cfg);
    const std::string rest = trim(s.substr(6));
    if (!rest.empty()) {
      long long off;
      const bool signed_form = rest[0] == '+' || rest[0] == '-';
      // from_chars rejects a leading '+', so parse the magnitude and apply
      // the sign ourselves.
      if (!signed_form || !parse_integer(rest.substr(1), off) || off < 0)
        throw std::invalid_argument("site spec '" + s + "' is malformed");
      site += static_cast<int>(rest[0] == '-' ? -off : off);
    }
  } else {
    long long v;
    if (!parse_integer(s, v)) throw std::invalid_argument("site spec '" + s + "' is malformed");
    site = static_cast<int>(v);
  }
  if (site < 0 || site >= cfg.site_count())
    throw std::invalid_argument("site spec '" + s + "' is outside the box");
  return site;
}

namespace {

// Per-id allowed keys of a check line.
bool key_allowed(const std::string& id, const std::string& key) {
  if (id == "lemma21") return key == "sigma" || key == "grid";
  if (id == "lemma22") return key == "mu" || key == "alpha" || key == "grid";
  if (id == "lemma23") return key == "sigma" || key == "mu" || key == "alpha" || key == "grid";
  if (id == "thm11")
    return key == "mu" || key == "alpha" || key == "site" || key == "grid" || key == "mu_grid";
  if (id == "thm12-scaling")
    return key == "mu" || key == "alpha" || key == "c" || key == "op" || key == "grid";
  if (id == "thm12-weighted")
    return key == "mu" || key == "alpha" || key == "beta" || key == "a" || key == "d_mu" ||
           key == "grid";
  return false;
}

class Parser {
 public:
  Parser(const std::string& text, std::vector<ConfigError>& errors) : errors_(errors) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::string section;
    int section_line = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = trim(raw);
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      // Trailing comments: '#' preceded by whitespace. ';' stays literal,
      // it separates argument groups inside grid(...) and periodic(...).
      for (std::size_t i = 1; i < line.size(); ++i) {
        if (line[i] == '#' && std::isspace(static_cast<unsigned char>(line[i - 1]))) {
          line = trim(line.substr(0, i));
          break;
        }
      }
      if (line.front() == '[') {
        if (line.back() != ']') {
          fail(line_no, "unterminated section header");
          continue;
        }
        section = trim(line.substr(1, line.size() - 2));
        section_line = line_no;
        if (!known_section(section)) {
          fail(line_no, "unknown section [" + section + "]");
          section.clear();
        } else if (section == "operator") {
          op_line_ = section_line;
        }
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        fail(line_no, "expected key = value");
        continue;
      }
      if (section.empty()) {
        fail(line_no, "key outside any section");
        continue;
      }
      entries_[section].push_back({line_no, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
    }
  }

  ExperimentConfig run() {
    ExperimentConfig cfg;
    parse_measures(cfg);
    parse_grids(cfg);
    parse_operator(cfg);
    parse_quadrature(cfg);
    parse_mc(cfg);
    parse_output(cfg);
    parse_checks(cfg);
    return cfg;
  }

 private:
  void fail(int line, const std::string& msg) { errors_.push_back({line, msg}); }

  // Rejects duplicate keys in one section (first occurrence wins).
  std::vector<RawEntry> unique_entries(const std::string& section) {
    std::vector<RawEntry> out;
    for (const auto& e : entries_[section]) {
      const bool dup = std::any_of(out.begin(), out.end(),
                                   [&](const RawEntry& p) { return p.key == e.key; });
      if (dup) {
        fail(e.line, "duplicate key '" + e.key + "' in [" + section + "]");
        continue;
      }
      out.push_back(e);
    }
    return out;
  }

  void parse_measures(ExperimentConfig& cfg) {
    for (const auto& e : unique_entries("measures")) {
      if (!is_identifier(e.key)) {
        fail(e.line, "measure name '" + e.key + "' is not an identifier");
        continue;
      }
      MeasureParseError perr;
      auto m = parse_measure(e.value, &perr);
      if (!m) {
        fail(e.line, "measure '" + e.key + "': " + perr.message);
        continue;
      }
      cfg.measures.emplace_back(e.key, std::move(*m));
    }
    std::sort(cfg.measures.begin(), cfg.measures.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  void parse_grids(ExperimentConfig& cfg) {
    for (const auto& e : unique_entries("grids")) {
      if (!is_identifier(e.key)) {
        fail(e.line, "grid name '" + e.key + "' is not an identifier");
        continue;
      }
      std::string err;
      auto g = parse_grid_literal(e.value, &err);
      if (!g) {
        fail(e.line, "grid '" + e.key + "': " + err);
        continue;
      }
      cfg.grids.emplace_back(e.key, *g);
    }
    std::sort(cfg.grids.begin(), cfg.grids.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  void parse_operator(ExperimentConfig& cfg) {
    if (entries_.find("operator") == entries_.end()) return;
    OperatorConfig op;
    for (const auto& e : unique_entries("operator")) {
      if (e.key == "dimension" || e.key == "side") {
        long long v;
        if (!parse_integer(e.value, v)) {
          fail(e.line, e.key + " must be an integer");
          continue;
        }
        (e.key == "dimension" ? op.dimension : op.side) = static_cast<int>(v);
      } else if (e.key == "coupling") {
        double v;
        if (!parse_number(e.value, v)) {
          fail(e.line, "coupling must be a number");
          continue;
        }
        op.coupling = v;
      } else if (e.key == "background") {
        parse_background(e, op);
      } else if (e.key == "modulation") {
        parse_modulation(e, op);
      } else if (e.key == "single_site") {
        if (is_identifier(e.value)) {
          const Measure* m = cfg.find_measure(e.value);
          if (!m) {
            fail(e.line, "single_site references unknown measure '" + e.value + "'");
            continue;
          }
          op.single_site = *m;
        } else {
          MeasureParseError perr;
          auto m = parse_measure(e.value, &perr);
          if (!m) {
            fail(e.line, "single_site: " + perr.message);
            continue;
          }
          op.single_site = std::move(*m);
        }
      } else {
        fail(e.line, "unknown key '" + e.key + "' in [operator]");
      }
    }
    try {
      op.validate();
    } catch (const std::invalid_argument& ex) {
      fail(op_line_, ex.what());
      return;
    }
    cfg.op = std::move(op);
  }

  void parse_background(const RawEntry& e, OperatorConfig& op) {
    std::string name, args;
    bool called = false;
    if (!parse_call(e.value, name, args, called)) {
      fail(e.line, "background: unbalanced parentheses");
      return;
    }
    if (name == "none" && !called) {
      op.background = std::monostate{};
    } else if (name == "quasiperiodic" && called) {
      const auto parts = split(args, ',');
      QuasiPeriodicBackground q;
      if (parts.size() != 3 || !parse_number(parts[0], q.amplitude) ||
          !parse_number(parts[1], q.frequency) || !parse_number(parts[2], q.phase)) {
        fail(e.line, "quasiperiodic needs (amplitude, frequency, phase)");
        return;
      }
      op.background = q;
    } else if (name == "periodic" && called) {
      const auto groups = split(args, ';');
      if (groups.size() != 2) {
        fail(e.line, "periodic needs (period...; values...)");
        return;
      }
      PeriodicBackground p;
      for (const auto& part : split(groups[0], ',')) {
        long long v;
        if (!parse_integer(part, v)) {
          fail(e.line, "periodic: period entries must be integers");
          return;
        }
        p.period.push_back(static_cast<int>(v));
      }
      std::string err;
      if (!parse_number_list(groups[1], p.values, &err)) {
        fail(e.line, "periodic values: " + err);
        return;
      }
      op.background = std::move(p);
    } else {
      fail(e.line, "background must be none, periodic(...; ...) or quasiperiodic(...)");
    }
  }

  void parse_modulation(const RawEntry& e, OperatorConfig& op) {
    std::string name, args;
    bool called = false;
    if (!parse_call(e.value, name, args, called)) {
      fail(e.line, "modulation: unbalanced parentheses");
      return;
    }
    ModulationSpec m;
    if (name == "stationary" && !called) {
      m.kind = ModulationSpec::Kind::Stationary;
    } else if ((name == "decaying" || name == "growing") && called) {
      m.kind = name == "decaying" ? ModulationSpec::Kind::Decaying : ModulationSpec::Kind::Growing;
      if (!parse_number(args, m.delta)) {
        fail(e.line, name + " needs a numeric delta");
        return;
      }
    } else if (name == "table" && called) {
      m.kind = ModulationSpec::Kind::Table;
      std::string err;
      if (!parse_number_list(args, m.table, &err)) {
        fail(e.line, "modulation table: " + err);
        return;
      }
      for (double v : m.table) {
        if (v == 0.0) {
          fail(e.line, "modulation table contains 0 (every a_n must be nonzero)");
          return;
        }
      }
    } else {
      fail(e.line, "modulation must be stationary, decaying(d), growing(d) or table(...)");
      return;
    }
    op.modulation = std::move(m);
  }

  void parse_quadrature(ExperimentConfig& cfg) {
    for (const auto& e : unique_entries("quadrature")) {
      if (e.key == "rule") {
        if (e.value == "gauss-legendre") {
          cfg.quadrature.rule = QuadratureSpec::Rule::GaussLegendre;
        } else if (e.value == "trapezoid") {
          cfg.quadrature.rule = QuadratureSpec::Rule::Trapezoid;
        } else if (e.value == "atomic-exact") {
          cfg.quadrature.rule = QuadratureSpec::Rule::AtomicExact;
        } else {
          fail(e.line, "rule must be gauss-legendre, trapezoid or atomic-exact");
        }
      } else if (e.key == "nodes") {
        long long v;
        if (!parse_integer(e.value, v) || v < 1) {
          fail(e.line, "nodes must be an integer >= 1");
          continue;
        }
        cfg.quadrature.nodes = static_cast<int>(v);
      } else if (e.key == "truncation") {
        if (e.value == "none") {
          cfg.quadrature.truncation.reset();
          continue;
        }
        std::string inner = trim(e.value);
        if (inner.size() < 2 || inner.front() != '(' || inner.back() != ')') {
          fail(e.line, "truncation must be none or (lo, hi)");
          continue;
        }
        const auto parts = split(inner.substr(1, inner.size() - 2), ',');
        double lo, hi;
        if (parts.size() != 2 || !parse_number(parts[0], lo) || !parse_number(parts[1], hi) ||
            !(lo < hi)) {
          fail(e.line, "truncation must be (lo, hi) with lo < hi");
          continue;
        }
        cfg.quadrature.truncation = {lo, hi};
      } else {
        fail(e.line, "unknown key '" + e.key + "' in [quadrature]");
      }
    }
  }

  void parse_mc(ExperimentConfig& cfg) {
    if (entries_.find("mc") == entries_.end()) return;
    int mc_line = 0;
    for (const auto& e : unique_entries("mc")) {
      mc_line = mc_line ? mc_line : e.line;
      if (e.key == "realizations") {
        long long v;
        if (!parse_integer(e.value, v) || v < 1) {
          fail(e.line, "realizations must be an integer >= 1");
          continue;
        }
        cfg.mc.realizations = static_cast<int>(v);
      } else if (e.key == "seed") {
        long long v;
        if (!parse_integer(e.value, v) || v < 0) {
          fail(e.line, "seed must be a nonnegative integer");
          continue;
        }
        cfg.mc.seed = static_cast<std::uint64_t>(v);
        cfg.mc.seed_set = true;
      } else if (e.key == "energies" || e.key == "scales") {
        std::string err;
        auto& dst = e.key == "energies" ? cfg.mc.energies : cfg.mc.scales;
        if (!parse_number_list(e.value, dst, &err)) fail(e.line, e.key + ": " + err);
      } else if (e.key == "sites") {
        cfg.mc.sites = split(e.value, ',');
      } else if (e.key == "alpha") {
        double v;
        if (!parse_number(e.value, v) || !(v > 0.0 && v <= 1.0)) {
          fail(e.line, "alpha outside (0,1]");
          continue;
        }
        cfg.mc.alpha = v;
      } else {
        fail(e.line, "unknown key '" + e.key + "' in [mc]");
      }
    }
    if (cfg.mc.realizations == 0) fail(mc_line, "[mc] requires realizations");
    if (!cfg.mc.seed_set) fail(mc_line, "[mc] requires an explicit seed");
    if (cfg.mc.energies.empty()) fail(mc_line, "[mc] requires energies");
    if (cfg.mc.scales.empty()) fail(mc_line, "[mc] requires scales");
    for (double a : cfg.mc.scales)
      if (!(a > 0.0)) fail(mc_line, "[mc] scales must be positive");
    if (cfg.mc.sites.empty()) fail(mc_line, "[mc] requires sites");
    if (!cfg.op) {
      fail(mc_line, "[mc] requires an [operator] section");
    } else {
      for (const auto& s : cfg.mc.sites) {
        try {
          resolve_site(s, *cfg.op);
        } catch (const std::invalid_argument& ex) {
          fail(mc_line, ex.what());
        }
      }
    }
  }

  void parse_output(ExperimentConfig& cfg) {
    for (const auto& e : unique_entries("output")) {
      if (e.key == "directory") {
        if (e.value.empty()) {
          fail(e.line, "directory must be nonempty");
          continue;
        }
        cfg.output.directory = e.value;
      } else if (e.key == "formats") {
        cfg.output.csv = cfg.output.json = cfg.output.svg = false;
        bool any = false;
        for (const auto& f : split(e.value, ',')) {
          if (f == "csv") {
            cfg.output.csv = true;
          } else if (f == "json") {
            cfg.output.json = true;
          } else if (f == "svg") {
            cfg.output.svg = true;
          } else {
            fail(e.line, "unknown format '" + f + "' (expected csv, json, svg)");
            continue;
          }
          any = true;
        }
        if (!any) fail(e.line, "formats must list at least one of csv, json, svg");
      } else {
        fail(e.line, "unknown key '" + e.key + "' in [output]");
      }
    }
  }

  void check_grid_ref(const ExperimentConfig& cfg, const std::string& value, int line) {
    if (value.empty() || value == "auto") return;
    if (is_identifier(value)) {
      if (!cfg.find_grid(value)) fail(line, "unknown grid '" + value + "'");
      return;
    }
    std::string err;
    if (!parse_grid_literal(value, &err)) fail(line, "grid literal: " + err);
  }

  void check_measure_ref(const ExperimentConfig& cfg, const std::string& value, int line,
                         const std::string& key) {
    if (value.empty()) {
      fail(line, "check requires " + key + "=<measure>");
      return;
    }
    if (!cfg.find_measure(value)) fail(line, key + " references unknown measure '" + value + "'");
  }

  void parse_checks(ExperimentConfig& cfg) {
    for (const auto& e : entries_["checks"]) {
      if (e.key != "check") {
        fail(e.line, "only 'check = ...' lines are allowed in [checks]");
        continue;
      }
      std::istringstream in(e.value);
      std::string token;
      if (!(in >> token)) {
        fail(e.line, "empty check line");
        continue;
      }
      CheckSpec spec;
      spec.id = token;
      spec.line = e.line;
      static const char* const ids[] = {"lemma21", "lemma22",       "lemma23",
                                        "thm11",   "thm12-scaling", "thm12-weighted"};
      if (std::find(std::begin(ids), std::end(ids), spec.id) == std::end(ids)) {
        fail(e.line, "unknown check id '" + spec.id + "'");
        continue;
      }
      bool ok = true;
      bool alpha_given = false;
      while (in >> token) {
        const std::size_t eq = token.find('=');
        if (eq == std::string::npos) {
          fail(e.line, "check parameter '" + token + "' is not key=value");
          ok = false;
          break;
        }
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (!key_allowed(spec.id, key)) {
          fail(e.line, "check " + spec.id + " does not take '" + key + "'");
          ok = false;
          break;
        }
        std::string err;
        if (key == "sigma") {
          spec.sigma = value;
        } else if (key == "mu") {
          spec.mu = value;
        } else if (key == "alpha") {
          if (!parse_number_list(value, spec.alphas, &err) || spec.alphas.empty()) {
            fail(e.line, "alpha: " + err);
            ok = false;
            break;
          }
          alpha_given = true;
        } else if (key == "c") {
          if (!parse_number_list(value, spec.factors, &err) || spec.factors.empty()) {
            fail(e.line, "c: " + err);
            ok = false;
            break;
          }
        } else if (key == "op") {
          if (value == "scale") {
            spec.translate = false;
          } else if (value == "translate") {
            spec.translate = true;
          } else {
            fail(e.line, "op must be scale or translate");
            ok = false;
            break;
          }
        } else if (key == "site") {
          spec.site = value;
        } else if (key == "grid") {
          spec.grid = value == "auto" ? "" : value;
        } else if (key == "mu_grid") {
          spec.mu_grid = value == "auto" ? "" : value;
        } else if (key == "beta") {
          if (!parse_number_list(value, spec.betas, &err)) {
            fail(e.line, "beta: " + err);
            ok = false;
            break;
          }
        } else if (key == "a") {
          if (!parse_number_list(value, spec.modulations, &err)) {
            fail(e.line, "a: " + err);
            ok = false;
            break;
          }
        } else if (key == "d_mu") {
          double v;
          if (!parse_number(value, v) || !(v > 0.0)) {
            fail(e.line, "d_mu must be a positive number");
            ok = false;
            break;
          }
          spec.d_mu = v;
        }
      }
      if (!ok) continue;

      for (double a : spec.alphas) {
        if (!(a > 0.0 && a <= 1.0)) {
          fail(e.line, "alpha outside (0,1]");
          ok = false;
        }
      }
      check_grid_ref(cfg, spec.grid, e.line);
      if (spec.id == "thm11") check_grid_ref(cfg, spec.mu_grid, e.line);

      if (spec.id == "lemma21" || spec.id == "lemma23")
        check_measure_ref(cfg, spec.sigma, e.line, "sigma");
      if (spec.id == "lemma22" || spec.id == "lemma23" || spec.id == "thm11" ||
          spec.id == "thm12-scaling")
        check_measure_ref(cfg, spec.mu, e.line, "mu");
      if (spec.id == "thm12-weighted" && !spec.mu.empty())
        check_measure_ref(cfg, spec.mu, e.line, "mu");

      if (spec.id == "thm11") {
        if (!cfg.op) {
          fail(e.line, "thm11 requires an [operator] section");
        } else {
          try {
            resolve_site(spec.site, *cfg.op);
          } catch (const std::invalid_argument& ex) {
            fail(e.line, ex.what());
          }
          if (cfg.op->coupling == 0.0) fail(e.line, "thm11 requires nonzero coupling");
        }
      }
      if (spec.id == "thm12-scaling" && !spec.translate) {
        for (double c : spec.factors)
          if (c == 0.0) fail(e.line, "scaling factor c must be nonzero");
      }
      if (spec.id == "thm12-weighted") {
        if (spec.betas.empty() || spec.betas.size() != spec.modulations.size()) {
          fail(e.line, "thm12-weighted needs matching nonempty beta= and a= lists");
        } else {
          double sum = 0.0;
          for (double b : spec.betas) {
            if (!(b > 0.0)) fail(e.line, "beta entries must be positive");
            sum += b;
          }
          if (std::abs(sum - 1.0) > 1e-9) fail(e.line, "beta entries must sum to 1");
          for (double a : spec.modulations)
            if (a == 0.0) fail(e.line, "modulation entries must be nonzero (a_n != 0)");
          if (cfg.mc.realizations == 0) {
            fail(e.line, "thm12-weighted combines the [mc] per-site tables; add an [mc] section");
          } else if (spec.betas.size() != cfg.mc.sites.size()) {
            fail(e.line, "thm12-weighted needs one (beta, a) pair per [mc] site");
          }
          if (alpha_given && spec.alphas.size() != 1)
            fail(e.line, "thm12-weighted takes a single alpha");
        }
        if (spec.mu.empty() && !spec.d_mu && cfg.op == std::nullopt)
          fail(e.line, "thm12-weighted needs mu=, d_mu=, or an [operator] single_site");
      }
      cfg.checks.push_back(std::move(spec));
    }
  }

  std::map<std::string, std::vector<RawEntry>> entries_;
  std::vector<ConfigError>& errors_;
  int op_line_ = 0;
};

std::string grid_literal_text(const GridSpec& g, bool spaces) {
  const std::string s = spaces ? " " : "";
  return "grid(" + format_double(g.x_min) + "," + s + format_double(g.x_max) + "," + s +
         std::to_string(g.x_count) + ";" + s + format_double(g.eps_min) + "," + s +
         format_double(g.eps_max) + "," + s + std::to_string(g.eps_count) + ";" + s +
         (g.log_eps ? "log" : "linear") + ")";
}

std::string background_text(const BackgroundSpec& b) {
  if (std::holds_alternative<std::monostate>(b)) return "none";
  if (const auto* p = std::get_if<PeriodicBackground>(&b)) {
    std::string out = "periodic(";
    for (std::size_t i = 0; i < p->period.size(); ++i)
      out += (i ? ", " : "") + std::to_string(p->period[i]);
    return out + "; " + join_doubles(p->values, ", ") + ")";
  }
  const auto& q = std::get<QuasiPeriodicBackground>(b);
  return "quasiperiodic(" + format_double(q.amplitude) + ", " + format_double(q.frequency) + ", " +
         format_double(q.phase) + ")";
}

std::string modulation_text(const ModulationSpec& m) {
  switch (m.kind) {
    case ModulationSpec::Kind::Stationary:
      return "stationary";
    case ModulationSpec::Kind::Decaying:
      return "decaying(" + format_double(m.delta) + ")";
    case ModulationSpec::Kind::Growing:
      return "growing(" + format_double(m.delta) + ")";
    case ModulationSpec::Kind::Table:
      return "table(" + join_doubles(m.table, ", ") + ")";
  }
  return "stationary";
}

std::string check_line_text(const CheckSpec& c) {
  std::string out = "check = " + c.id;
  const auto add = [&out](const std::string& key, const std::string& value) {
    if (!value.empty()) out += " " + key + "=" + value;
  };
  add("sigma", c.sigma);
  add("mu", c.mu);
  if (c.id == "lemma22" || c.id == "lemma23" || c.id == "thm11" || c.id == "thm12-scaling" ||
      c.id == "thm12-weighted")
    add("alpha", join_doubles(c.alphas, ","));
  if (c.id == "thm12-scaling") {
    add("c", join_doubles(c.factors, ","));
    add("op", c.translate ? "translate" : "scale");
  }
  if (c.id == "thm11" && c.site != "center") add("site", c.site);
  add("grid", c.grid);
  if (c.id == "thm11") add("mu_grid", c.mu_grid);
  if (c.id == "thm12-weighted") {
    add("beta", join_doubles(c.betas, ","));
    add("a", join_doubles(c.modulations, ","));
    if (c.d_mu) add("d_mu", format_double(*c.d_mu));
  }
  return out;
}

}  // namespace

const Measure* ExperimentConfig::find_measure(const std::string& name) const {
  for (const auto& [n, m] : measures)
    if (n == name) return &m;
  return nullptr;
}

const GridSpec* ExperimentConfig::find_grid(const std::string& name) const {
  for (const auto& [n, g] : grids)
    if (n == name) return &g;
  return nullptr;
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  if (!measures.empty()) {
    out += "[measures]\n";
    for (const auto& [name, m] : measures) out += name + " = " + format_measure(m) + "\n";
    out += "\n";
  }
  if (op) {
    out += "[operator]\n";
    out += "dimension = " + std::to_string(op->dimension) + "\n";
    out += "side = " + std::to_string(op->side) + "\n";
    out += "background = " + background_text(op->background) + "\n";
    out += "modulation = " + modulation_text(op->modulation) + "\n";
    out += "single_site = " + format_measure(op->single_site) + "\n";
    out += "coupling = " + format_double(op->coupling) + "\n\n";
  }
  if (!grids.empty()) {
    out += "[grids]\n";
    for (const auto& [name, g] : grids) out += name + " = " + grid_literal_text(g, true) + "\n";
    out += "\n";
  }
  out += "[quadrature]\n";
  out += std::string("rule = ") +
         (quadrature.rule == QuadratureSpec::Rule::GaussLegendre
              ? "gauss-legendre"
              : quadrature.rule == QuadratureSpec::Rule::Trapezoid ? "trapezoid" : "atomic-exact") +
         "\n";
  out += "nodes = " + std::to_string(quadrature.nodes) + "\n";
  out += "truncation = " +
         (quadrature.truncation ? "(" + format_double(quadrature.truncation->first) + ", " +
                                      format_double(quadrature.truncation->second) + ")"
                                : std::string("none")) +
         "\n\n";
  if (mc.realizations > 0) {
    out += "[mc]\n";
    out += "realizations = " + std::to_string(mc.realizations) + "\n";
    out += "seed = " + std::to_string(mc.seed) + "\n";
    out += "energies = " + join_doubles(mc.energies, ", ") + "\n";
    out += "scales = " + join_doubles(mc.scales, ", ") + "\n";
    out += "sites = ";
    for (std::size_t i = 0; i < mc.sites.size(); ++i) out += (i ? ", " : "") + mc.sites[i];
    out += "\n";
    out += "alpha = " + format_double(mc.alpha) + "\n\n";
  }
  out += "[output]\n";
  out += "directory = " + output.directory + "\n";
  out += "formats = ";
  std::string fmts;
  if (output.csv) fmts += "csv";
  if (output.json) fmts += std::string(fmts.empty() ? "" : ", ") + "json";
  if (output.svg) fmts += std::string(fmts.empty() ? "" : ", ") + "svg";
  out += fmts + "\n";
  if (!checks.empty()) {
    out += "\n[checks]\n";
    for (const auto& c : checks) out += check_line_text(c) + "\n";
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text, std::vector<ConfigError>& errors) {
  Parser p(text, errors);
  return p.run();
}

ExperimentConfig load_config(const std::string& path, std::vector<ConfigError>& errors) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    errors.push_back({0, "cannot open config file '" + path + "'"});
    return {};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), errors);
}

}  // namespace idslab
