#include "idslab/measure_text.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <vector>

namespace idslab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string format_rec(const Measure& m) {
  return std::visit(
      [&](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        std::string out;
        if constexpr (std::is_same_v<T, AtomicSpec>) {
          out = "atomic(";
          for (std::size_t i = 0; i < s.atoms.size(); ++i) {
            if (i) out += ",";
            out += "(" + format_double(s.atoms[i].position) + "," + format_double(s.atoms[i].weight) + ")";
          }
          out += ")";
        } else if constexpr (std::is_same_v<T, DensitySpec>) {
          out = "density(";
          for (std::size_t i = 0; i < s.pieces.size(); ++i) {
            const auto& p = s.pieces[i];
            if (i) out += ",";
            out += "(" + format_double(p.left) + "," + format_double(p.right) + "," +
                   format_double(p.value_left) + "," + format_double(p.value_right) + ")";
          }
          out += ")";
        } else if constexpr (std::is_same_v<T, IfsCantorSpec>) {
          out = "cantor(" + format_double(s.left) + "," + format_double(s.right) + "," +
                format_double(s.ratio) + "," + std::to_string(s.depth) + ")";
        } else {
          out = "mix(";
          for (std::size_t i = 0; i < s.parts.size(); ++i) {
            if (i) out += ",";
            out += "(" + format_double(s.parts[i].weight) + "," + format_rec(*s.parts[i].component) + ")";
          }
          out += ")";
        }
        return out;
      },
      m.spec());
}

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' || text[pos] == '\r'))
      ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) { throw MeasureParseError{pos, msg}; }

  void expect(char c) {
    skip_ws();
    if (pos >= text.size() || text[pos] != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }

  bool peek_is(char c) {
    skip_ws();
    return pos < text.size() && text[pos] == c;
  }

  std::string ident() {
    skip_ws();
    const std::size_t start = pos;
    while (pos < text.size() && (std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) ++pos;
    if (pos == start) fail("expected a measure kind (atomic, density, uniform, point, cantor, mix)");
    return std::string(text.substr(start, pos - start));
  }

  double number() {
    skip_ws();
    const char* begin = text.data() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos += static_cast<std::size_t>(end - begin);
    return v;
  }

  Measure literal() {
    skip_ws();
    const std::size_t start = pos;
    const std::string kind = ident();
    try {
      if (kind == "atomic") {
        std::vector<Atom> atoms;
        expect('(');
        do {
          expect('(');
          const double p = number();
          expect(',');
          const double w = number();
          expect(')');
          atoms.push_back({p, w});
        } while (consume_comma());
        expect(')');
        return Measure::atomic(std::move(atoms));
      }
      if (kind == "point") {
        expect('(');
        const double p = number();
        expect(')');
        return Measure::point_mass(p);
      }
      if (kind == "density") {
        std::vector<DensityPiece> pieces;
        expect('(');
        do {
          expect('(');
          const double l = number();
          expect(',');
          const double r = number();
          expect(',');
          const double v0 = number();
          double v1 = v0;
          if (consume_comma()) v1 = number();
          expect(')');
          pieces.push_back({l, r, v0, v1});
        } while (consume_comma());
        expect(')');
        return Measure::density(std::move(pieces));
      }
      if (kind == "uniform") {
        expect('(');
        const double l = number();
        expect(',');
        const double r = number();
        expect(')');
        return Measure::uniform(l, r);
      }
      if (kind == "cantor") {
        expect('(');
        const double l = number();
        expect(',');
        const double r = number();
        expect(',');
        const double ratio = number();
        expect(',');
        const double depth = number();
        expect(')');
        return Measure::ifs_cantor(l, r, ratio, static_cast<int>(depth));
      }
      if (kind == "mix") {
        std::vector<std::pair<double, Measure>> parts;
        expect('(');
        do {
          expect('(');
          const double w = number();
          expect(',');
          Measure m = literal();
          expect(')');
          parts.emplace_back(w, std::move(m));
        } while (consume_comma());
        expect(')');
        return Measure::mixture(std::move(parts));
      }
    } catch (const std::invalid_argument& e) {
      throw MeasureParseError{start, e.what()};
    }
    pos = start;
    fail("unknown measure kind '" + kind + "'");
  }

  bool consume_comma() {
    if (peek_is(',')) {
      ++pos;
      return true;
    }
    return false;
  }
};

}  // namespace

std::string format_measure(const Measure& m) { return format_rec(m); }

std::optional<Measure> parse_measure(std::string_view text, MeasureParseError* error) {
  Parser p{text};
  try {
    Measure m = p.literal();
    p.skip_ws();
    if (p.pos != text.size()) {
      if (error) *error = {p.pos, "trailing characters after measure literal"};
      return std::nullopt;
    }
    return m;
  } catch (const MeasureParseError& e) {
    if (error) *error = e;
    return std::nullopt;
  }
}

Measure parse_measure_or_throw(std::string_view text) {
  MeasureParseError err;
  auto m = parse_measure(text, &err);
  if (!m) {
    throw std::invalid_argument("measure literal (offset " + std::to_string(err.offset) + "): " + err.message);
  }
  return *m;
}

}  // namespace idslab
