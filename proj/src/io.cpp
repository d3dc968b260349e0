#include <kamnf/io.hpp>

#include <cctype>
#include <cstdio>
#include <sstream>

namespace kamnf {

namespace {

struct Cursor {
  const std::string &s;
  std::size_t i = 0;

  void skipWs() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool done() {
    skipWs();
    return i >= s.size();
  }
  char peek() {
    skipWs();
    return i < s.size() ? s[i] : '\0';
  }
  char take() {
    skipWs();
    return s[i++];
  }
  bool accept(char c) {
    if (peek() == c) {
      ++i;
      return true;
    }
    return false;
  }
};

double parse_number(Cursor &cur) {
  cur.skipWs();
  const char *start = cur.s.c_str() + cur.i;
  char *end = nullptr;
  double v = std::strtod(start, &end);
  if (end == start) throw ParseError("expected a number", cur.i);
  cur.i += static_cast<std::size_t>(end - start);
  return v;
}

// a+bi | a-bi | bi | a  (inside parentheses)
std::complex<double> parse_complex_body(Cursor &cur) {
  double first = parse_number(cur);
  if (cur.accept('i')) return {0.0, first};
  const char c = cur.peek();
  if (c == '+' || c == '-') {
    const std::size_t save = cur.i;
    cur.take();
    double second = parse_number(cur);
    if (cur.accept('i')) return {first, c == '-' ? -second : second};
    cur.i = save;  // not a complex literal tail; leave for the caller
  }
  return {first, 0.0};
}

int parse_exponent(Cursor &cur) {
  cur.skipWs();
  std::size_t start = cur.i;
  long v = 0;
  bool any = false;
  while (cur.i < cur.s.size() &&
         std::isdigit(static_cast<unsigned char>(cur.s[cur.i]))) {
    v = v * 10 + (cur.s[cur.i] - '0');
    ++cur.i;
    any = true;
    if (v > 1000000) throw ParseError("exponent overflow", start);
  }
  if (!any) throw ParseError("expected an exponent", cur.i);
  return static_cast<int>(v);
}

}  // namespace

SeriesD parse_series(const std::string &text, int n, int maxDegree,
                     int maxTDegree) {
  SeriesD out(n, maxDegree, maxTDegree);
  Cursor cur{text};
  bool first = true;
  while (!cur.done()) {
    double sign = 1.0;
    char c = cur.peek();
    if (c == '+' || c == '-') {
      cur.take();
      if (c == '-') sign = -1.0;
    } else if (!first) {
      throw ParseError("expected '+' or '-' between terms", cur.i);
    }
    first = false;

    std::complex<double> coeff(1.0, 0.0);
    bool have_coeff = false;
    ExponentVec e(n);
    bool have_var = false;
    for (;;) {
      cur.skipWs();
      c = cur.peek();
      if (c == '(') {
        cur.take();
        coeff *= parse_complex_body(cur);
        if (!cur.accept(')')) throw ParseError("expected ')'", cur.i);
        have_coeff = true;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        coeff *= parse_complex_body(cur);
        have_coeff = true;
      } else if (c == 'q' || c == 'p' || c == 'l' || c == 't') {
        const std::size_t col = cur.i;
        cur.take();
        const int idx = parse_exponent(cur);  // 1-based variable index
        if (idx < 1 || idx > n)
          throw ParseError(std::string("variable index out of range for ") +
                               c + std::to_string(idx),
                           col);
        int exp = 1;
        if (cur.accept('^')) exp = parse_exponent(cur);
        Var v = c == 'q' ? Var::Q : c == 'p' ? Var::P : c == 'l' ? Var::L
                                                                 : Var::T;
        e.at(v, idx - 1) += exp;
        have_var = true;
      } else {
        throw ParseError(std::string("unexpected token '") + c + "'", cur.i);
      }
      if (!cur.accept('*')) break;
    }
    if (!have_coeff && !have_var)
      throw ParseError("empty term", cur.i);
    out.addTerm(e, coeff * sign);
  }
  return out;
}

std::string format_complex(std::complex<double> c) {
  char buf[80];
  if (c.imag() == 0.0) {
    std::snprintf(buf, sizeof buf, "%.17g", c.real());
    return buf;
  }
  std::snprintf(buf, sizeof buf, "(%.17g%s%.17gi)", c.real(),
                c.imag() < 0 ? "" : "+", c.imag());
  return buf;
}

std::string print_series(const SeriesD &s) {
  if (s.isZero()) return "0";
  std::ostringstream os;
  bool first = true;
  static const char *names = "qplt";
  for (const auto &[e, c] : s.terms()) {
    std::complex<double> coeff = c;
    if (first) {
      if (coeff.imag() == 0.0 && coeff.real() < 0) {
        os << "-";
        coeff = -coeff;
      }
    } else {
      if (coeff.imag() == 0.0 && coeff.real() < 0) {
        os << " - ";
        coeff = -coeff;
      } else {
        os << " + ";
      }
    }
    first = false;
    os << format_complex(coeff);
    for (int v = 0; v < 4; ++v)
      for (int i = 0; i < s.dim(); ++i) {
        const int exp = e.at(static_cast<Var>(v), i);
        if (exp == 0) continue;
        os << "*" << names[v] << (i + 1);
        if (exp > 1) os << "^" << exp;
      }
  }
  return os.str();
}

nlohmann::json series_to_json(const SeriesD &s) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto &[e, c] : s.terms()) {
    // exps in (t, l, q, p) block order
    std::vector<int> exps;
    for (Var v : {Var::T, Var::L, Var::Q, Var::P})
      for (int i = 0; i < s.dim(); ++i) exps.push_back(e.at(v, i));
    terms.push_back({{"exps", exps}, {"re", c.real()}, {"im", c.imag()}});
  }
  return {{"dim", s.dim()},
          {"N", s.maxDegree()},
          {"N_t", s.maxTDegree()},
          {"terms", terms}};
}

SeriesD series_from_json(const nlohmann::json &j) {
  const int n = j.at("dim").get<int>();
  SeriesD s(n, j.at("N").get<int>(), j.at("N_t").get<int>());
  for (const auto &t : j.at("terms")) {
    const auto exps = t.at("exps").get<std::vector<int>>();
    if (static_cast<int>(exps.size()) != 4 * n)
      throw std::invalid_argument("bad exponent vector length in JSON");
    ExponentVec e(n);
    int k = 0;
    for (Var v : {Var::T, Var::L, Var::Q, Var::P})
      for (int i = 0; i < n; ++i) e.at(v, i) = exps[k++];
    s.addTerm(e, {t.at("re").get<double>(), t.at("im").get<double>()});
  }
  return s;
}

}  // namespace kamnf
