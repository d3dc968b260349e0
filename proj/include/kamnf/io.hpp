#ifndef KAMNF_IO_HPP
#define KAMNF_IO_HPP

#include <json.hpp>

#include <kamnf/series.hpp>

namespace kamnf {

struct ParseError : std::runtime_error {
  ParseError(const std::string &msg, std::size_t column)
      : std::runtime_error(msg + " at column " + std::to_string(column + 1)),
        column(column) {}
  std::size_t column;
};

// Series literals: terms like `(2+1i)*q1^2*p2`, variables q1..qn, p1..pn,
// l1..ln, t1..tn, whitespace-insensitive.  print . parse is idempotent
// under the graded-lex term order.
SeriesD parse_series(const std::string &text, int n, int maxDegree,
                     int maxTDegree = -1);

std::string print_series(const SeriesD &s);

nlohmann::json series_to_json(const SeriesD &s);
SeriesD series_from_json(const nlohmann::json &j);

std::string format_complex(std::complex<double> c);

}  // namespace kamnf

#endif
