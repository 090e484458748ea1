#include <cmath>
#include <fstream>

#include "zoomout/error.hpp"
#include "zoomout/fmap.hpp"
#include "zoomout/text_io.hpp"

namespace zoomout {

void save_fmap(const FunctionalMap& fmap, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write functional map: " + path.string());
  out << fmap.rows() << ' ' << fmap.cols() << '\n';
  for (int r = 0; r < fmap.rows(); ++r) {
    for (int c = 0; c < fmap.cols(); ++c) out << (c ? " " : "") << text::format_double(fmap.C(r, c));
    out << '\n';
  }
  if (!out) throw IoError("failed writing functional map: " + path.string());
}

FunctionalMap load_fmap(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open functional map: " + path.string());
  const std::string name = path.string();
  text::LineReader reader(in);
  std::vector<std::string_view> tok;

  if (!reader.next(tok) || tok.size() != 2) throw ParseError(name, reader.line(), "expected header 'k_M k_N'");
  const auto rows = text::parse_long(tok[0]);
  const auto cols = text::parse_long(tok[1]);
  if (!rows || !cols || *rows < 1 || *cols < 1) throw ParseError(name, reader.line(), "invalid map dimensions");

  FunctionalMap out{Eigen::MatrixXd(*rows, *cols)};
  for (long r = 0; r < *rows; ++r) {
    if (!reader.next(tok) || static_cast<long>(tok.size()) != *cols) {
      throw ParseError(name, reader.line(), "expected " + std::to_string(*cols) + " values");
    }
    for (long c = 0; c < *cols; ++c) {
      auto v = text::parse_double(tok[c]);
      if (!v || !std::isfinite(*v)) throw ParseError(name, reader.line(), "invalid value '" + std::string(tok[c]) + "'");
      out.C(r, c) = *v;
    }
  }
  if (reader.next(tok)) throw ParseError(name, reader.line(), "trailing data after map rows");
  return out;
}

void save_pointmap(const PointMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write point map: " + path.string());
  for (int t : map.targets) out << t << '\n';
  if (!out) throw IoError("failed writing point map: " + path.string());
}

PointMap load_pointmap(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open point map: " + path.string());
  const std::string name = path.string();
  text::LineReader reader(in);
  std::vector<std::string_view> tok;
  PointMap out;
  while (reader.next(tok)) {
    if (tok.size() != 1) throw ParseError(name, reader.line(), "expected one index per line");
    auto v = text::parse_long(tok[0]);
    if (!v || *v < 0) throw ParseError(name, reader.line(), "invalid vertex index '" + std::string(tok[0]) + "'");
    out.targets.push_back(static_cast<int>(*v));
  }
  return out;
}

}  // namespace zoomout
