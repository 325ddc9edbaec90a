// SPDX-License-Identifier: Apache-2.0
#include "pspect/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pspect {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_values_csv(std::ostream& os, const ArrayXd& v, Index per_line) {
  for (Index k = 0; k < v.size(); ++k) {
    os << format_double(v[k]);
    os << ((k % per_line == per_line - 1) ? '\n' : ',');
  }
}

void write_mask_csv(std::ostream& os, const std::vector<std::uint8_t>& m,
                    Index per_line) {
  for (Index k = 0; k < static_cast<Index>(m.size()); ++k) {
    os << (m[static_cast<std::size_t>(k)] ? '1' : '0');
    os << ((k % per_line == per_line - 1) ? '\n' : ',');
  }
}

std::vector<double> parse_csv_doubles(std::istream& is, Index count) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  std::string tok;
  while (static_cast<Index>(out.size()) < count) {
    int c = is.get();
    if (c == EOF) throw ParameterError("grid file: truncated CSV block");
    if (c == ',' || c == '\n' || c == '\r') {
      if (!tok.empty()) {
        out.push_back(std::strtod(tok.c_str(), nullptr));
        tok.clear();
      }
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return out;
}

struct Header {
  json j;
  int dim;
};

Header read_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw ParameterError("grid file: missing header");
  Header h;
  h.j = json::parse(line);
  h.dim = h.j.at("dim").get<int>();
  return h;
}

void save_2d(const std::string& path, const GridDomain2D& d, const ArrayXd& v,
             const char* kind) {
  std::ofstream os(path);
  if (!os) throw ParameterError("cannot open for writing: " + path);
  json hdr = {{"kind", kind},
              {"dim", 2},
              {"origin", {d.origin().x(), d.origin().y()}},
              {"h", d.spacing()},
              {"nx", d.nx()},
              {"ny", d.ny()}};
  os << hdr.dump() << '\n';
  write_values_csv(os, v, d.nx());
  write_mask_csv(os, d.interior_mask(), d.nx());
  if (!os) throw ParameterError("write failed: " + path);
}

std::pair<DomainPtr, ArrayXd> load_2d(const std::string& path,
                                      const char* kind) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open: " + path);
  Header h = read_header(is);
  if (h.dim != 2) throw ParameterError("grid file: expected dim 2");
  if (h.j.value("kind", std::string("grid_function")) != kind)
    throw ParameterError("grid file: unexpected kind");
  const Index nx = h.j.at("nx").get<Index>();
  const Index ny = h.j.at("ny").get<Index>();
  const auto org = h.j.at("origin");
  const double hh = h.j.at("h").get<double>();
  const auto vals = parse_csv_doubles(is, nx * ny);
  const auto mask_d = parse_csv_doubles(is, nx * ny);
  std::vector<std::uint8_t> mask(mask_d.size());
  for (std::size_t k = 0; k < mask_d.size(); ++k)
    mask[k] = mask_d[k] != 0.0 ? 1 : 0;
  auto dom = std::make_shared<GridDomain2D>(
      Vector2d(org[0].get<double>(), org[1].get<double>()), hh, nx, ny,
      std::move(mask));
  ArrayXd v(nx * ny);
  for (Index k = 0; k < nx * ny; ++k) v[k] = vals[static_cast<std::size_t>(k)];
  return {std::move(dom), std::move(v)};
}

} // namespace

void save_grid_function(const GridFunction& u, const std::string& path) {
  validate(u);
  save_2d(path, *u.domain, u.values, "grid_function");
}

void save_grid_function(const GridFunction1D& u, const std::string& path) {
  validate(u);
  const GridDomain1D& d = *u.domain;
  std::ofstream os(path);
  if (!os) throw ParameterError("cannot open for writing: " + path);
  json hdr = {{"kind", "grid_function"},
              {"dim", 1},
              {"origin", d.origin()},
              {"h", d.spacing()},
              {"n", d.num_nodes()}};
  os << hdr.dump() << '\n';
  write_values_csv(os, u.values, d.num_nodes());
  write_mask_csv(os, d.interior_mask(), d.num_nodes());
  if (!os) throw ParameterError("write failed: " + path);
}

GridFunction load_grid_function(const std::string& path) {
  auto [dom, v] = load_2d(path, "grid_function");
  GridFunction u(dom, std::move(v));
  validate(u);
  return u;
}

GridFunction1D load_grid_function_1d(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open: " + path);
  Header h = read_header(is);
  if (h.dim != 1) throw ParameterError("grid file: expected dim 1");
  const Index n = h.j.at("n").get<Index>();
  const double hh = h.j.at("h").get<double>();
  const double org = h.j.at("origin").get<double>();
  const auto vals = parse_csv_doubles(is, n);
  const auto mask_d = parse_csv_doubles(is, n);
  std::vector<std::uint8_t> mask(mask_d.size());
  for (std::size_t k = 0; k < mask_d.size(); ++k)
    mask[k] = mask_d[k] != 0.0 ? 1 : 0;
  auto dom = std::make_shared<GridDomain1D>(org, hh, n, std::move(mask));
  ArrayXd v(n);
  for (Index k = 0; k < n; ++k) v[k] = vals[static_cast<std::size_t>(k)];
  GridFunction1D u(dom, std::move(v));
  validate(u);
  return u;
}

void save_dual_functional(const DualFunctional& F, const std::string& path) {
  save_2d(path, *F.domain, F.coeffs, "dual_functional");
}

DualFunctional load_dual_functional(const std::string& path) {
  auto [dom, v] = load_2d(path, "dual_functional");
  return {std::move(dom), std::move(v)};
}

} // namespace pspect
