#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "qhlab/domains.hpp"

namespace qhlab {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& tok, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw PreconditionError("domain file line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
}

}  // namespace

void write_domain(std::ostream& out, const Domain& d) {
  out << "domain v1\n";
  out << "param builder " << d.provenance().builder << '\n';
  out << "param outer " << (d.outer() == Domain::Outer::Disc ? "disc" : "box-union") << '\n';
  for (const auto& [k, v] : d.provenance().params) out << "param " << k << ' ' << v << '\n';
  if (d.disc()) {
    const Circle& c = *d.disc();
    out << "circle " << num(c.center.x) << ' ' << num(c.center.y) << ' ' << num(c.radius) << ' ' << c.sign << '\n';
  }
  const auto& boxes = d.outer() == Domain::Outer::Disc ? d.holes() : d.union_boxes();
  for (const Box& b : boxes)
    out << "box " << num(b.lo.x) << ' ' << num(b.lo.y) << ' ' << num(b.hi.x) << ' ' << num(b.hi.y) << '\n';
  auto seg = [&](const Segment& s, const char* kind) {
    out << "segment " << num(s.a.x) << ' ' << num(s.a.y) << ' ' << num(s.b.x) << ' ' << num(s.b.y) << ' ' << kind
        << '\n';
  };
  for (const auto& s : d.outer_segments()) seg(s, "boundary");
  for (const auto& s : d.walls()) seg(s, "wall");
  for (const auto& h : d.hints()) seg(h.axis, "hint");
}

Domain read_domain(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  if (!next_line() || line != "domain v1") throw PreconditionError("missing 'domain v1' header");

  Provenance prov;
  std::string outer = "box-union";
  std::vector<Box> boxes;
  std::vector<Segment> walls;
  std::vector<RefinementHint> hints;
  std::optional<Circle> circle;
  while (next_line()) {
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (kind == "param") {
      if (tok.empty()) throw PreconditionError("domain file line " + std::to_string(lineno) + ": empty param");
      std::string value;
      const auto pos = line.find(tok[0], 5) + tok[0].size();
      value = pos < line.size() ? line.substr(pos + 1) : "";
      if (tok[0] == "builder") prov.builder = value;
      else if (tok[0] == "outer") outer = value;
      else prov.params[tok[0]] = value;
    } else if (kind == "box" && tok.size() == 4) {
      boxes.push_back({{parse_num(tok[0], lineno), parse_num(tok[1], lineno)},
                       {parse_num(tok[2], lineno), parse_num(tok[3], lineno)}});
    } else if (kind == "circle" && tok.size() == 4) {
      circle = Circle{{parse_num(tok[0], lineno), parse_num(tok[1], lineno)}, parse_num(tok[2], lineno),
                      static_cast<int>(parse_num(tok[3], lineno))};
    } else if (kind == "segment" && tok.size() == 5) {
      const Segment s = make_segment({parse_num(tok[0], lineno), parse_num(tok[1], lineno)},
                                     {parse_num(tok[2], lineno), parse_num(tok[3], lineno)});
      if (tok[4] == "wall") walls.push_back(s);
      else if (tok[4] == "hint") hints.push_back({s, s.length() / 8.0, kHintReach});
      else if (tok[4] != "boundary")
        throw PreconditionError("domain file line " + std::to_string(lineno) + ": unknown segment kind");
    } else {
      throw PreconditionError("domain file line " + std::to_string(lineno) + ": malformed record");
    }
  }

  Domain d;
  if (outer == "disc") {
    if (!circle) throw PreconditionError("disc domain without circle record");
    d = Domain::disc_minus_holes(*circle, std::move(boxes), prov);
  } else if (outer == "box-union") {
    d = Domain::box_union(std::move(boxes), prov);
  } else {
    throw PreconditionError("unknown outer region '" + outer + "'");
  }
  if (!walls.empty() || !hints.empty()) d = d.with_walls(std::move(walls), std::move(hints), prov);
  if (auto it = prov.params.find("scale"); it != prov.params.end()) d.scale_ = std::stod(it->second);
  return d;
}

}  // namespace qhlab
