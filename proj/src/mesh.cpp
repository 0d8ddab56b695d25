#include "pfrac/mesh.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace pfrac {

namespace {

constexpr double kSnapTol = 1e-9;

bool close(double a, double b, double tol = kSnapTol) { return std::abs(a - b) <= tol; }

// Subdivide [lo, hi] so that every interval between consecutive breakpoints
// is split uniformly with spacing <= its target h. Breakpoints become exact
// grid lines.
struct AxisSegment {
  double lo, hi, h;
};

std::vector<double> graded_axis(const std::vector<AxisSegment>& segments) {
  std::vector<double> coords;
  coords.push_back(segments.front().lo);
  for (const auto& seg : segments) {
    const double len = seg.hi - seg.lo;
    if (len <= 0.0) throw std::invalid_argument("graded_axis: empty segment");
    const int n = std::max(1, static_cast<int>(std::ceil(len / seg.h - 1e-9)));
    for (int i = 1; i <= n; ++i) coords.push_back(seg.lo + len * i / n);
  }
  return coords;
}

struct Grid {
  std::vector<double> x, y;
  int nx() const { return static_cast<int>(x.size()); }
  int ny() const { return static_cast<int>(y.size()); }
  int node(int ix, int iy) const { return iy * nx() + ix; }
};

Mesh tensor_mesh(const Grid& g) {
  Mesh m;
  m.nodes.reserve(static_cast<size_t>(g.nx()) * g.ny());
  for (int iy = 0; iy < g.ny(); ++iy)
    for (int ix = 0; ix < g.nx(); ++ix) m.nodes.push_back({g.x[ix], g.y[iy]});
  m.elements.reserve(static_cast<size_t>(g.nx() - 1) * (g.ny() - 1));
  for (int iy = 0; iy + 1 < g.ny(); ++iy)
    for (int ix = 0; ix + 1 < g.nx(); ++ix)
      m.elements.push_back({g.node(ix, iy), g.node(ix + 1, iy), g.node(ix + 1, iy + 1), g.node(ix, iy + 1)});
  return m;
}

// Cuts a zero-width slit along a grid line by duplicating the interior
// slit nodes. Elements on the "negative" side (per the outward normal of
// the slit line) are reconnected to the duplicates. The slit spans
// [span_lo, span_hi) along the line; the node at span_hi is the shared tip.
// axis==0: slit along y = line_pos (normal = y), span in x.
// axis==1: slit along x = line_pos (normal = x), span in y.
void cut_slit(Mesh& m, int axis, double line_pos, double span_lo, double span_hi,
              const std::string& pos_set, const std::string& neg_set) {
  std::map<int, int> dup;  // original -> duplicate
  std::vector<int> originals;
  for (int i = 0; i < m.node_count(); ++i) {
    const double along = axis == 0 ? m.nodes[i][0] : m.nodes[i][1];
    const double across = axis == 0 ? m.nodes[i][1] : m.nodes[i][0];
    if (!close(across, line_pos)) continue;
    if (along >= span_lo - kSnapTol && along < span_hi - kSnapTol) originals.push_back(i);
  }
  for (int i : originals) {
    dup[i] = m.node_count();
    m.nodes.push_back(m.nodes[i]);
  }
  for (auto& elem : m.elements) {
    double center = 0.0;
    for (int k = 0; k < 4; ++k) center += 0.25 * (axis == 0 ? m.nodes[elem[k]][1] : m.nodes[elem[k]][0]);
    if (center < line_pos) {
      for (int k = 0; k < 4; ++k) {
        auto it = dup.find(elem[k]);
        if (it != dup.end()) elem[k] = it->second;
      }
    }
  }
  std::vector<int> pos_nodes = originals;
  std::vector<int> neg_nodes;
  neg_nodes.reserve(originals.size());
  for (int i : originals) neg_nodes.push_back(dup[i]);
  m.boundary_sets[pos_set] = pos_nodes;
  m.boundary_sets[neg_set] = neg_nodes;
}

std::vector<int> nodes_on_line(const Mesh& m, int axis, double pos) {
  std::vector<int> out;
  for (int i = 0; i < m.node_count(); ++i)
    if (close(m.nodes[i][axis], pos)) out.push_back(i);
  return out;
}

int node_at(const Mesh& m, double x, double y) {
  for (int i = 0; i < m.node_count(); ++i)
    if (close(m.nodes[i][0], x) && close(m.nodes[i][1], y)) return i;
  throw StructuralError("mesh: no node at requested coordinate");
}

void check_spec(const GeometrySpec& spec, double band_cap) {
  if (!(spec.l > 0.0)) throw std::invalid_argument("geometry: l must be positive");
  if (!(spec.refinement_ratio > 0.0 && spec.refinement_ratio <= 1.0))
    throw std::invalid_argument("geometry: refinement_ratio must be in (0, 1]");
  if (!(spec.coarse_h > 0.0)) throw std::invalid_argument("geometry: coarse_h must be positive");
  if (4.0 * spec.l > band_cap)
    throw std::invalid_argument("geometry: l larger than the fracture band allows");
}

// Fracture band half-width: resolves the regularized profile and keeps a
// few fine rows even for very small l.
double band_half(const GeometrySpec& spec) {
  return std::max(4.0 * spec.l, 6.0 * spec.refinement_ratio * spec.l);
}

Mesh build_senp(const GeometrySpec& spec, bool shear) {
  check_spec(spec, 0.8);
  const double hf = spec.refinement_ratio * spec.l;
  const double bh = std::min(band_half(spec), 0.4);
  const double hc = spec.coarse_h;

  Grid g;
  const double xb = 0.5 - std::min(bh, 0.3);
  g.x = graded_axis({{0.0, xb, hc}, {xb, 0.5, hf}, {0.5, 1.0, hf}});
  if (shear) {
    // Crack curves toward the lower-right corner.
    const double yt = std::min(0.5 + bh, 0.9);
    g.y = graded_axis({{0.0, 0.5, hf}, {0.5, yt, hf}, {yt, 1.0, hc}});
  } else {
    const double y0 = 0.5 - bh, y1 = 0.5 + bh;
    g.y = graded_axis({{0.0, y0, hc}, {y0, 0.5, hf}, {0.5, y1, hf}, {y1, 1.0, hc}});
  }
  if (g.nx() < 3 || g.ny() < 3) throw std::invalid_argument("geometry: refinement produces fewer than 2 elements per dimension");

  Mesh m = tensor_mesh(g);
  m.thickness = spec.thickness > 0.0 ? spec.thickness : 1.0;
  m.boundary_sets["bottom_edge"] = nodes_on_line(m, 1, 0.0);
  m.boundary_sets["top_edge"] = nodes_on_line(m, 1, 1.0);
  cut_slit(m, 0, 0.5, 0.0, 0.5, "slit_upper", "slit_lower");
  m.validate();
  return m;
}

Mesh build_three_point_bending(const GeometrySpec& spec) {
  check_spec(spec, 2.0);
  const double hf = spec.refinement_ratio * spec.l;
  const double hc = spec.coarse_h;
  const double bw = std::min(band_half(spec), 1.5);

  Grid g;
  const double x0 = 4.0 - bw, x1 = 4.0 + bw;
  g.x = graded_axis({{0.0, x0, hc}, {x0, 4.0, hf}, {4.0, x1, hf}, {x1, 8.0, hc}});
  g.y = graded_axis({{0.0, 0.4, hf}, {0.4, 2.0, hf}});
  if (g.nx() < 3 || g.ny() < 3) throw std::invalid_argument("geometry: refinement produces fewer than 2 elements per dimension");

  Mesh m = tensor_mesh(g);
  m.thickness = spec.thickness > 0.0 ? spec.thickness : 1.0;
  m.boundary_sets["support_left"] = {node_at(m, 0.0, 0.0)};
  m.boundary_sets["support_right"] = {node_at(m, 8.0, 0.0)};
  m.boundary_sets["load_node"] = {node_at(m, 4.0, 2.0)};
  cut_slit(m, 1, 4.0, 0.0, 0.4, "slit_right", "slit_left");
  m.validate();
  return m;
}

Mesh build_l_panel(const GeometrySpec& spec) {
  check_spec(spec, 120.0);
  const double hf = spec.refinement_ratio * spec.l;
  const double hc = spec.coarse_h;

  Grid g;
  const double xb = std::min(250.0 + band_half(spec), 300.0);
  g.x = graded_axis({{0.0, 250.0, hf}, {250.0, xb, hf}, {xb, 470.0, hc}, {470.0, 500.0, hc}});
  const double y0 = std::max(250.0 - band_half(spec), 150.0);
  const double y1 = std::min(250.0 + band_half(spec), 350.0);
  g.y = graded_axis({{0.0, y0, hc}, {y0, 250.0, hf}, {250.0, y1, hf}, {y1, 500.0, hc}});
  if (g.nx() < 3 || g.ny() < 3) throw std::invalid_argument("geometry: refinement produces fewer than 2 elements per dimension");

  Mesh full = tensor_mesh(g);
  // Drop the lower-right quadrant and renumber.
  Mesh m;
  m.thickness = spec.thickness > 0.0 ? spec.thickness : 100.0;
  std::vector<int> remap(full.node_count(), -1);
  for (const auto& elem : full.elements) {
    double cx = 0.0, cy = 0.0;
    for (int k = 0; k < 4; ++k) {
      cx += 0.25 * full.nodes[elem[k]][0];
      cy += 0.25 * full.nodes[elem[k]][1];
    }
    if (cx > 250.0 + kSnapTol && cy < 250.0 - kSnapTol) continue;
    std::array<int, 4> mapped{};
    for (int k = 0; k < 4; ++k) {
      if (remap[elem[k]] < 0) {
        remap[elem[k]] = m.node_count();
        m.nodes.push_back(full.nodes[elem[k]]);
      }
      mapped[k] = remap[elem[k]];
    }
    m.elements.push_back(mapped);
  }
  std::vector<int> bottom;
  for (int i = 0; i < m.node_count(); ++i)
    if (close(m.nodes[i][1], 0.0)) bottom.push_back(i);
  m.boundary_sets["bottom_edge"] = bottom;
  m.boundary_sets["load_node"] = {node_at(m, 470.0, 250.0)};
  m.validate();
  return m;
}

}  // namespace

Benchmark benchmark_from_name(const std::string& name) {
  if (name == "senp_tension") return Benchmark::senp_tension;
  if (name == "senp_shear") return Benchmark::senp_shear;
  if (name == "three_point_bending") return Benchmark::three_point_bending;
  if (name == "l_panel") return Benchmark::l_panel;
  throw std::invalid_argument("unknown benchmark: " + name);
}

std::string benchmark_name(Benchmark b) {
  switch (b) {
    case Benchmark::senp_tension: return "senp_tension";
    case Benchmark::senp_shear: return "senp_shear";
    case Benchmark::three_point_bending: return "three_point_bending";
    case Benchmark::l_panel: return "l_panel";
  }
  return "?";
}

void Mesh::validate() const {
  const double gp = 1.0 / std::sqrt(3.0);
  for (size_t e = 0; e < elements.size(); ++e) {
    const auto& el = elements[e];
    std::set<int> distinct(el.begin(), el.end());
    if (distinct.size() != 4) throw StructuralError("mesh: element with repeated nodes");
    for (int k = 0; k < 4; ++k)
      if (el[k] < 0 || el[k] >= node_count()) throw StructuralError("mesh: element references invalid node");
    for (double xi : {-gp, gp}) {
      for (double eta : {-gp, gp}) {
        // Bilinear isoparametric Jacobian.
        const double dxi[4] = {-0.25 * (1 - eta), 0.25 * (1 - eta), 0.25 * (1 + eta), -0.25 * (1 + eta)};
        const double deta[4] = {-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi), 0.25 * (1 - xi)};
        double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
        for (int k = 0; k < 4; ++k) {
          j00 += dxi[k] * nodes[el[k]][0];
          j01 += dxi[k] * nodes[el[k]][1];
          j10 += deta[k] * nodes[el[k]][0];
          j11 += deta[k] * nodes[el[k]][1];
        }
        if (j00 * j11 - j01 * j10 <= 0.0) throw StructuralError("mesh: non-positive Jacobian determinant");
      }
    }
  }
  for (const auto& [name, set] : boundary_sets)
    for (int i : set)
      if (i < 0 || i >= node_count()) throw StructuralError("mesh: boundary set '" + name + "' references invalid node");
}

Mesh build_benchmark_mesh(const GeometrySpec& spec) {
  switch (spec.benchmark) {
    case Benchmark::senp_tension: return build_senp(spec, false);
    case Benchmark::senp_shear: return build_senp(spec, true);
    case Benchmark::three_point_bending: return build_three_point_bending(spec);
    case Benchmark::l_panel: return build_l_panel(spec);
  }
  throw std::invalid_argument("unknown benchmark");
}

std::string write_mesh_json(const Mesh& mesh) {
  nlohmann::json j;
  j["nodes"] = mesh.nodes;
  j["elements"] = mesh.elements;
  j["boundary_sets"] = mesh.boundary_sets;
  j["thickness"] = mesh.thickness;
  return j.dump(2);
}

Mesh read_mesh_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Mesh m;
  m.nodes = j.at("nodes").get<std::vector<std::array<double, 2>>>();
  m.elements = j.at("elements").get<std::vector<std::array<int, 4>>>();
  m.boundary_sets = j.at("boundary_sets").get<std::map<std::string, std::vector<int>>>();
  m.thickness = j.at("thickness").get<double>();
  m.validate();
  return m;
}

}  // namespace pfrac
