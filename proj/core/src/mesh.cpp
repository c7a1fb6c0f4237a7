#include "stokeshdg/mesh.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace stokeshdg {

int Mesh::n_interior_facets() const {
  int n = 0;
  for (const Facet& f : facets) n += f.is_boundary() ? 0 : 1;
  return n;
}

double Mesh::element_area(int e) const {
  const auto& el = elements.at(e);
  const Eigen::Vector2d a = vertices[el[1]] - vertices[el[0]];
  const Eigen::Vector2d b = vertices[el[2]] - vertices[el[0]];
  return 0.5 * std::abs(a.x() * b.y() - a.y() * b.x());
}

Mesh make_mesh(std::vector<Eigen::Vector2d> vertices,
               std::vector<std::array<int, 3>> elements) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.elements = std::move(elements);
  for (auto& el : mesh.elements) std::sort(el.begin(), el.end());

  // Collect facets keyed by their sorted vertex pair; adjacency is recorded
  // in element order, so left is always the lower element index.
  std::map<std::array<int, 2>, int> facet_of;
  mesh.element_facets.assign(mesh.elements.size(), {-1, -1, -1});
  for (int e = 0; e < mesh.n_elements(); ++e) {
    for (int f = 0; f < 3; ++f) {
      const int a = mesh.elements[e][refgeom::kFacetVertices[f][0]];
      const int b = mesh.elements[e][refgeom::kFacetVertices[f][1]];
      const std::array<int, 2> key = {std::min(a, b), std::max(a, b)};
      auto [it, inserted] = facet_of.try_emplace(key, mesh.n_facets());
      if (inserted) {
        Facet facet;
        facet.vertices = key;
        facet.left = e;
        facet.local_index[0] = f;
        mesh.facets.push_back(facet);
      } else {
        Facet& facet = mesh.facets[it->second];
        if (!facet.is_boundary())
          throw std::runtime_error("facet shared by more than two elements");
        facet.right = e;
        facet.local_index[1] = f;
      }
      mesh.element_facets[e][f] = it->second;
    }
  }

  for (Facet& facet : mesh.facets) {
    const Eigen::Vector2d a = mesh.vertices[facet.vertices[0]];
    const Eigen::Vector2d b = mesh.vertices[facet.vertices[1]];
    const Eigen::Vector2d tangent = b - a;
    facet.length = tangent.norm();
    Eigen::Vector2d normal(tangent.y(), -tangent.x());
    normal.normalize();
    // Orient away from the left element.
    const auto& el = mesh.elements[facet.left];
    const Eigen::Vector2d centroid =
        (mesh.vertices[el[0]] + mesh.vertices[el[1]] + mesh.vertices[el[2]]) / 3.0;
    if (normal.dot(0.5 * (a + b) - centroid) < 0.0) normal = -normal;
    facet.normal = normal;
  }

  mesh.element_h.resize(mesh.elements.size());
  mesh.h = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    double hmax = 0.0;
    for (int f = 0; f < 3; ++f)
      hmax = std::max(hmax, mesh.facets[mesh.element_facets[e][f]].length);
    mesh.element_h[e] = hmax;
    mesh.h = std::max(mesh.h, hmax);
  }
  return mesh;
}

Mesh unit_square_mesh(int n_subdiv) {
  if (n_subdiv < 1) throw std::invalid_argument("n_subdiv must be >= 1");
  const int n = n_subdiv;
  std::vector<Eigen::Vector2d> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.emplace_back(static_cast<double>(i) / n,
                            static_cast<double>(j) / n);
  std::vector<std::array<int, 3>> elements;
  elements.reserve(2 * n * n);
  const auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      elements.push_back({v00, v10, v11});
      elements.push_back({v00, v11, v01});
    }
  }
  return make_mesh(std::move(vertices), std::move(elements));
}

Mesh refine(const Mesh& mesh) {
  std::vector<Eigen::Vector2d> vertices = mesh.vertices;
  // Midpoint vertices are appended in facet index order.
  std::vector<int> midpoint(mesh.n_facets());
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& facet = mesh.facets[f];
    midpoint[f] = static_cast<int>(vertices.size());
    vertices.push_back(0.5 * (mesh.vertices[facet.vertices[0]] +
                              mesh.vertices[facet.vertices[1]]));
  }
  std::vector<std::array<int, 3>> elements;
  elements.reserve(4 * mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const int m01 = midpoint[mesh.element_facets[e][0]];
    const int m12 = midpoint[mesh.element_facets[e][1]];
    const int m20 = midpoint[mesh.element_facets[e][2]];
    elements.push_back({el[0], m01, m20});
    elements.push_back({m01, el[1], m12});
    elements.push_back({m20, m12, el[2]});
    elements.push_back({m01, m12, m20});
  }
  return make_mesh(std::move(vertices), std::move(elements));
}

AffineMap element_map(const Mesh& mesh, int element_index) {
  if (element_index < 0 || element_index >= mesh.n_elements())
    throw std::out_of_range("element index out of range");
  const auto& el = mesh.elements[element_index];
  const Eigen::Vector2d p0 = mesh.vertices[el[0]];
  const Eigen::Vector2d p1 = mesh.vertices[el[1]];
  const Eigen::Vector2d p2 = mesh.vertices[el[2]];
  AffineMap map;
  // Reference barycentrics: l1 = (1-y-x)/2, l2 = (1-y+x)/2, l3 = y.
  map.jacobian.col(0) = 0.5 * (p1 - p0);
  map.jacobian.col(1) = p2 - 0.5 * (p0 + p1);
  map.offset = 0.5 * (p0 + p1);
  map.det = map.jacobian.determinant();
  if (map.det == 0.0) throw std::runtime_error("degenerate element");
  map.inverse_transpose = map.jacobian.inverse().transpose();
  return map;
}

void dump_mesh(const Mesh& mesh, std::ostream& out) {
  out << "2 " << mesh.n_vertices() << ' ' << mesh.n_elements() << '\n';
  out.precision(17);
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << '\n';
  for (const auto& el : mesh.elements)
    out << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
}

Mesh load_mesh(std::istream& in) {
  int dim = 0, nv = 0, ne = 0;
  if (!(in >> dim >> nv >> ne) || dim != 2 || nv < 3 || ne < 1)
    throw std::runtime_error("invalid mesh header");
  std::vector<Eigen::Vector2d> vertices(nv);
  for (auto& v : vertices)
    if (!(in >> v.x() >> v.y())) throw std::runtime_error("bad vertex line");
  std::vector<std::array<int, 3>> elements(ne);
  for (auto& el : elements)
    if (!(in >> el[0] >> el[1] >> el[2]))
      throw std::runtime_error("bad element line");
  return make_mesh(std::move(vertices), std::move(elements));
}

}  // namespace stokeshdg
