#include "serpentine/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace serpentine {

namespace {

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b, double tol) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm() <= tol;
  const double cross = d.x() * (p.y() - a.y()) - d.y() * (p.x() - a.x());
  if (std::abs(cross) > tol * std::sqrt(len2)) return false;
  const double t = d.dot(p - a) / len2;
  return t >= -tol && t <= 1.0 + tol;
}

}  // namespace

std::string label_name(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::Inlet: return "INLET";
    case BoundaryLabel::Wall: return "WALL";
    case BoundaryLabel::Outlet: return "OUTLET";
    case BoundaryLabel::Interface: return "INTERFACE";
  }
  return "?";
}

double ChannelGeometry::tolerance() const {
  return 1e-10 * std::max({length, width, bend_straight});
}

ChannelGeometry make_geometry(double length, double width, double bend_straight,
                              double outlet_length, double u_average) {
  if (!(length > 0) || !(width > 0) || !(bend_straight > 0) || !(outlet_length > 0))
    throw std::invalid_argument("make_geometry: dimensions must be positive");
  if (!(outlet_length > width))
    throw std::invalid_argument("make_geometry: outlet stub requires L_out > R");
  if (!(outlet_length <= length + width))
    throw std::invalid_argument("make_geometry: outlet stub extends past the inlet");
  if (!std::isfinite(u_average))
    throw std::invalid_argument("make_geometry: u_av must be finite");

  ChannelGeometry geom;
  geom.length = length;
  geom.width = width;
  geom.bend_straight = bend_straight;
  geom.outlet_length = outlet_length;
  geom.u_average = u_average;
  geom.epsilon = width / length;
  geom.boundary = full_domain_polygon(geom);
  return geom;
}

double poiseuille_profile(const ChannelGeometry& geom, double y) {
  return 6.0 * geom.u_average / (geom.width * geom.width) * y * (geom.width - y);
}

double poiseuille_slope(const ChannelGeometry& geom, double y) {
  return 6.0 * geom.u_average / (geom.width * geom.width) * (geom.width - 2.0 * y);
}

double source_term(const ChannelGeometry& geom) {
  return 12.0 * geom.u_average / (geom.width * geom.width);
}

double dirichlet_value(const ChannelGeometry& geom, const Vec2& point, BoundaryLabel label) {
  const auto& poly = geom.boundary;
  const double tol = geom.tolerance();
  const std::size_t n = poly.vertices.size();
  bool found = false;
  for (std::size_t i = 0; i < n && !found; ++i) {
    if (poly.labels[i] != label) continue;
    found = on_segment(point, poly.vertices[i], poly.vertices[(i + 1) % n], tol);
  }
  if (!found)
    throw std::invalid_argument("dirichlet_value: point is not on a " + label_name(label) +
                                " edge");
  switch (label) {
    case BoundaryLabel::Inlet: return poiseuille_profile(geom, point.y());
    case BoundaryLabel::Wall: return 0.0;
    case BoundaryLabel::Outlet:
      return poiseuille_profile(geom, point.y() + geom.bend_straight + geom.width);
    case BoundaryLabel::Interface: return poiseuille_profile(geom, point.y());
  }
  return 0.0;
}

InterfaceConfig make_interface(const ChannelGeometry& geom, double x_gamma) {
  if (!(x_gamma > 0.0) || !(x_gamma < geom.length))
    throw std::invalid_argument("make_interface: x_gamma must lie in (0, L)");
  return InterfaceConfig{x_gamma};
}

bool in_reduced_part(const ChannelGeometry& geom, const InterfaceConfig& iface,
                     const Vec2& point) {
  const double tol = geom.tolerance();
  return point.x() >= -tol && point.x() <= iface.x_gamma + tol && point.y() >= -tol &&
         point.y() <= geom.width + tol;
}

ClosedFormSolution zero_d_solution(const ChannelGeometry& geom, const InterfaceConfig& iface,
                                   const Vec2& point) {
  if (!in_reduced_part(geom, iface, point))
    throw std::invalid_argument("zero_d_solution: point outside the closed-form subdomain");
  return {poiseuille_profile(geom, point.y()), Vec2(0.0, poiseuille_slope(geom, point.y()))};
}

double psi_gamma_continuous(const ChannelGeometry& geom, const InterfaceConfig& iface,
                            const Vec2& point) {
  const double x = point.x(), y = point.y();
  if (y < 0.0 || y > geom.width) return 0.0;
  if (x < iface.x_gamma) return 1.0;
  if (x > iface.x_gamma + geom.width) return 0.0;
  return (iface.x_gamma + geom.width - x) / geom.width;
}

LabeledPolygon full_domain_polygon(const ChannelGeometry& geom) {
  const double L = geom.length, R = geom.width, W = geom.bend_straight;
  const double x_stub = L + R - geom.outlet_length;
  LabeledPolygon poly;
  poly.vertices = {{0.0, 0.0},       {L, 0.0},          {L, -W},
                   {x_stub, -W},     {x_stub, -W - R},  {L + R, -W - R},
                   {L + R, -W},      {L + R, R},        {0.0, R}};
  poly.labels.assign(poly.vertices.size(), BoundaryLabel::Wall);
  poly.labels[5] = BoundaryLabel::Outlet;  // (L+R,-W-R) -> (L+R,-W)
  poly.labels[8] = BoundaryLabel::Inlet;   // (0,R) -> (0,0)
  return poly;
}

LabeledPolygon reduced_domain_polygon(const ChannelGeometry& geom,
                                      const InterfaceConfig& iface) {
  const double L = geom.length, R = geom.width, W = geom.bend_straight;
  const double x_stub = L + R - geom.outlet_length;
  const double xg = iface.x_gamma;
  LabeledPolygon poly;
  poly.vertices = {{xg, 0.0},        {L, 0.0},          {L, -W},
                   {x_stub, -W},     {x_stub, -W - R},  {L + R, -W - R},
                   {L + R, -W},      {L + R, R},        {xg, R}};
  poly.labels.assign(poly.vertices.size(), BoundaryLabel::Wall);
  poly.labels[5] = BoundaryLabel::Outlet;
  poly.labels[8] = BoundaryLabel::Interface;  // (x_gamma,R) -> (x_gamma,0)
  return poly;
}

}  // namespace serpentine
