#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace serpentine {

using Vec2 = Eigen::Vector2d;

enum class BoundaryLabel : int { Inlet = 1, Wall = 2, Outlet = 3, Interface = 4 };

std::string label_name(BoundaryLabel label);

// A closed polygon (CCW, vertex i connects to vertex i+1 mod n) with one
// boundary label per edge.
struct LabeledPolygon {
  std::vector<Vec2> vertices;
  std::vector<BoundaryLabel> labels;
};

// Serpentine channel: a straight inlet channel of width R and length L, a
// U-bend of straight part W, and an outlet stub of length L_out.  The flow
// enters at x = 0 with a parabolic profile of average u_av and exits through
// a width-R opening on the right edge of the stub.
struct ChannelGeometry {
  double length = 0;          // L, straight channel length
  double width = 0;           // R, channel width
  double bend_straight = 0;   // W, straight part of the bend
  double outlet_length = 0;   // L_out, outlet stub length
  double u_average = 0;       // u_av, average inlet value
  double epsilon = 0;         // R / L, diagnostic only
  LabeledPolygon boundary;    // full domain outline with edge labels

  double tolerance() const;   // geometric tolerance for on-boundary tests
};

ChannelGeometry make_geometry(double length, double width, double bend_straight,
                              double outlet_length, double u_average);

// Cross-channel profile S(y) = 6 u_av / R^2 * y (R - y) and its derivative.
double poiseuille_profile(const ChannelGeometry& geom, double y);
double poiseuille_slope(const ChannelGeometry& geom, double y);

// Constant source 12 u_av / R^2.
double source_term(const ChannelGeometry& geom);

// Boundary datum at a point known to lie on an edge carrying the given label.
// Throws if the point does not lie on such an edge (within tolerance).
double dirichlet_value(const ChannelGeometry& geom, const Vec2& point, BoundaryLabel label);

// Interface at x = x_gamma splitting the domain into the closed-form part
// (0, x_gamma) x (0, R) and the meshed remainder.
struct InterfaceConfig {
  double x_gamma = 0;
};

InterfaceConfig make_interface(const ChannelGeometry& geom, double x_gamma);

bool in_reduced_part(const ChannelGeometry& geom, const InterfaceConfig& iface,
                     const Vec2& point);  // closure of (0,x_gamma)x(0,R)

struct ClosedFormSolution {
  double value;
  Vec2 gradient;
};

// u' = S(y) with gradient (0, S'(y)); only defined on the closed-form part.
ClosedFormSolution zero_d_solution(const ChannelGeometry& geom, const InterfaceConfig& iface,
                                   const Vec2& point);

// Interface blending function: 1 left of x_gamma inside the strip 0<=y<=R,
// linear ramp down to 0 over [x_gamma, x_gamma+R], 0 everywhere else.
double psi_gamma_continuous(const ChannelGeometry& geom, const InterfaceConfig& iface,
                            const Vec2& point);

// Outline of the full domain (labels Inlet/Wall/Outlet).
LabeledPolygon full_domain_polygon(const ChannelGeometry& geom);

// Outline of the meshed subdomain right of the interface (labels
// Wall/Outlet/Interface; the interface edge is the segment {x_gamma} x (0,R)).
LabeledPolygon reduced_domain_polygon(const ChannelGeometry& geom,
                                      const InterfaceConfig& iface);

}  // namespace serpentine
