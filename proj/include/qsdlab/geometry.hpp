#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

namespace qsdlab {

using Point = Eigen::Vector2d;

struct Disk {
    Point center{0.0, 0.0};
    double radius = 1.0;
};

/// Strictly convex polygon, vertices in counter-clockwise order.
struct ConvexPolygon {
    std::vector<Point> vertices;
};

using Domain = std::variant<Disk, ConvexPolygon>;

void validate_domain(const Domain& domain);
bool domain_contains(const Domain& domain, const Point& x);
double domain_diameter(const Domain& domain);
double distance_to_boundary(const Domain& domain, const Point& x);

/// Smallest s > 0 with x + s u on the boundary; x must lie inside and |u| = 1.
/// Closed-form quadratic for the disk, edge intersection for the polygon.
double exit_time(const Domain& domain, const Point& x, const Point& u);

}  // namespace qsdlab
