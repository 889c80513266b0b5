#include "qsdlab/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qsdlab {

namespace {

double cross2(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

void validate_domain(const Domain& domain) {
    if (const Disk* d = std::get_if<Disk>(&domain)) {
        if (!(d->radius > 0.0)) throw std::invalid_argument("domain: disk radius must be > 0");
        return;
    }
    const ConvexPolygon& p = std::get<ConvexPolygon>(domain);
    const size_t m = p.vertices.size();
    if (m < 3) throw std::invalid_argument("domain: polygon needs at least 3 vertices");
    for (size_t i = 0; i < m; ++i) {
        const Point& a = p.vertices[i];
        const Point& b = p.vertices[(i + 1) % m];
        const Point& c = p.vertices[(i + 2) % m];
        if (!(cross2(b - a, c - b) > 0.0))
            throw std::invalid_argument("domain: polygon must be strictly convex, counter-clockwise");
    }
}

bool domain_contains(const Domain& domain, const Point& x) {
    if (const Disk* d = std::get_if<Disk>(&domain)) return (x - d->center).norm() < d->radius;
    const ConvexPolygon& p = std::get<ConvexPolygon>(domain);
    const size_t m = p.vertices.size();
    for (size_t i = 0; i < m; ++i) {
        const Point& a = p.vertices[i];
        const Point& b = p.vertices[(i + 1) % m];
        if (!(cross2(b - a, x - a) > 0.0)) return false;
    }
    return true;
}

double domain_diameter(const Domain& domain) {
    if (const Disk* d = std::get_if<Disk>(&domain)) return 2.0 * d->radius;
    const ConvexPolygon& p = std::get<ConvexPolygon>(domain);
    double best = 0.0;
    for (size_t i = 0; i < p.vertices.size(); ++i)
        for (size_t j = i + 1; j < p.vertices.size(); ++j)
            best = std::max(best, (p.vertices[i] - p.vertices[j]).norm());
    return best;
}

double distance_to_boundary(const Domain& domain, const Point& x) {
    if (const Disk* d = std::get_if<Disk>(&domain)) return d->radius - (x - d->center).norm();
    const ConvexPolygon& p = std::get<ConvexPolygon>(domain);
    double best = std::numeric_limits<double>::infinity();
    const size_t m = p.vertices.size();
    for (size_t i = 0; i < m; ++i) {
        const Point& a = p.vertices[i];
        const Point& b = p.vertices[(i + 1) % m];
        Point e = b - a;
        double len = e.norm();
        // distance to the supporting line; valid inside a convex polygon
        best = std::min(best, cross2(e, x - a) / len);
    }
    return best;
}

double exit_time(const Domain& domain, const Point& x, const Point& u) {
    if (!domain_contains(domain, x)) throw std::invalid_argument("exit_time: x must lie inside the domain");
    if (std::abs(u.norm() - 1.0) > 1e-9) throw std::invalid_argument("exit_time: u must be a unit vector");
    if (const Disk* d = std::get_if<Disk>(&domain)) {
        Point r = x - d->center;
        double b = r.dot(u);
        double c = r.squaredNorm() - d->radius * d->radius;  // < 0 inside
        return -b + std::sqrt(std::max(b * b - c, 0.0));
    }
    const ConvexPolygon& p = std::get<ConvexPolygon>(domain);
    const size_t m = p.vertices.size();
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < m; ++i) {
        const Point& a = p.vertices[i];
        const Point& b = p.vertices[(i + 1) % m];
        Point e = b - a;
        // outward normal of a ccw edge
        Point nrm(e.y(), -e.x());
        double along = u.dot(nrm);
        if (along <= 0.0) continue;  // moving away from this edge
        double s = (a - x).dot(nrm) / along;
        if (s > 0.0) best = std::min(best, s);
    }
    return best;
}

}  // namespace qsdlab
