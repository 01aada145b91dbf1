#include "v2v/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "v2v/common.hpp"

namespace v2v {

namespace {

// point in the rectangle's local frame
Vec2 to_local(const Rect& r, Vec2 p) {
    const Vec2 d = p - r.center;
    const double c = std::cos(r.heading), s = std::sin(r.heading);
    return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return norm(p - a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

}  // namespace

bool Rect::contains(Vec2 p) const {
    const Vec2 q = to_local(*this, p);
    return std::abs(q.x) <= length / 2.0 && std::abs(q.y) <= width / 2.0;
}

const char* to_string(LinkClass c) {
    switch (c) {
        case LinkClass::LOS: return "LOS";
        case LinkClass::OLOS: return "OLOS";
        case LinkClass::NLOS: return "NLOS";
        case LinkClass::NLOS_PARALLEL: return "NLOS_PARALLEL";
    }
    return "?";
}

bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r) {
    if (r.length <= 0.0 || r.width <= 0.0)
        throw std::domain_error("segment_intersects_rect: degenerate rectangle");
    if (a.x == b.x && a.y == b.y)
        throw std::invalid_argument("segment_intersects_rect: zero-length segment");

    // Liang-Barsky clip of the segment against the axis-aligned box in the
    // rectangle's local frame.
    const Vec2 p0 = to_local(r, a);
    const Vec2 p1 = to_local(r, b);
    const double hx = r.length / 2.0, hy = r.width / 2.0;
    const double d[2] = {p1.x - p0.x, p1.y - p0.y};
    const double lo[2] = {-hx, -hy}, hi[2] = {hx, hy};
    const double s[2] = {p0.x, p0.y};

    double t0 = 0.0, t1 = 1.0;
    for (int i = 0; i < 2; ++i) {
        if (d[i] == 0.0) {
            if (s[i] < lo[i] || s[i] > hi[i]) return false;
        } else {
            double ta = (lo[i] - s[i]) / d[i];
            double tb = (hi[i] - s[i]) / d[i];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
    }
    // open segment: contact confined to an endpoint does not count;
    // tangency along an edge interior does
    return t1 > 0.0 && t0 < 1.0;
}

std::optional<Vec2> segment_intersection(Vec2 a1, Vec2 a2, Vec2 b1, Vec2 b2) {
    const Vec2 r = a2 - a1, s = b2 - b1;
    const double denom = cross(r, s);
    if (std::abs(denom) < 1e-12) return std::nullopt;  // parallel (collinear overlap ignored)
    const double t = cross(b1 - a1, s) / denom;
    const double u = cross(b1 - a1, r) / denom;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return a1 + t * r;
}

std::optional<std::size_t> road_of(Vec2 p, std::span<const Road> roads) {
    std::optional<std::size_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < roads.size(); ++i) {
        const double d = point_segment_distance(p, roads[i].a, roads[i].b);
        if (d <= roads[i].width / 2.0 + 1e-9 && d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return best;
}

bool fresnel_clearance(Vec2 tx, double h_tx, Vec2 rx, double h_rx, const Rect& obstacle,
                       double lambda_m) {
    if (!obstacle.height.has_value())
        throw config_error("fresnel_clearance: obstacle height missing");
    if (lambda_m <= 0.0) throw std::invalid_argument("fresnel_clearance: lambda must be > 0");
    const double h_obs = *obstacle.height;
    if (h_obs <= 0.0) return true;

    const Vec2 path = rx - tx;
    const double len = norm(path);
    if (len == 0.0) throw std::invalid_argument("fresnel_clearance: coincident antennas");
    const double t = std::clamp(dot(obstacle.center - tx, path) / (len * len), 0.0, 1.0);
    const double d1 = t * len, d2 = len - d1;
    if (d1 <= 0.0 || d2 <= 0.0) return true;  // obstacle beyond an endpoint
    const double r1 = std::sqrt(lambda_m * d1 * d2 / (d1 + d2));
    const double ray_z = h_tx + t * (h_rx - h_tx);
    return h_obs <= ray_z - r1;
}

ClassifyResult classify_link(Vec2 tx_antenna, Vec2 rx_antenna, std::span<const Rect> obstacles,
                             std::span<const Road> roads, const FresnelOptions& fresnel) {
    bool vehicle_hit = false;
    bool building_hit = false;
    for (const Rect& r : obstacles) {
        if (!segment_intersects_rect(tx_antenna, rx_antenna, r)) continue;
        if (r.kind == RectKind::BUILDING)
            building_hit = true;
        else
            vehicle_hit = true;
        if (building_hit) break;  // building dominates
    }

    ClassifyResult res;
    if (building_hit) {
        // street topology decides NLOS vs NLOS_PARALLEL
        const auto tx_road = road_of(tx_antenna, roads);
        const auto rx_road = road_of(rx_antenna, roads);
        res.link_class = LinkClass::NLOS;
        if (tx_road && rx_road && *tx_road != *rx_road) {
            const Road& rt = roads[*tx_road];
            const Road& rr = roads[*rx_road];
            const auto center = segment_intersection(rt.a, rt.b, rr.a, rr.b);
            if (center) {
                NlosGeometry g;
                g.dr_m = norm(rx_antenna - *center);
                g.dt_m = norm(tx_antenna - *center);
                g.wr_m = rr.width;
                // TX distance to its street wall: half width minus the
                // lateral offset from the centerline, floored at 0.1 m
                const double lat = point_segment_distance(tx_antenna, rt.a, rt.b);
                g.xt_m = std::max(rt.width / 2.0 - lat, 0.1);
                res.nlos_geometry = g;
            } else {
                const Vec2 dt = rt.b - rt.a, dr = rr.b - rr.a;
                const double sin_angle = std::abs(cross(dt, dr)) / (norm(dt) * norm(dr));
                if (sin_angle < 1e-6) res.link_class = LinkClass::NLOS_PARALLEL;
            }
        }
        return res;
    }
    if (vehicle_hit) {
        res.link_class = LinkClass::OLOS;
        return res;
    }
    res.link_class = LinkClass::LOS;
    if (fresnel.enabled) {
        for (const Rect& r : obstacles) {
            // a rectangle near the path but not crossing it cannot block
            // the 2-D segment, yet may still pierce the Fresnel ellipsoid;
            // restrict the check to obstacles within one length of the path
            const double d = point_segment_distance(r.center, tx_antenna, rx_antenna);
            if (d > std::max(r.length, r.width)) continue;
            if (!fresnel_clearance(tx_antenna, fresnel.antenna_height_m, rx_antenna,
                                   fresnel.antenna_height_m, r, fresnel.lambda_m)) {
                res.link_class = LinkClass::OLOS;
                break;
            }
        }
    }
    return res;
}

}  // namespace v2v
