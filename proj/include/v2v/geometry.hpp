#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "v2v/pathloss.hpp"

namespace v2v {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

enum class RectKind { VEHICLE, BUILDING };

// Oriented rectangle footprint of a vehicle or building.
struct Rect {
    Vec2 center;
    double length = 1.0;  // along heading
    double width = 1.0;
    double heading = 0.0;  // radians
    std::optional<double> height;
    RectKind kind = RectKind::VEHICLE;

    bool contains(Vec2 p) const;
};

enum class LinkClass { LOS, OLOS, NLOS, NLOS_PARALLEL };

const char* to_string(LinkClass c);

// Street declared as a centerline segment with a width.
struct Road {
    Vec2 a;
    Vec2 b;
    double width = 7.0;
};

// True iff the open segment (a,b) touches the closed rectangle (boundary
// or interior). Tangency counts as intersection.
bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r);

// Proper or touching intersection of closed segments.
std::optional<Vec2> segment_intersection(Vec2 a1, Vec2 a2, Vec2 b1, Vec2 b2);

// Index of the road whose corridor contains p (nearest centerline first).
std::optional<std::size_t> road_of(Vec2 p, std::span<const Road> roads);

struct FresnelOptions {
    bool enabled = false;
    double lambda_m = 0.0536;
    double antenna_height_m = 1.47;  // both ends, when the bodies carry none
};

struct ClassifyResult {
    LinkClass link_class = LinkClass::LOS;
    std::optional<NlosGeometry> nlos_geometry;  // filled for NLOS via an intersection
};

// Antenna-to-antenna segment test against all obstacle rectangles. The
// TX and RX own footprints must not be in `obstacles`. A vehicle hit
// gives OLOS, a building hit gives NLOS (streets intersect) or
// NLOS_PARALLEL (parallel streets).
ClassifyResult classify_link(Vec2 tx_antenna, Vec2 rx_antenna, std::span<const Rect> obstacles,
                             std::span<const Road> roads, const FresnelOptions& fresnel = {});

// First-Fresnel-zone clearance test: returns false (LOS lost) when the
// obstacle top penetrates r1 = sqrt(lambda*d1*d2/(d1+d2)) below the
// direct ray at the obstacle's along-path position.
bool fresnel_clearance(Vec2 tx, double h_tx, Vec2 rx, double h_rx, const Rect& obstacle,
                       double lambda_m);

}  // namespace v2v
