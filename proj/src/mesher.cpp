#include "meshph/mesher.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "meshph/errors.hpp"
#include "meshph/rng.hpp"

namespace meshph {

namespace {

constexpr double kAbsWeightFloor = 1e-8;

// nearest-rank lower quantile of an ascending-sorted vector
double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const auto idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
    return sorted[idx];
}

struct TriangleRef {
    std::array<int, 3> nodes;               // base node indices, CCW
    std::array<std::array<double, 2>, 3> xy; // unwrapped coordinates
};

double signed_area(const TriangleRef& t) {
    const auto& a = t.xy[0];
    const auto& b = t.xy[1];
    const auto& c = t.xy[2];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

double cotangent_at(const TriangleRef& t, int corner) {
    const auto& p = t.xy[static_cast<std::size_t>(corner)];
    const auto& q = t.xy[static_cast<std::size_t>((corner + 1) % 3)];
    const auto& r = t.xy[static_cast<std::size_t>((corner + 2) % 3)];
    const double ux = q[0] - p[0], uy = q[1] - p[1];
    const double vx = r[0] - p[0], vy = r[1] - p[1];
    const double cross = ux * vy - uy * vx;
    const double dot = ux * vx + uy * vy;
    return dot / cross;
}

struct Triangulation {
    int n_nodes = 0;
    std::vector<std::array<double, 2>> positions;
    double box_length = 1.0;
    std::vector<TriangleRef> triangles;
    bool periodic = true;
    std::string id;
};

MeshGeometry finish_triangulation(Triangulation tri) {
    const double box = tri.box_length;
    for (TriangleRef& t : tri.triangles) {
        if (signed_area(t) < 0.0) {
            std::swap(t.nodes[1], t.nodes[2]);
            std::swap(t.xy[1], t.xy[2]);
        }
        if (signed_area(t) < 1e-14 * box * box)
            throw DegenerateTriangle("triangle area below degeneracy threshold");
    }

    // undirected edges keyed by (lo, hi); final order is lexicographic
    std::map<std::pair<int, int>, int> edge_index;
    for (const TriangleRef& t : tri.triangles) {
        for (int s = 0; s < 3; ++s) {
            int a = t.nodes[static_cast<std::size_t>(s)];
            int b = t.nodes[static_cast<std::size_t>((s + 1) % 3)];
            if (a == b) throw MeshingFailure("triangle with repeated vertex after identification");
            edge_index.emplace(std::minmax(a, b), 0);
        }
    }
    std::vector<std::pair<int, int>> edges;
    edges.reserve(edge_index.size());
    for (auto& [key, idx] : edge_index) {
        idx = static_cast<int>(edges.size());
        edges.push_back(key);
    }

    std::vector<std::vector<std::pair<int, int>>> faces;
    faces.reserve(tri.triangles.size());
    std::vector<int> edge_use(edges.size(), 0);
    for (const TriangleRef& t : tri.triangles) {
        std::vector<std::pair<int, int>> boundary;
        for (int s = 0; s < 3; ++s) {
            const int a = t.nodes[static_cast<std::size_t>(s)];
            const int b = t.nodes[static_cast<std::size_t>((s + 1) % 3)];
            const int e = edge_index.at(std::minmax(a, b));
            boundary.emplace_back(e, a < b ? +1 : -1);
            ++edge_use[static_cast<std::size_t>(e)];
        }
        faces.push_back(std::move(boundary));
    }
    if (tri.periodic) {
        for (int uses : edge_use)
            if (uses != 2) throw MeshingFailure("periodic identification left a dangling or duplicate edge");
    }

    MeshGeometry geom;
    geom.complex = build_complex(tri.n_nodes, edges, faces);
    geom.positions = std::move(tri.positions);
    geom.box_length = box;
    geom.periodic = tri.periodic;
    geom.id = std::move(tri.id);

    // raw cotangent weights and barycentric dual areas
    std::vector<double> w_raw(edges.size(), 0.0);
    std::vector<double> v0_raw(static_cast<std::size_t>(tri.n_nodes), 0.0);
    for (const TriangleRef& t : tri.triangles) {
        const double area = signed_area(t);
        for (int s = 0; s < 3; ++s) {
            v0_raw[static_cast<std::size_t>(t.nodes[static_cast<std::size_t>(s)])] += area / 3.0;
            // edge opposite corner s
            const int a = t.nodes[static_cast<std::size_t>((s + 1) % 3)];
            const int b = t.nodes[static_cast<std::size_t>((s + 2) % 3)];
            const int e = edge_index.at(std::minmax(a, b));
            w_raw[static_cast<std::size_t>(e)] += 0.5 * cotangent_at(t, s);
        }
    }

    std::vector<double> positive;
    for (double w : w_raw)
        if (w > 0.0) positive.push_back(w);
    std::sort(positive.begin(), positive.end());
    const double w_floor = std::max(quantile_sorted(positive, 0.01), kAbsWeightFloor);
    geom.v1_inv.resize(w_raw.size());
    for (std::size_t e = 0; e < w_raw.size(); ++e)
        geom.v1_inv[e] = std::max(w_raw[e], w_floor);

    // floor dual areas at the 1% quantile, then rescale so the total area is
    // preserved exactly (partition of the box for periodic meshes)
    const double total_raw = [&] {
        double s = 0.0;
        for (double v : v0_raw) s += v;
        return s;
    }();
    std::vector<double> v0_sorted = v0_raw;
    std::sort(v0_sorted.begin(), v0_sorted.end());
    const double v0_floor = std::max(quantile_sorted(v0_sorted, 0.01), 0.0);
    geom.v0 = v0_raw;
    double total_floored = 0.0;
    for (double& v : geom.v0) {
        v = std::max(v, v0_floor);
        total_floored += v;
    }
    if (total_floored > 0.0) {
        const double rescale = total_raw / total_floored;
        for (double& v : geom.v0) v *= rescale;
    }

    geom.node_features.resize(static_cast<std::size_t>(tri.n_nodes));
    for (int i = 0; i < tri.n_nodes; ++i)
        geom.node_features[static_cast<std::size_t>(i)] = {geom.positions[static_cast<std::size_t>(i)][0],
                                                           geom.positions[static_cast<std::size_t>(i)][1],
                                                           geom.v0[static_cast<std::size_t>(i)]};
    geom.edge_features.resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [tail, head] = edges[e];
        std::array<double, 2> d = {geom.positions[static_cast<std::size_t>(head)][0] -
                                       geom.positions[static_cast<std::size_t>(tail)][0],
                                   geom.positions[static_cast<std::size_t>(head)][1] -
                                       geom.positions[static_cast<std::size_t>(tail)][1]};
        if (geom.periodic) d = minimum_image(d, box);
        geom.edge_features[e] = {d[0], d[1], std::hypot(d[0], d[1])};
    }
    return geom;
}

// ---------------------------------------------------------------------------
// Bowyer-Watson incremental Delaunay (plane, not periodic)

struct BwTriangle {
    int a, b, c;     // CCW
    bool alive = true;
};

double orient2d(const std::array<double, 2>& a, const std::array<double, 2>& b,
                const std::array<double, 2>& c) {
    return (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
}

bool in_circumcircle(const std::array<double, 2>& a, const std::array<double, 2>& b,
                     const std::array<double, 2>& c, const std::array<double, 2>& p) {
    const long double adx = a[0] - p[0], ady = a[1] - p[1];
    const long double bdx = b[0] - p[0], bdy = b[1] - p[1];
    const long double cdx = c[0] - p[0], cdy = c[1] - p[1];
    const long double ad = adx * adx + ady * ady;
    const long double bd = bdx * bdx + bdy * bdy;
    const long double cd = cdx * cdx + cdy * cdy;
    const long double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                            ad * (bdx * cdy - bdy * cdx);
    return det > 0.0L;
}

std::vector<BwTriangle> bowyer_watson(const std::vector<std::array<double, 2>>& pts,
                                      double extent) {
    std::vector<std::array<double, 2>> work = pts;
    const int n = static_cast<int>(pts.size());
    // super triangle comfortably containing [-extent, 2*extent]^2
    const double m = 40.0 * extent;
    work.push_back({-m, -m});
    work.push_back({3.0 * m, -m});
    work.push_back({-m, 3.0 * m});
    std::vector<BwTriangle> tris;
    tris.push_back({n, n + 1, n + 2});

    std::vector<int> bad;
    std::map<std::pair<int, int>, int> boundary_count; // undirected side -> count
    std::map<std::pair<int, int>, std::pair<int, int>> directed;
    for (int p = 0; p < n; ++p) {
        bad.clear();
        boundary_count.clear();
        directed.clear();
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (!tris[t].alive) continue;
            if (in_circumcircle(work[static_cast<std::size_t>(tris[t].a)],
                                work[static_cast<std::size_t>(tris[t].b)],
                                work[static_cast<std::size_t>(tris[t].c)],
                                work[static_cast<std::size_t>(p)]))
                bad.push_back(static_cast<int>(t));
        }
        for (int t : bad) {
            const BwTriangle& tr = tris[static_cast<std::size_t>(t)];
            const std::array<std::pair<int, int>, 3> sides = {
                std::make_pair(tr.a, tr.b), std::make_pair(tr.b, tr.c), std::make_pair(tr.c, tr.a)};
            for (const auto& s : sides) {
                const auto key = std::minmax(s.first, s.second);
                ++boundary_count[key];
                directed[key] = s;
            }
            tris[static_cast<std::size_t>(t)].alive = false;
        }
        for (const auto& [key, count] : boundary_count) {
            if (count != 1) continue;
            const auto [u, v] = directed.at(key);
            BwTriangle nt{u, v, p};
            if (orient2d(work[static_cast<std::size_t>(u)], work[static_cast<std::size_t>(v)],
                         work[static_cast<std::size_t>(p)]) < 0.0)
                std::swap(nt.b, nt.c);
            tris.push_back(nt);
        }
    }

    std::vector<BwTriangle> out;
    for (const BwTriangle& t : tris)
        if (t.alive && t.a < n && t.b < n && t.c < n) out.push_back(t);
    return out;
}

} // namespace

std::array<double, 2> minimum_image(std::array<double, 2> delta, double box_length) {
    for (double& d : delta) {
        d -= box_length * std::round(d / box_length);
    }
    return delta;
}

double WaveNumber::magnitude() const { return std::hypot(kx, ky); }

WaveNumber make_wavenumber(int kx_int, int ky_int, double box_length) {
    if (kx_int == 0 && ky_int == 0) throw Error("wavenumber: zero mode not allowed");
    const double unit = 2.0 * std::numbers::pi / box_length;
    return WaveNumber{unit * kx_int, unit * ky_int};
}

MeshGeometry periodic_grid(int nx, int ny, double box_length) {
    if (nx < 2 || ny < 2) throw BadDimension("periodic_grid: need nx, ny >= 2");
    if (!(box_length > 0.0)) throw BadDimension("periodic_grid: box length must be positive");
    const double hx = box_length / nx;
    const double hy = box_length / ny;
    const int n0 = nx * ny;
    auto node = [&](int ix, int iy) { return ((iy % ny + ny) % ny) * nx + ((ix % nx + nx) % nx); };

    std::vector<std::array<double, 2>> pos(static_cast<std::size_t>(n0));
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            pos[static_cast<std::size_t>(node(ix, iy))] = {ix * hx, iy * hy};

    // edges 2n (+x) and 2n+1 (+y) for node n
    std::vector<std::pair<int, int>> edges(static_cast<std::size_t>(2 * n0));
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const int n = node(ix, iy);
            edges[static_cast<std::size_t>(2 * n)] = {n, node(ix + 1, iy)};
            edges[static_cast<std::size_t>(2 * n + 1)] = {n, node(ix, iy + 1)};
        }

    // counterclockwise quad with lower-left corner at n
    std::vector<std::vector<std::pair<int, int>>> faces(static_cast<std::size_t>(n0));
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const int n = node(ix, iy);
            faces[static_cast<std::size_t>(n)] = {{2 * n, +1},
                                                  {2 * node(ix + 1, iy) + 1, +1},
                                                  {2 * node(ix, iy + 1), -1},
                                                  {2 * n + 1, -1}};
        }

    MeshGeometry geom;
    geom.complex = build_complex(n0, edges, faces);
    geom.positions = std::move(pos);
    geom.box_length = box_length;
    geom.periodic = true;
    geom.v0.assign(static_cast<std::size_t>(n0), hx * hy);
    geom.v1_inv.assign(static_cast<std::size_t>(2 * n0), 1.0);
    std::ostringstream oss;
    oss << "grid:" << nx << "," << ny;
    geom.id = oss.str();

    geom.node_features.resize(static_cast<std::size_t>(n0));
    for (int i = 0; i < n0; ++i)
        geom.node_features[static_cast<std::size_t>(i)] = {geom.positions[static_cast<std::size_t>(i)][0],
                                                           geom.positions[static_cast<std::size_t>(i)][1],
                                                           geom.v0[static_cast<std::size_t>(i)]};
    geom.edge_features.resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [tail, head] = edges[e];
        std::array<double, 2> d = {geom.positions[static_cast<std::size_t>(head)][0] -
                                       geom.positions[static_cast<std::size_t>(tail)][0],
                                   geom.positions[static_cast<std::size_t>(head)][1] -
                                       geom.positions[static_cast<std::size_t>(tail)][1]};
        d = minimum_image(d, box_length);
        geom.edge_features[e] = {d[0], d[1], std::hypot(d[0], d[1])};
    }
    return geom;
}

MeshGeometry triangle_patch(std::vector<std::array<double, 2>> positions,
                            const std::vector<std::array<int, 3>>& triangles, double box_length) {
    Triangulation tri;
    tri.n_nodes = static_cast<int>(positions.size());
    tri.positions = std::move(positions);
    tri.box_length = box_length;
    tri.periodic = false;
    tri.id = "patch";
    for (const auto& t : triangles) {
        TriangleRef ref;
        ref.nodes = {t[0], t[1], t[2]};
        for (int s = 0; s < 3; ++s)
            ref.xy[static_cast<std::size_t>(s)] =
                tri.positions[static_cast<std::size_t>(t[static_cast<std::size_t>(s)])];
        tri.triangles.push_back(ref);
    }
    return finish_triangulation(std::move(tri));
}

MeshGeometry triangulated_grid(int nx, int ny, double box_length) {
    if (nx < 3 || ny < 3) throw BadDimension("triangulated_grid: need nx, ny >= 3");
    if (!(box_length > 0.0)) throw BadDimension("triangulated_grid: box length must be positive");
    const double hx = box_length / nx;
    const double hy = box_length / ny;
    auto node = [&](int ix, int iy) { return ((iy % ny + ny) % ny) * nx + ((ix % nx + nx) % nx); };

    Triangulation tri;
    tri.n_nodes = nx * ny;
    tri.box_length = box_length;
    tri.periodic = true;
    tri.positions.resize(static_cast<std::size_t>(tri.n_nodes));
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            tri.positions[static_cast<std::size_t>(node(ix, iy))] = {ix * hx, iy * hy};

    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double x = ix * hx, y = iy * hy;
            const std::array<double, 2> p00 = {x, y};
            const std::array<double, 2> p10 = {x + hx, y};
            const std::array<double, 2> p11 = {x + hx, y + hy};
            const std::array<double, 2> p01 = {x, y + hy};
            tri.triangles.push_back(
                {{node(ix, iy), node(ix + 1, iy), node(ix + 1, iy + 1)}, {p00, p10, p11}});
            tri.triangles.push_back(
                {{node(ix, iy), node(ix + 1, iy + 1), node(ix, iy + 1)}, {p00, p11, p01}});
        }
    std::ostringstream oss;
    oss << "tri:" << nx << "," << ny;
    tri.id = oss.str();
    return finish_triangulation(std::move(tri));
}

MeshGeometry periodic_delaunay(int n_points, double box_length, std::uint64_t seed) {
    if (n_points < 8) throw BadDimension("periodic_delaunay: need at least 8 points");
    if (!(box_length > 0.0)) throw BadDimension("periodic_delaunay: box length must be positive");
    const double box = box_length;

    Rng rng(seed);
    std::vector<std::array<double, 2>> base(static_cast<std::size_t>(n_points));
    for (auto& p : base) {
        p[0] = rng.uniform(0.0, box);
        p[1] = rng.uniform(0.0, box);
    }

    // 3x3 tiling; copy t of point i has id t*n + i
    std::vector<std::array<double, 2>> tiled;
    tiled.reserve(static_cast<std::size_t>(9 * n_points));
    for (int ty = -1; ty <= 1; ++ty)
        for (int tx = -1; tx <= 1; ++tx)
            for (const auto& p : base)
                tiled.push_back({p[0] + tx * box, p[1] + ty * box});

    const auto raw_tris = bowyer_watson(tiled, box);

    Triangulation tri;
    tri.n_nodes = n_points;
    tri.positions = base;
    tri.box_length = box;
    tri.periodic = true;
    for (const BwTriangle& t : raw_tris) {
        const auto& pa = tiled[static_cast<std::size_t>(t.a)];
        const auto& pb = tiled[static_cast<std::size_t>(t.b)];
        const auto& pc = tiled[static_cast<std::size_t>(t.c)];
        const double cx = (pa[0] + pb[0] + pc[0]) / 3.0;
        const double cy = (pa[1] + pb[1] + pc[1]) / 3.0;
        if (cx < 0.0 || cx >= box || cy < 0.0 || cy >= box) continue;
        tri.triangles.push_back({{t.a % n_points, t.b % n_points, t.c % n_points}, {pa, pb, pc}});
    }
    if (tri.triangles.empty()) throw MeshingFailure("periodic_delaunay: no central triangles kept");
    std::ostringstream oss;
    oss << "delaunay:" << n_points << "," << seed;
    tri.id = oss.str();

    MeshGeometry geom = finish_triangulation(std::move(tri));
    // torus Euler characteristic
    if (geom.n_nodes() - geom.n_edges() + geom.n_faces() != 0)
        throw MeshingFailure("periodic_delaunay: identification broke the torus topology");
    return geom;
}

std::vector<double> raw_cotangent_weights(const MeshGeometry& geom) {
    // Recompute from positions using minimum-image triangle unwrapping.
    const SignedIncidence& d1 = geom.d1();
    const SignedIncidence& d0 = geom.d0();
    std::vector<std::pair<int, int>> edge_nodes(static_cast<std::size_t>(geom.n_edges()), {-1, -1});
    for (const auto& e : d0.entries()) {
        if (e.sign < 0)
            edge_nodes[static_cast<std::size_t>(e.row)].first = e.col;
        else
            edge_nodes[static_cast<std::size_t>(e.row)].second = e.col;
    }
    std::vector<double> w(static_cast<std::size_t>(geom.n_edges()), 0.0);
    for (int f = 0; f < geom.n_faces(); ++f) {
        // gather the three vertices of this face
        std::vector<int> face_edges;
        for (const auto& e : d1.entries())
            if (e.row == f) face_edges.push_back(e.col);
        if (face_edges.size() != 3) throw Error("raw_cotangent_weights: non-triangle face");
        std::vector<int> verts;
        for (int e : face_edges) {
            for (int v : {edge_nodes[static_cast<std::size_t>(e)].first,
                          edge_nodes[static_cast<std::size_t>(e)].second})
                if (std::find(verts.begin(), verts.end(), v) == verts.end()) verts.push_back(v);
        }
        if (verts.size() != 3) throw Error("raw_cotangent_weights: face is not a triangle");
        // unwrap relative to the first vertex
        std::array<std::array<double, 2>, 3> xy;
        xy[0] = geom.positions[static_cast<std::size_t>(verts[0])];
        for (int s = 1; s < 3; ++s) {
            std::array<double, 2> d = {
                geom.positions[static_cast<std::size_t>(verts[static_cast<std::size_t>(s)])][0] - xy[0][0],
                geom.positions[static_cast<std::size_t>(verts[static_cast<std::size_t>(s)])][1] - xy[0][1]};
            if (geom.periodic) d = minimum_image(d, geom.box_length);
            xy[static_cast<std::size_t>(s)] = {xy[0][0] + d[0], xy[0][1] + d[1]};
        }
        TriangleRef ref{{verts[0], verts[1], verts[2]}, xy};
        if (signed_area(ref) < 0.0) {
            std::swap(ref.nodes[1], ref.nodes[2]);
            std::swap(ref.xy[1], ref.xy[2]);
        }
        for (int s = 0; s < 3; ++s) {
            const int a = ref.nodes[static_cast<std::size_t>((s + 1) % 3)];
            const int b = ref.nodes[static_cast<std::size_t>((s + 2) % 3)];
            for (int e : face_edges) {
                const auto [lo, hi] = std::minmax(a, b);
                if (edge_nodes[static_cast<std::size_t>(e)] == std::make_pair(lo, hi))
                    w[static_cast<std::size_t>(e)] += 0.5 * cotangent_at(ref, s);
            }
        }
    }
    return w;
}

std::string mesh_to_json(const MeshGeometry& geom) {
    nlohmann::json j;
    j["complex"] = nlohmann::json::parse(complex_to_json(geom.complex));
    j["positions"] = geom.positions;
    j["box_length"] = geom.box_length;
    j["V0"] = geom.v0;
    j["V1inv"] = geom.v1_inv;
    j["periodic"] = geom.periodic;
    j["id"] = geom.id;
    return j.dump();
}

MeshGeometry mesh_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MeshGeometry geom;
    geom.complex = complex_from_json(j.at("complex").dump());
    geom.positions = j.at("positions").get<std::vector<std::array<double, 2>>>();
    geom.box_length = j.at("box_length").get<double>();
    geom.v0 = j.at("V0").get<std::vector<double>>();
    geom.v1_inv = j.at("V1inv").get<std::vector<double>>();
    geom.periodic = j.at("periodic").get<bool>();
    geom.id = j.at("id").get<std::string>();

    geom.node_features.resize(geom.positions.size());
    for (std::size_t i = 0; i < geom.positions.size(); ++i)
        geom.node_features[i] = {geom.positions[i][0], geom.positions[i][1], geom.v0[i]};
    std::vector<std::pair<int, int>> edge_nodes(static_cast<std::size_t>(geom.n_edges()), {-1, -1});
    for (const auto& e : geom.d0().entries()) {
        if (e.sign < 0)
            edge_nodes[static_cast<std::size_t>(e.row)].first = e.col;
        else
            edge_nodes[static_cast<std::size_t>(e.row)].second = e.col;
    }
    geom.edge_features.resize(edge_nodes.size());
    for (std::size_t e = 0; e < edge_nodes.size(); ++e) {
        const auto [tail, head] = edge_nodes[e];
        std::array<double, 2> d = {geom.positions[static_cast<std::size_t>(head)][0] -
                                       geom.positions[static_cast<std::size_t>(tail)][0],
                                   geom.positions[static_cast<std::size_t>(head)][1] -
                                       geom.positions[static_cast<std::size_t>(tail)][1]};
        if (geom.periodic) d = minimum_image(d, geom.box_length);
        geom.edge_features[e] = {d[0], d[1], std::hypot(d[0], d[1])};
    }
    return geom;
}

MeshGeometry make_mesh(const std::string& spec, double box_length) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ConfigError("mesh spec must look like grid:NX,NY or delaunay:N,SEED");
    const std::string kind = spec.substr(0, colon);
    const std::string args = spec.substr(colon + 1);
    const auto comma = args.find(',');
    if (comma == std::string::npos) throw ConfigError("mesh spec needs two arguments: " + spec);
    long a = 0, b = 0;
    try {
        a = std::stol(args.substr(0, comma));
        b = std::stol(args.substr(comma + 1));
    } catch (const std::exception&) {
        throw ConfigError("mesh spec has non-numeric arguments: " + spec);
    }
    if (kind == "grid") return periodic_grid(static_cast<int>(a), static_cast<int>(b), box_length);
    if (kind == "tri") return triangulated_grid(static_cast<int>(a), static_cast<int>(b), box_length);
    if (kind == "delaunay")
        return periodic_delaunay(static_cast<int>(a), box_length, static_cast<std::uint64_t>(b));
    throw ConfigError("unknown mesh kind: " + kind);
}

} // namespace meshph
