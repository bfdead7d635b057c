#ifndef MESHPH_MESHER_HPP
#define MESHPH_MESHER_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "meshph/complex.hpp"

namespace meshph {

/// Periodic 2D mesh with the geometric quantities needed to build Hodge
/// operators: node dual areas V0, per-edge weights V1inv, and raw node/edge
/// feature vectors. Immutable after construction.
struct MeshGeometry {
    CellComplex complex;                       // degrees 0..2
    std::vector<std::array<double, 2>> positions; // node (x, y) in [0, L)^2
    double box_length = 1.0;
    std::vector<double> v0;                    // per-node dual area, > 0
    std::vector<double> v1_inv;                // per-edge weight, > 0
    std::vector<std::array<double, 3>> node_features; // (x, y, V0)
    std::vector<std::array<double, 3>> edge_features; // (dx, dy, |e|), minimum image
    bool periodic = true;
    std::string id;                            // e.g. "grid:32,32" or "delaunay:256,7"

    int n_nodes() const { return complex.count(0); }
    int n_edges() const { return complex.count(1); }
    int n_faces() const { return complex.dimension() >= 2 ? complex.count(2) : 0; }
    const SignedIncidence& d0() const { return complex.incidence(0); }
    const SignedIncidence& d1() const { return complex.incidence(1); }
};

/// Integer-commensurate wavenumber k = (2 pi / L) * (kx, ky).
struct WaveNumber {
    double kx = 0.0;
    double ky = 0.0;
    double magnitude() const;
};

WaveNumber make_wavenumber(int kx_int, int ky_int, double box_length);

/// Axis-aligned periodic quad grid. Edges point in +x / +y; V1inv is fixed
/// to 1 on grids; V0 = (L/nx)(L/ny).
MeshGeometry periodic_grid(int nx, int ny, double box_length);

/// Periodic grid split into right triangles (diagonal per cell). Cotangent
/// weights and barycentric dual areas are computed as for any triangulation.
/// Needs nx, ny >= 3: smaller tori have multi-edges that endpoint
/// identification cannot represent.
MeshGeometry triangulated_grid(int nx, int ny, double box_length);

/// Non-periodic triangle patch from explicit coordinates; boundary edges are
/// allowed. Used by small geometric oracles.
MeshGeometry triangle_patch(std::vector<std::array<double, 2>> positions,
                            const std::vector<std::array<int, 3>>& triangles, double box_length);

/// Delaunay triangulation of uniform random points on the torus, built by
/// 3x3 tiling and boundary identification.
MeshGeometry periodic_delaunay(int n_points, double box_length, std::uint64_t seed);

/// Raw (unfloored) cotangent weights of a triangulated geometry; useful as a
/// test oracle. Entries can be zero or negative.
std::vector<double> raw_cotangent_weights(const MeshGeometry& geom);

std::string mesh_to_json(const MeshGeometry& geom);
MeshGeometry mesh_from_json(const std::string& text);

/// Parse "grid:NX,NY" / "tri:NX,NY" / "delaunay:N,SEED" into a mesh.
MeshGeometry make_mesh(const std::string& spec, double box_length);

/// Minimum-image displacement on the periodic box.
std::array<double, 2> minimum_image(std::array<double, 2> delta, double box_length);

} // namespace meshph

#endif
