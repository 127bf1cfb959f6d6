#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fracwave {

using Index = std::int32_t;

struct Point2 {
    double x1 = 0.0;
    double x2 = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

enum class BoundaryTag { DirichletTop, DirichletBottom, Neumann };

[[nodiscard]] std::string_view to_string(BoundaryTag tag);

struct BoundaryEdge {
    std::array<Index, 2> nodes{};
    BoundaryTag tag = BoundaryTag::Neumann;

    friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

/// Tag rule for the rectangle (-1/2,1/2)x(-1,1): an edge is Dirichlet iff both
/// endpoints lie on x2 = +1 (top) or x2 = -1 (bottom).
[[nodiscard]] BoundaryTag classify_boundary_edge(const Point2& a, const Point2& b);

/// Conforming P1 triangulation with tagged boundary edges.
///
/// Immutable after construction. Triangles are stored counterclockwise; the
/// constructor rejects out-of-range indices and non-positive signed areas.
class TriMesh {
public:
    TriMesh(std::vector<Point2> nodes,
            std::vector<std::array<Index, 3>> triangles,
            std::vector<BoundaryEdge> boundary);

    [[nodiscard]] std::size_t num_nodes() const { return nodes_.size(); }
    [[nodiscard]] std::size_t num_triangles() const { return triangles_.size(); }

    [[nodiscard]] const Point2& node(std::size_t i) const { return nodes_[i]; }
    [[nodiscard]] const std::array<Index, 3>& triangle(std::size_t e) const { return triangles_[e]; }
    [[nodiscard]] double area(std::size_t e) const { return areas_[e]; }

    [[nodiscard]] const std::vector<Point2>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<std::array<Index, 3>>& triangles() const { return triangles_; }
    [[nodiscard]] const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
    [[nodiscard]] const std::vector<double>& areas() const { return areas_; }

    [[nodiscard]] double total_area() const;

    /// Sorted, unique node indices touched by DirichletTop/DirichletBottom edges.
    [[nodiscard]] std::vector<Index> dirichlet_nodes() const;

    /// Outward unit normal of a boundary edge (the edge belongs to one triangle).
    [[nodiscard]] Point2 outward_normal(const BoundaryEdge& edge) const;

    friend bool operator==(const TriMesh& a, const TriMesh& b)
    {
        return a.nodes_ == b.nodes_ && a.triangles_ == b.triangles_ && a.boundary_ == b.boundary_;
    }

private:
    std::vector<Point2> nodes_;
    std::vector<std::array<Index, 3>> triangles_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<double> areas_;
};

[[nodiscard]] double signed_area(const Point2& a, const Point2& b, const Point2& c);

/// Checks the edge-incidence invariants: every tagged boundary edge is used by
/// exactly one triangle, every other edge by two, every edge used once is
/// tagged, and tags follow classify_boundary_edge. Returns a list of
/// violations (empty when consistent).
[[nodiscard]] std::vector<std::string> check_topology(const TriMesh& mesh);

/// Cell split direction of the structured mesh.
enum class Diagonal {
    Anti,  ///< (i+1,j)-(i,j+1): parallel to a crack at theta = pi/4
    Main,  ///< (i,j)-(i+1,j+1)
};

/// Structured (nx+1)x(ny+1) grid on [-1/2,1/2]x[-1,1]; every cell is cut along
/// the same diagonal, so all triangles are right triangles.
[[nodiscard]] TriMesh generate_rect_mesh(int nx, int ny, Diagonal diagonal = Diagonal::Anti);

class MeshFormatError : public std::runtime_error {
public:
    MeshFormatError(std::size_t line, const std::string& what);
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Text format "trimesh 2d v1"; see README for the layout.
void write_mesh(const TriMesh& mesh, std::ostream& sink);
[[nodiscard]] TriMesh read_mesh(std::istream& source);

}  // namespace fracwave
