#include "fracwave/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

namespace fracwave {

namespace {

constexpr double kTagTolerance = 1e-12;

std::pair<Index, Index> sorted_pair(Index a, Index b)
{
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

std::string_view to_string(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::DirichletTop: return "DirichletTop";
    case BoundaryTag::DirichletBottom: return "DirichletBottom";
    case BoundaryTag::Neumann: return "Neumann";
    }
    return "Neumann";
}

BoundaryTag classify_boundary_edge(const Point2& a, const Point2& b)
{
    if (std::abs(a.x2 - 1.0) <= kTagTolerance && std::abs(b.x2 - 1.0) <= kTagTolerance) {
        return BoundaryTag::DirichletTop;
    }
    if (std::abs(a.x2 + 1.0) <= kTagTolerance && std::abs(b.x2 + 1.0) <= kTagTolerance) {
        return BoundaryTag::DirichletBottom;
    }
    return BoundaryTag::Neumann;
}

double signed_area(const Point2& a, const Point2& b, const Point2& c)
{
    return 0.5 * ((b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2));
}

TriMesh::TriMesh(std::vector<Point2> nodes,
                 std::vector<std::array<Index, 3>> triangles,
                 std::vector<BoundaryEdge> boundary)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), boundary_(std::move(boundary))
{
    const auto n = static_cast<Index>(nodes_.size());
    areas_.reserve(triangles_.size());
    for (std::size_t e = 0; e < triangles_.size(); ++e) {
        const auto& t = triangles_[e];
        for (Index v : t) {
            if (v < 0 || v >= n) {
                throw std::invalid_argument("triangle " + std::to_string(e) + ": node index out of range");
            }
        }
        const double a = signed_area(nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]);
        if (!(a > 0.0)) {
            throw std::invalid_argument("triangle " + std::to_string(e) + ": non-positive area");
        }
        areas_.push_back(a);
    }
    for (const auto& edge : boundary_) {
        for (Index v : edge.nodes) {
            if (v < 0 || v >= n) {
                throw std::invalid_argument("boundary edge: node index out of range");
            }
        }
    }
}

double TriMesh::total_area() const
{
    double sum = 0.0;
    for (double a : areas_) {
        sum += a;
    }
    return sum;
}

std::vector<Index> TriMesh::dirichlet_nodes() const
{
    std::vector<Index> out;
    for (const auto& edge : boundary_) {
        if (edge.tag != BoundaryTag::Neumann) {
            out.push_back(edge.nodes[0]);
            out.push_back(edge.nodes[1]);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Point2 TriMesh::outward_normal(const BoundaryEdge& edge) const
{
    const Point2& a = nodes_[edge.nodes[0]];
    const Point2& b = nodes_[edge.nodes[1]];
    const double dx = b.x1 - a.x1;
    const double dy = b.x2 - a.x2;
    const double len = std::hypot(dx, dy);
    Point2 normal{dy / len, -dx / len};

    // Orient away from the third vertex of the owning triangle.
    for (const auto& t : triangles_) {
        int hits = 0;
        Index other = -1;
        for (Index v : t) {
            if (v == edge.nodes[0] || v == edge.nodes[1]) {
                ++hits;
            } else {
                other = v;
            }
        }
        if (hits == 2) {
            const Point2& c = nodes_[other];
            const double side = (c.x1 - a.x1) * normal.x1 + (c.x2 - a.x2) * normal.x2;
            if (side > 0.0) {
                normal = {-normal.x1, -normal.x2};
            }
            break;
        }
    }
    return normal;
}

std::vector<std::string> check_topology(const TriMesh& mesh)
{
    std::vector<std::string> problems;
    std::map<std::pair<Index, Index>, int> use_count;
    for (const auto& t : mesh.triangles()) {
        for (int k = 0; k < 3; ++k) {
            ++use_count[sorted_pair(t[k], t[(k + 1) % 3])];
        }
    }

    std::map<std::pair<Index, Index>, BoundaryTag> tagged;
    for (const auto& edge : mesh.boundary_edges()) {
        const auto key = sorted_pair(edge.nodes[0], edge.nodes[1]);
        if (!tagged.emplace(key, edge.tag).second) {
            problems.push_back("duplicate boundary edge");
        }
        const auto it = use_count.find(key);
        if (it == use_count.end() || it->second != 1) {
            problems.push_back("boundary edge not owned by exactly one triangle");
        }
        const auto expected = classify_boundary_edge(mesh.node(edge.nodes[0]), mesh.node(edge.nodes[1]));
        if (expected != edge.tag) {
            problems.push_back("boundary edge has tag " + std::string(to_string(edge.tag)) + ", expected "
                               + std::string(to_string(expected)));
        }
    }
    for (const auto& [key, count] : use_count) {
        if (count > 2) {
            problems.push_back("edge shared by more than two triangles");
        } else if (count == 1 && !tagged.contains(key)) {
            problems.push_back("untagged boundary edge");
        } else if (count == 2 && tagged.contains(key)) {
            problems.push_back("interior edge tagged as boundary");
        }
    }
    return problems;
}

TriMesh generate_rect_mesh(int nx, int ny, Diagonal diagonal)
{
    if (nx < 1 || ny < 1) {
        throw std::invalid_argument("generate_rect_mesh: nx and ny must be positive");
    }
    const int px = nx + 1;
    auto id = [px](int i, int j) { return static_cast<Index>(j * px + i); };

    std::vector<Point2> nodes;
    nodes.reserve(static_cast<std::size_t>(px) * static_cast<std::size_t>(ny + 1));
    for (int j = 0; j <= ny; ++j) {
        // Exact endpoints so that the boundary tags hold without rounding slack.
        const double x2 = (j == ny) ? 1.0 : -1.0 + 2.0 * static_cast<double>(j) / ny;
        for (int i = 0; i <= nx; ++i) {
            const double x1 = (i == nx) ? 0.5 : -0.5 + static_cast<double>(i) / nx;
            nodes.push_back({x1, x2});
        }
    }

    std::vector<std::array<Index, 3>> triangles;
    triangles.reserve(2 * static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (diagonal == Diagonal::Main) {
                triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    }

    // Counterclockwise walk: bottom, right, top, left.
    std::vector<BoundaryEdge> boundary;
    boundary.reserve(2 * static_cast<std::size_t>(nx + ny));
    for (int i = 0; i < nx; ++i) {
        boundary.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::DirichletBottom});
    }
    for (int j = 0; j < ny; ++j) {
        boundary.push_back({{id(nx, j), id(nx, j + 1)}, BoundaryTag::Neumann});
    }
    for (int i = nx; i > 0; --i) {
        boundary.push_back({{id(i, ny), id(i - 1, ny)}, BoundaryTag::DirichletTop});
    }
    for (int j = ny; j > 0; --j) {
        boundary.push_back({{id(0, j), id(0, j - 1)}, BoundaryTag::Neumann});
    }
    return TriMesh(std::move(nodes), std::move(triangles), std::move(boundary));
}

MeshFormatError::MeshFormatError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
{
}

void write_mesh(const TriMesh& mesh, std::ostream& sink)
{
    const auto old_precision = sink.precision(17);
    sink << "trimesh 2d v1\n";
    sink << "nodes " << mesh.num_nodes() << '\n';
    for (const auto& p : mesh.nodes()) {
        sink << p.x1 << ' ' << p.x2 << '\n';
    }
    sink << "triangles " << mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles()) {
        sink << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    sink << "boundary " << mesh.boundary_edges().size() << '\n';
    for (const auto& e : mesh.boundary_edges()) {
        sink << e.nodes[0] << ' ' << e.nodes[1] << ' ' << to_string(e.tag) << '\n';
    }
    sink.precision(old_precision);
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-empty line; false at end of stream.
    bool next(std::string& out)
    {
        while (std::getline(in_, out)) {
            ++line_;
            if (out.find_first_not_of(" \t\r") != std::string::npos) {
                return true;
            }
        }
        return false;
    }

    std::string require(const char* what)
    {
        std::string s;
        if (!next(s)) {
            throw MeshFormatError(line_ + 1, std::string("unexpected end of stream, expected ") + what);
        }
        return s;
    }

    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

std::size_t read_count(LineReader& reader, const std::string& keyword)
{
    const std::string s = reader.require(keyword.c_str());
    std::istringstream ls(s);
    std::string word;
    long long count = -1;
    if (!(ls >> word >> count) || word != keyword || count < 0) {
        throw MeshFormatError(reader.line(), "expected '" + keyword + " <count>'");
    }
    return static_cast<std::size_t>(count);
}

BoundaryTag parse_tag(const std::string& word, std::size_t line)
{
    for (auto tag : {BoundaryTag::DirichletTop, BoundaryTag::DirichletBottom, BoundaryTag::Neumann}) {
        if (word == to_string(tag)) {
            return tag;
        }
    }
    throw MeshFormatError(line, "unknown boundary tag '" + word + "'");
}

}  // namespace

TriMesh read_mesh(std::istream& source)
{
    LineReader reader(source);
    std::string line;
    if (!reader.next(line)) {
        throw MeshFormatError(1, "missing header");
    }
    if (line.rfind("trimesh 2d v1", 0) != 0) {
        throw MeshFormatError(reader.line(), "missing header");
    }

    const std::size_t n_nodes = read_count(reader, "nodes");
    std::vector<Point2> nodes(n_nodes);
    for (auto& p : nodes) {
        std::istringstream ls(reader.require("node coordinates"));
        if (!(ls >> p.x1 >> p.x2)) {
            throw MeshFormatError(reader.line(), "malformed node line");
        }
    }

    auto check_index = [&](long long v) {
        if (v < 0 || static_cast<std::size_t>(v) >= n_nodes) {
            throw MeshFormatError(reader.line(), "node index out of range");
        }
        return static_cast<Index>(v);
    };

    const std::size_t n_tri = read_count(reader, "triangles");
    std::vector<std::array<Index, 3>> triangles(n_tri);
    for (auto& t : triangles) {
        std::istringstream ls(reader.require("triangle"));
        long long a = 0, b = 0, c = 0;
        if (!(ls >> a >> b >> c)) {
            throw MeshFormatError(reader.line(), "malformed triangle line");
        }
        t = {check_index(a), check_index(b), check_index(c)};
        if (!(signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) > 0.0)) {
            throw MeshFormatError(reader.line(), "non-positive triangle area");
        }
    }

    const std::size_t n_bnd = read_count(reader, "boundary");
    std::vector<BoundaryEdge> boundary(n_bnd);
    for (auto& e : boundary) {
        std::istringstream ls(reader.require("boundary edge"));
        long long a = 0, b = 0;
        std::string tag;
        if (!(ls >> a >> b >> tag)) {
            throw MeshFormatError(reader.line(), "malformed boundary line");
        }
        e.nodes = {check_index(a), check_index(b)};
        e.tag = parse_tag(tag, reader.line());
    }
    return TriMesh(std::move(nodes), std::move(triangles), std::move(boundary));
}

}  // namespace fracwave
