#include "fracwave/output.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fracwave {

namespace {

std::FILE* open_for_write(const std::string& path)
{
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) {
        throw OutputError("cannot open " + path + " for writing: " + std::strerror(errno));
    }
    return f;
}

void check_write(std::FILE* f, const std::string& path)
{
    if (std::ferror(f) != 0) {
        throw OutputError("write to " + path + " failed");
    }
}

}  // namespace

EnergyCsvWriter::EnergyCsvWriter(const std::string& path) : file_(open_for_write(path)), path_(path)
{
    std::fprintf(file_, "%.*s\n%.*s\n", static_cast<int>(kEnergiesVersionLine.size()), kEnergiesVersionLine.data(),
                 static_cast<int>(kEnergiesColumns.size()), kEnergiesColumns.data());
    check_write(file_, path_);
}

EnergyCsvWriter::~EnergyCsvWriter()
{
    if (file_ != nullptr) {
        std::fclose(file_);
    }
}

void EnergyCsvWriter::append(const EnergyRecord& r)
{
    if (file_ == nullptr) {
        throw OutputError("append to closed energies file " + path_);
    }
    std::fprintf(file_, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.t, r.elastic, r.kinetic,
                 r.surface, r.dissipation_increment, r.injected_work_increment, r.balance_residual);
    check_write(file_, path_);
}

void EnergyCsvWriter::close()
{
    if (file_ != nullptr) {
        const int rc = std::fclose(file_);
        file_ = nullptr;
        if (rc != 0) {
            throw OutputError("closing " + path_ + " failed");
        }
    }
}

void write_energies_csv(const std::string& path, std::span<const EnergyRecord> records)
{
    EnergyCsvWriter w(path);
    for (const auto& r : records) {
        w.append(r);
    }
    w.close();
}

std::vector<EnergyRecord> read_energies_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw OutputError("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != kEnergiesVersionLine) {
        throw OutputError(path + ": missing or unsupported version line");
    }
    if (!std::getline(in, line) || line != kEnergiesColumns) {
        throw OutputError(path + ": unexpected column header");
    }
    std::vector<EnergyRecord> out;
    std::size_t line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 8) {
            throw OutputError(path + ": line " + std::to_string(line_no) + ": expected 8 columns");
        }
        double v[7];
        for (int c = 0; c < 7; ++c) {
            char* end = nullptr;
            v[c] = std::strtod(cells[static_cast<std::size_t>(c + 1)].c_str(), &end);
            if (end == cells[static_cast<std::size_t>(c + 1)].c_str() || *end != '\0') {
                throw OutputError(path + ": line " + std::to_string(line_no) + ": malformed number");
            }
        }
        EnergyRecord r;
        r.step = std::atoi(cells[0].c_str());
        r.t = v[0];
        r.elastic = v[1];
        r.kinetic = v[2];
        r.surface = v[3];
        r.dissipation_increment = v[4];
        r.injected_work_increment = v[5];
        r.balance_residual = v[6];
        out.push_back(r);
    }
    return out;
}

ScalarField velocity_squared(std::span<const double> u_curr, std::span<const double> u_prev, double tau)
{
    ScalarField out(u_curr.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v1 = (u_curr[2 * i] - u_prev[2 * i]) / tau;
        const double v2 = (u_curr[2 * i + 1] - u_prev[2 * i + 1]) / tau;
        out[i] = v1 * v1 + v2 * v2;
    }
    return out;
}

void write_vtk_snapshot(const TriMesh& mesh, std::span<const double> u, std::span<const double> z,
                        std::span<const double> v_sq, const std::string& path)
{
    const std::size_t nn = mesh.num_nodes();
    const std::size_t nt = mesh.num_triangles();
    if (u.size() != 2 * nn || z.size() != nn || v_sq.size() != nn) {
        throw std::invalid_argument("write_vtk_snapshot: fields do not match the mesh");
    }
    std::FILE* f = open_for_write(path);
    std::fprintf(f, "# vtk DataFile Version 3.0\nfracwave snapshot\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    std::fprintf(f, "POINTS %zu double\n", nn);
    for (std::size_t i = 0; i < nn; ++i) {
        std::fprintf(f, "%.17g %.17g 0\n", mesh.node(i).x1, mesh.node(i).x2);
    }
    std::fprintf(f, "CELLS %zu %zu\n", nt, 4 * nt);
    for (std::size_t e = 0; e < nt; ++e) {
        const auto& t = mesh.triangle(e);
        std::fprintf(f, "3 %d %d %d\n", t[0], t[1], t[2]);
    }
    std::fprintf(f, "CELL_TYPES %zu\n", nt);
    for (std::size_t e = 0; e < nt; ++e) {
        std::fprintf(f, "5\n");
    }
    std::fprintf(f, "POINT_DATA %zu\nVECTORS displacement double\n", nn);
    for (std::size_t i = 0; i < nn; ++i) {
        std::fprintf(f, "%.9g %.9g 0\n", u[2 * i], u[2 * i + 1]);
    }
    std::fprintf(f, "SCALARS damage double 1\nLOOKUP_TABLE default\n");
    for (std::size_t i = 0; i < nn; ++i) {
        std::fprintf(f, "%.9g\n", z[i]);
    }
    std::fprintf(f, "SCALARS v_squared double 1\nLOOKUP_TABLE default\n");
    for (std::size_t i = 0; i < nn; ++i) {
        std::fprintf(f, "%.9g\n", v_sq[i]);
    }
    const bool failed = std::ferror(f) != 0;
    if (std::fclose(f) != 0 || failed) {
        throw OutputError("write to " + path + " failed");
    }
}

}  // namespace fracwave
