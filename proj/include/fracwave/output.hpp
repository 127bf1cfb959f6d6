#pragma once

#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fracwave/fem.hpp"
#include "fracwave/mesh.hpp"
#include "fracwave/stepper.hpp"

namespace fracwave {

/// First line of every energies CSV; bump the version when columns change.
inline constexpr std::string_view kEnergiesVersionLine = "# fracwave energies v1";
inline constexpr std::string_view kEnergiesColumns =
    "step,t,E_el,E_ki,E_s,dissipation_increment,injected_work_increment,residual";

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One CSV row per executed step, appended in order. Floats use 17
/// significant digits.
class EnergyCsvWriter {
public:
    explicit EnergyCsvWriter(const std::string& path);
    ~EnergyCsvWriter();
    EnergyCsvWriter(const EnergyCsvWriter&) = delete;
    EnergyCsvWriter& operator=(const EnergyCsvWriter&) = delete;

    void append(const EnergyRecord& record);
    void close();

private:
    std::FILE* file_ = nullptr;
    std::string path_;
};

void write_energies_csv(const std::string& path, std::span<const EnergyRecord> records);

/// Reads a file written by EnergyCsvWriter; throws OutputError on a missing
/// or mismatched header or malformed rows.
[[nodiscard]] std::vector<EnergyRecord> read_energies_csv(const std::string& path);

/// Nodal |v|^2 with v = (u_curr - u_prev) / tau.
[[nodiscard]] ScalarField velocity_squared(std::span<const double> u_curr, std::span<const double> u_prev, double tau);

/// Legacy ASCII VTK unstructured grid with displacement, damage and
/// v_squared point data (9 significant digits).
void write_vtk_snapshot(const TriMesh& mesh, std::span<const double> u, std::span<const double> z,
                        std::span<const double> v_sq, const std::string& path);

}  // namespace fracwave
