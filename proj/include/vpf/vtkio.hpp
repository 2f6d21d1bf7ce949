#pragma once
// Legacy ASCII VTK export of a full state snapshot and the per-step
// diagnostics CSV (fixed schema, 17 significant digits).

#include <string>

#include "vpf/diagnostics.hpp"
#include "vpf/solver.hpp"

namespace vpf {

// POINT_DATA: phi, mu, sigma, p, v (vectors, z = 0), |v|, Bxx, Byy, Bxy,
// B eigenvalues (ascending)
void write_vtk(const std::string& path, const TriMesh& mesh, const FieldState& state);

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    void row(const StepDiagnostics& d);
    void flush();

private:
    struct Impl;
    Impl* impl;
};

extern const char* const kCsvHeader;

}  // namespace vpf
