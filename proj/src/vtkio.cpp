#include "vpf/vtkio.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace vpf {

const char* const kCsvHeader =
    "time,energy,tumour_volume,spd_margin,iters,res_cons,res_div,res_mu,sigma_h1";

namespace {

struct File {
    std::FILE* f;
    explicit File(const std::string& path) : f(std::fopen(path.c_str(), "wb")) {
        if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    ~File() {
        if (f) std::fclose(f);
    }
};

void scalar_field(std::FILE* f, const char* name, const Vec& v) {
    std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name);
    for (int i = 0; i < v.size(); ++i) std::fprintf(f, "%.17g\n", v[i]);
}

}  // namespace

void write_vtk(const std::string& path, const TriMesh& mesh, const FieldState& state) {
    File out(path);
    std::FILE* f = out.f;
    const int nv = static_cast<int>(mesh.vertex.size());
    const int nt = static_cast<int>(mesh.tri.size());
    const int n_scalar = static_cast<int>(state.v.c.size()) / 2;

    std::fprintf(f, "# vtk DataFile Version 3.0\nstate snapshot\nASCII\n");
    std::fprintf(f, "DATASET UNSTRUCTURED_GRID\nPOINTS %d double\n", nv);
    for (int i = 0; i < nv; ++i)
        std::fprintf(f, "%.17g %.17g 0\n", mesh.vertex[i].x, mesh.vertex[i].y);
    std::fprintf(f, "CELLS %d %d\n", nt, 4 * nt);
    for (int t = 0; t < nt; ++t)
        std::fprintf(f, "3 %d %d %d\n", mesh.tri[t][0], mesh.tri[t][1], mesh.tri[t][2]);
    std::fprintf(f, "CELL_TYPES %d\n", nt);
    for (int t = 0; t < nt; ++t) std::fprintf(f, "5\n");

    std::fprintf(f, "POINT_DATA %d\n", nv);
    scalar_field(f, "phi", state.phi.c);
    scalar_field(f, "mu", state.mu.c);
    scalar_field(f, "sigma", state.sigma.c);
    scalar_field(f, "p", state.p.c);

    std::fprintf(f, "VECTORS v double\n");
    for (int i = 0; i < nv; ++i)
        std::fprintf(f, "%.17g %.17g 0\n", state.v.c[i], state.v.c[n_scalar + i]);

    std::fprintf(f, "SCALARS v_mag double 1\nLOOKUP_TABLE default\n");
    for (int i = 0; i < nv; ++i) {
        const double vx = state.v.c[i], vy = state.v.c[n_scalar + i];
        std::fprintf(f, "%.17g\n", std::sqrt(vx * vx + vy * vy));
    }

    scalar_field(f, "Bxx", state.B.xx);
    scalar_field(f, "Byy", state.B.yy);
    scalar_field(f, "Bxy", state.B.xy);

    std::fprintf(f, "SCALARS B_eig1 double 1\nLOOKUP_TABLE default\n");
    for (int i = 0; i < nv; ++i) std::fprintf(f, "%.17g\n", eigh(state.B.at(i)).val[0]);
    std::fprintf(f, "SCALARS B_eig2 double 1\nLOOKUP_TABLE default\n");
    for (int i = 0; i < nv; ++i) std::fprintf(f, "%.17g\n", eigh(state.B.at(i)).val[1]);
}

struct CsvWriter::Impl {
    File file;
    explicit Impl(const std::string& path) : file(path) {}
};

CsvWriter::CsvWriter(const std::string& path) : impl(new Impl(path)) {
    std::fprintf(impl->file.f, "%s\n", kCsvHeader);
}

CsvWriter::~CsvWriter() { delete impl; }

void CsvWriter::row(const StepDiagnostics& d) {
    std::fprintf(impl->file.f, "%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", d.time,
                 d.energy, d.tumour_volume, d.spd_margin, d.iters, d.res_cons, d.res_div,
                 d.res_mu, d.sigma_h1);
}

void CsvWriter::flush() { std::fflush(impl->file.f); }

}  // namespace vpf
