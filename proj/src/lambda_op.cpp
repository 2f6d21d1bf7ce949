#include "vpf/lambda_op.hpp"

#include "vpf/fespace.hpp"
#include "vpf/mesh.hpp"

namespace vpf {

std::vector<LambdaElement<2>> build_lambda_field(const TriMesh& mesh, const MatrixField& B,
                                                 std::optional<double> delta, bool naive) {
    const int nt = static_cast<int>(mesh.tri.size());
    std::vector<LambdaElement<2>> out;
    out.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        const auto& tv = mesh.tri[t];
        std::array<SymMat2, 3> Bv{B.at(tv[0]), B.at(tv[1]), B.at(tv[2])};
        if (naive) {
            LambdaElement<2> el;
            el.A.setIdentity();
            el.Ainv.setIdentity();
            SymMat2 avg = (Bv[0] + Bv[1] + Bv[2]) * (1.0 / 3.0);
            el.lhat = {avg, avg};
            out.push_back(el);
            continue;
        }
        const AffineMap map = mesh.affine_map(t);
        Eigen::Matrix2d A;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) A(r, c) = map.A[r][c];
        out.push_back(build_lambda<2>(Bv, A, delta));
    }
    return out;
}

}  // namespace vpf
