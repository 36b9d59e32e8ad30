#include "qfb/linalg.hpp"

#include <cmath>

namespace qfb {

namespace {

void require_square(const Matrix& m, const char* who) {
    if (m.rows() < 1 || m.rows() != m.cols()) {
        throw DimensionError(std::string(who) + ": expected a square matrix, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

void require_finite(const Matrix& m, const char* who) {
    if (!m.allFinite()) {
        throw ParameterError(std::string(who) + ": input has non-finite entries");
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace

RngStream::RngStream(RngSeed seed) : seed_(seed), engine_(splitmix64(seed.value)) {}

RngStream RngStream::derived(std::uint64_t stream_index) const {
    // Mix the index through two splitmix rounds so adjacent indices land far apart.
    return RngStream{RngSeed{splitmix64(seed_.value ^ splitmix64(stream_index))}};
}

double RngStream::normal() { return normal_(engine_); }

Complex RngStream::complex_normal() {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re, im};
}

Matrix matrix_abs(const Matrix& m) {
    require_square(m, "matrix_abs");
    require_finite(m, "matrix_abs");
    const Matrix gram = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().adjoint();
}

PolarFactors polar_decompose(const Matrix& m) {
    require_square(m, "polar_decompose");
    require_finite(m, "polar_decompose");
    // m = U S W^dag gives |m| = W S W^dag and V = U W^dag. The factorization is
    // deterministic for a fixed input, which also pins V on singular directions.
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix& u = svd.matrixU();
    const Matrix& w = svd.matrixV();
    Matrix absolute = w * svd.singularValues().asDiagonal() * w.adjoint();
    return PolarFactors{u * w.adjoint(), std::move(absolute)};
}

Matrix haar_random_unitary(Index dim, RngStream& rng) {
    if (dim < 1) {
        throw DimensionError("haar_random_unitary: dim must be >= 1");
    }
    Matrix ginibre(dim, dim);
    for (Index j = 0; j < dim; ++j) {
        for (Index i = 0; i < dim; ++i) {
            ginibre(i, j) = rng.complex_normal();
        }
    }
    Eigen::HouseholderQR<Matrix> qr(ginibre);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Phase fix: rescale columns so the R diagonal becomes real positive,
    // which makes QR unique and Q Haar-distributed.
    for (Index j = 0; j < dim; ++j) {
        const Complex d = r(j, j);
        const double mag = std::abs(d);
        q.col(j) *= (mag > 0.0) ? d / mag : Complex{1.0, 0.0};
    }
    return q;
}

std::pair<Complex, Complex> trace_sq_identity_check(const Matrix& m) {
    if (m.rows() != 2 || m.cols() != 2) {
        throw DimensionError("trace_sq_identity_check: expected a 2x2 matrix");
    }
    const Complex tr = m.trace();
    const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return {tr * tr, (m * m).trace() + 2.0 * det};
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

double unitarity_deviation(const Matrix& u) {
    return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

} // namespace qfb
