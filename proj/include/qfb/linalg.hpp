#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <utility>

#include <Eigen/Dense>

#include "qfb/errors.hpp"

namespace qfb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Structural tolerance for Hermiticity / unitarity / reconstruction checks.
inline constexpr double kStructuralTol = 1e-10;
/// Singular values below this are treated as zero when completing a polar factor.
inline constexpr double kRankTol = 1e-10;

/// Result of T = V |T| with V unitary and |T| = (T^dag T)^{1/2} Hermitian PSD.
struct PolarFactors {
    Matrix unitary;  // V
    Matrix absolute; // |T|
};

struct RngSeed {
    std::uint64_t value = 0;
};

/// Deterministic random stream. A fixed seed reproduces the exact sample
/// sequence on one platform/library version. Independent parallel streams are
/// obtained with derived(), never by sharing one stream across threads.
class RngStream {
  public:
    explicit RngStream(RngSeed seed);

    /// Stream for worker `stream_index`, decorrelated from this one and from
    /// every other index. Depends only on (seed, stream_index).
    RngStream derived(std::uint64_t stream_index) const;

    double normal();
    /// Standard complex normal: independent N(0,1) real and imaginary parts.
    Complex complex_normal();

    std::uint64_t seed() const { return seed_.value; }

  private:
    RngSeed seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// |m| = (m^dag m)^{1/2} via Hermitian eigendecomposition of m^dag m with
/// eigenvalues clamped at zero before the square root.
Matrix matrix_abs(const Matrix& m);

/// m = V |m| with deterministic unitary completion of V on the null space.
PolarFactors polar_decompose(const Matrix& m);

/// Haar-distributed unitary: Ginibre matrix, then QR with the phase fix that
/// makes the triangular factor's diagonal real positive.
Matrix haar_random_unitary(Index dim, RngStream& rng);

/// Both sides of (tr m)^2 = tr(m^2) + 2 det m for 2x2 m. Test oracle only.
std::pair<Complex, Complex> trace_sq_identity_check(const Matrix& m);

/// Kronecker product, block a(i,j) * b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Max entrywise deviation of u^dag u from the identity.
double unitarity_deviation(const Matrix& u);

inline bool is_unitary(const Matrix& u, double tol = kStructuralTol) {
    return u.rows() == u.cols() && unitarity_deviation(u) <= tol;
}

/// Max entrywise absolute difference.
inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace qfb
