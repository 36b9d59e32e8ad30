#pragma once

#include <string>
#include <vector>

#include "qfb/linalg.hpp"

namespace qfb {

/// CPTP normalization tolerance: max entrywise |sum T^dag T - I|.
inline constexpr double kCptpTol = 1e-9;
/// Default operator-norm threshold for explicit pruning.
inline constexpr double kPruneTol = 1e-12;
/// Entrywise tolerance for Choi-matrix channel equality.
inline constexpr double kChoiTol = 1e-10;

/// Ordered Kraus decomposition of one channel step. Construction checks shape
/// (square d x d operators, 1 <= count <= d^2, finite entries) but not the
/// CPTP normalization; use validate_cptp for that, so that deliberately
/// broken sets can still be built and inspected in tests and loaders.
class KrausSet {
  public:
    KrausSet(Index dim, std::vector<Matrix> operators);

    Index dim() const { return dim_; }
    const std::vector<Matrix>& operators() const { return operators_; }
    const Matrix& operator[](std::size_t i) const { return operators_[i]; }
    std::size_t size() const { return operators_.size(); }

  private:
    Index dim_;
    std::vector<Matrix> operators_;
};

struct CptpReport {
    double max_deviation = 0.0;
    bool valid = false;
};

/// Max entrywise |sum_x T_x^dag T_x - I|; valid iff <= tol.
CptpReport validate_cptp(const KrausSet& k, double tol = kCptpTol);

/// Throwing form of validate_cptp for operations whose precondition is a
/// CPTP-valid set.
void require_cptp(const KrausSet& k, const char* who, double tol = kCptpTol);

/// Extreme-point qubit channel: T0 = diag(cos theta, cos phi),
/// T1 = [[0, sin phi], [sin theta, 0]]. Angles in [0, pi].
KrausSet build_qubit_extreme(double theta, double phi);

/// Convex mixture of two extreme-point qubit channels,
/// {sqrt(l) T0, sqrt(l) T1, sqrt(1-l) T0', sqrt(1-l) T1'}. Never pruned here.
KrausSet build_qubit_mixture(double lambda, double theta, double phi, double theta_prime,
                             double phi_prime);

/// Three diagonal Kraus operators realizing the qutrit dephasing map
/// rho_mn -> exp(-gamma (m-n)^2 / 2) rho_mn, with q = exp(-gamma/2).
KrausSet build_qutrit_dephasing(double gamma);

/// Canonical qutrit amplitude damping {A0, A1, A2}, damping parameter p.
KrausSet build_qutrit_amplitude_damping(double p);

/// The fidelity-optimal Kraus decomposition {(A0+A2)/sqrt2, A1, (-A0+A2)/sqrt2}
/// of the same amplitude damping channel.
KrausSet build_ad_optimal_decomposition(double p);

/// Unitary acting on the operator index of a KrausSet; m x m where m is the
/// operator count of the set it mixes.
struct MixingUnitary {
    Matrix matrix;
};

/// {Tt_i = sum_j U_ij T_j}: a different measurement for the same channel.
KrausSet apply_mixing(const KrausSet& k, const MixingUnitary& u);

/// Drop operators with Frobenius norm below tol. Explicit by design: the
/// operator count fixes the MixingUnitary size, so it must never change
/// behind the caller's back.
KrausSet prune(const KrausSet& k, double tol = kPruneTol);

/// Choi matrix: apply the channel to one half of the unnormalized maximally
/// entangled matrix. Two sets describe the same channel iff these are equal.
Matrix choi_matrix(const KrausSet& k);

/// Entrywise Choi comparison at tol.
bool same_channel(const KrausSet& a, const KrausSet& b, double tol = kChoiTol);

/// True iff b = P a for a generalized permutation P (permutation with
/// unit-modulus entries), i.e. the sets induce the same POVM family as
/// multisets. The shorter set is padded with zero operators first.
bool equivalent_decompositions(const KrausSet& a, const KrausSet& b, double tol = 1e-8);

/// Named parametric channel constructors plus raw ingestion.
class ChannelFamily {
  public:
    enum class Kind {
        QubitExtreme,
        QubitMixture,
        QutritDephasing,
        QutritAmplitudeDamping,
        Raw,
    };

    static ChannelFamily qubit_extreme(double theta, double phi);
    static ChannelFamily qubit_mixture(double lambda, double theta, double phi,
                                       double theta_prime, double phi_prime);
    static ChannelFamily qutrit_dephasing(double gamma);
    static ChannelFamily qutrit_amplitude_damping(double p);
    static ChannelFamily raw(KrausSet set);

    Kind kind() const { return kind_; }
    /// Canonical Kraus decomposition of this channel.
    KrausSet build() const;
    const std::vector<double>& params() const { return params_; }

  private:
    ChannelFamily(Kind kind, std::vector<double> params);
    explicit ChannelFamily(KrausSet raw);

    Kind kind_;
    std::vector<double> params_;
    std::vector<KrausSet> raw_; // empty unless kind == Raw
};

/// Parsed channel-spec file: the family, the decomposition it selects
/// (canonical, or the optimal one for "qutrit-ad-optimal"), and the CPTP
/// deviation measured on load.
struct ChannelSpec {
    ChannelFamily family;
    KrausSet kraus;
    double cptp_deviation = 0.0;
};

/// Parse a channel-spec document:
///   {"family": "<name>", "params": {...}}
///   {"family": "raw", "dim": d, "kraus": [[[re,im],...],...]}
/// Families: qubit-extreme, qubit-mixture, qutrit-dephasing, qutrit-ad,
/// qutrit-ad-optimal, raw. Throws ParseError on malformed input and
/// ValidationError if the loaded set is not CPTP.
ChannelSpec parse_channel_spec(const std::string& text);
ChannelSpec load_channel_spec(const std::string& path);

/// Serialize a raw channel spec for a Kraus set.
std::string raw_channel_spec_json(const KrausSet& k);

} // namespace qfb
