#include "qfb/channels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qfb {

using nlohmann::json;

KrausSet::KrausSet(Index dim, std::vector<Matrix> operators)
    : dim_(dim), operators_(std::move(operators)) {
    if (dim_ < 1) {
        throw DimensionError("KrausSet: dim must be >= 1");
    }
    if (operators_.empty()) {
        throw DimensionError("KrausSet: at least one operator required");
    }
    if (static_cast<Index>(operators_.size()) > dim_ * dim_) {
        throw DimensionError("KrausSet: operator count exceeds the Kraus rank bound d^2");
    }
    for (const Matrix& op : operators_) {
        if (op.rows() != dim_ || op.cols() != dim_) {
            throw DimensionError("KrausSet: all operators must be dim x dim");
        }
        if (!op.allFinite()) {
            throw ParameterError("KrausSet: operator has non-finite entries");
        }
    }
}

CptpReport validate_cptp(const KrausSet& k, double tol) {
    Matrix sum = Matrix::Zero(k.dim(), k.dim());
    for (const Matrix& op : k.operators()) {
        sum += op.adjoint() * op;
    }
    const double dev = (sum - Matrix::Identity(k.dim(), k.dim())).cwiseAbs().maxCoeff();
    return {dev, dev <= tol};
}

void require_cptp(const KrausSet& k, const char* who, double tol) {
    const CptpReport report = validate_cptp(k, tol);
    if (!report.valid) {
        std::ostringstream msg;
        msg << who << ": Kraus set is not CPTP (deviation " << report.max_deviation << " > "
            << tol << ")";
        throw ValidationError(msg.str());
    }
}

namespace {

void require_angle(double value, const char* name) {
    if (!(value >= 0.0 && value <= M_PI)) {
        throw ParameterError(std::string(name) + " must lie in [0, pi]");
    }
}

void require_probability(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ParameterError(std::string(name) + " must lie in [0, 1]");
    }
}

} // namespace

KrausSet build_qubit_extreme(double theta, double phi) {
    require_angle(theta, "theta");
    require_angle(phi, "phi");
    Matrix t0 = Matrix::Zero(2, 2);
    t0(0, 0) = std::cos(theta);
    t0(1, 1) = std::cos(phi);
    Matrix t1 = Matrix::Zero(2, 2);
    t1(0, 1) = std::sin(phi);
    t1(1, 0) = std::sin(theta);
    return KrausSet(2, {std::move(t0), std::move(t1)});
}

KrausSet build_qubit_mixture(double lambda, double theta, double phi, double theta_prime,
                             double phi_prime) {
    require_probability(lambda, "lambda");
    const KrausSet first = build_qubit_extreme(theta, phi);
    const KrausSet second = build_qubit_extreme(theta_prime, phi_prime);
    const double wa = std::sqrt(lambda);
    const double wb = std::sqrt(1.0 - lambda);
    return KrausSet(2, {wa * first[0], wa * first[1], wb * second[0], wb * second[1]});
}

KrausSet build_qutrit_dephasing(double gamma) {
    if (!(gamma >= 0.0)) {
        throw ParameterError("gamma must be >= 0");
    }
    const double q = std::exp(-gamma / 2.0);
    const double q2 = q * q;
    const double q3 = q2 * q;
    const double q4 = q2 * q2;
    const double q6 = q3 * q3;
    const double q8 = q4 * q4;
    const double root = std::sqrt(8.0 * q2 + q8);

    Matrix d0 = Matrix::Zero(3, 3);
    const double c0 = std::sqrt((1.0 - q4) / 2.0);
    d0(0, 0) = -c0;
    d0(2, 2) = c0;

    const double root6 = std::sqrt(8.0 + q6);
    const double alpha_plus = (q3 * root6 + (4.0 - q6)) / (root6 + 3.0 * q3);
    const double cp = std::sqrt((2.0 + q4 + root) / (2.0 * (2.0 + alpha_plus * alpha_plus)));
    Matrix d1 = Matrix::Zero(3, 3);
    d1(0, 0) = cp;
    d1(1, 1) = cp * alpha_plus;
    d1(2, 2) = cp;

    Matrix d2 = Matrix::Zero(3, 3);
    // The minus branch has a removable 0/0 singularity at q = 1 (gamma = 0):
    // its coefficient's numerator 2 + q^4 - sqrt(8 q^2 + q^8) vanishes there,
    // so the operator is zero and alpha_- never needs to be evaluated.
    const double minus_numerator = 2.0 + q4 - root;
    if (minus_numerator >= 1e-14) {
        const double alpha_minus = (q3 * root6 - (4.0 - q6)) / (root6 - 3.0 * q3);
        const double cm = std::sqrt(minus_numerator / (2.0 * (2.0 + alpha_minus * alpha_minus)));
        d2(0, 0) = cm;
        d2(1, 1) = cm * alpha_minus;
        d2(2, 2) = cm;
    }
    return KrausSet(3, {std::move(d0), std::move(d1), std::move(d2)});
}

KrausSet build_qutrit_amplitude_damping(double p) {
    require_probability(p, "p");
    Matrix a0 = Matrix::Zero(3, 3);
    a0(0, 0) = 1.0;
    a0(1, 1) = std::sqrt(1.0 - p);
    a0(2, 2) = 1.0 - p;
    Matrix a1 = Matrix::Zero(3, 3);
    a1(0, 1) = std::sqrt(p);
    a1(1, 2) = std::sqrt(2.0 * p * (1.0 - p));
    Matrix a2 = Matrix::Zero(3, 3);
    a2(0, 2) = p;
    return KrausSet(3, {std::move(a0), std::move(a1), std::move(a2)});
}

KrausSet build_ad_optimal_decomposition(double p) {
    const KrausSet canonical = build_qutrit_amplitude_damping(p);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    return KrausSet(3, {(canonical[0] + canonical[2]) * inv_sqrt2, canonical[1],
                        (canonical[2] - canonical[0]) * inv_sqrt2});
}

KrausSet apply_mixing(const KrausSet& k, const MixingUnitary& u) {
    const auto m = static_cast<Index>(k.size());
    if (u.matrix.rows() != m || u.matrix.cols() != m) {
        throw DimensionError("apply_mixing: mixing unitary must be m x m with m = operator count");
    }
    if (!is_unitary(u.matrix)) {
        throw ParameterError("apply_mixing: mixing matrix is not unitary");
    }
    std::vector<Matrix> mixed(k.size(), Matrix::Zero(k.dim(), k.dim()));
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            mixed[static_cast<std::size_t>(i)] += u.matrix(i, j) * k[static_cast<std::size_t>(j)];
        }
    }
    return KrausSet(k.dim(), std::move(mixed));
}

KrausSet prune(const KrausSet& k, double tol) {
    std::vector<Matrix> kept;
    for (const Matrix& op : k.operators()) {
        if (op.norm() >= tol) {
            kept.push_back(op);
        }
    }
    if (kept.empty()) {
        throw ValidationError("prune: all operators fell below the threshold");
    }
    return KrausSet(k.dim(), std::move(kept));
}

Matrix choi_matrix(const KrausSet& k) {
    const Index d = k.dim();
    Matrix choi = Matrix::Zero(d * d, d * d);
    for (const Matrix& op : k.operators()) {
        // (id x T)|Omega> with |Omega> = sum_i |ii> is the column-major vec of T.
        const Eigen::Map<const Vector> v(op.data(), d * d);
        choi += v * v.adjoint();
    }
    return choi;
}

bool same_channel(const KrausSet& a, const KrausSet& b, double tol) {
    if (a.dim() != b.dim()) {
        return false;
    }
    return max_abs_diff(choi_matrix(a), choi_matrix(b)) <= tol;
}

namespace {

// Backtracking search for a pairing of a's operators with b's such that each
// pair agrees up to a global phase. Exact for the m <= d^2 <= 16 sizes here.
bool match_up_to_phase(const Matrix& a, const Matrix& b, double tol) {
    Index pi = 0, pj = 0;
    double best = 0.0;
    for (Index j = 0; j < a.cols(); ++j) {
        for (Index i = 0; i < a.rows(); ++i) {
            const double mag = std::abs(a(i, j));
            if (mag > best) {
                best = mag;
                pi = i;
                pj = j;
            }
        }
    }
    const double scale = std::max(1.0, best);
    if (best <= tol) {
        return b.cwiseAbs().maxCoeff() <= tol * scale;
    }
    if (std::abs(b(pi, pj)) <= tol * scale) {
        return false;
    }
    const Complex phase = b(pi, pj) / a(pi, pj);
    if (std::abs(std::abs(phase) - 1.0) > tol) {
        return false;
    }
    return max_abs_diff(phase * a, b) <= tol * scale;
}

bool assign(const std::vector<Matrix>& a, const std::vector<Matrix>& b, std::vector<bool>& used,
            std::size_t next, double tol) {
    if (next == a.size()) {
        return true;
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (!used[j] && match_up_to_phase(a[next], b[j], tol)) {
            used[j] = true;
            if (assign(a, b, used, next + 1, tol)) {
                return true;
            }
            used[j] = false;
        }
    }
    return false;
}

} // namespace

bool equivalent_decompositions(const KrausSet& a, const KrausSet& b, double tol) {
    if (a.dim() != b.dim()) {
        return false;
    }
    std::vector<Matrix> left = a.operators();
    std::vector<Matrix> right = b.operators();
    const std::size_t m = std::max(left.size(), right.size());
    left.resize(m, Matrix::Zero(a.dim(), a.dim()));
    right.resize(m, Matrix::Zero(a.dim(), a.dim()));
    std::vector<bool> used(m, false);
    return assign(left, right, used, 0, tol);
}

ChannelFamily::ChannelFamily(Kind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {}

ChannelFamily::ChannelFamily(KrausSet raw) : kind_(Kind::Raw) { raw_.push_back(std::move(raw)); }

ChannelFamily ChannelFamily::qubit_extreme(double theta, double phi) {
    return ChannelFamily(Kind::QubitExtreme, {theta, phi});
}

ChannelFamily ChannelFamily::qubit_mixture(double lambda, double theta, double phi,
                                           double theta_prime, double phi_prime) {
    return ChannelFamily(Kind::QubitMixture, {lambda, theta, phi, theta_prime, phi_prime});
}

ChannelFamily ChannelFamily::qutrit_dephasing(double gamma) {
    return ChannelFamily(Kind::QutritDephasing, {gamma});
}

ChannelFamily ChannelFamily::qutrit_amplitude_damping(double p) {
    return ChannelFamily(Kind::QutritAmplitudeDamping, {p});
}

ChannelFamily ChannelFamily::raw(KrausSet set) { return ChannelFamily(std::move(set)); }

KrausSet ChannelFamily::build() const {
    switch (kind_) {
    case Kind::QubitExtreme:
        return build_qubit_extreme(params_[0], params_[1]);
    case Kind::QubitMixture:
        return build_qubit_mixture(params_[0], params_[1], params_[2], params_[3], params_[4]);
    case Kind::QutritDephasing:
        return build_qutrit_dephasing(params_[0]);
    case Kind::QutritAmplitudeDamping:
        return build_qutrit_amplitude_damping(params_[0]);
    case Kind::Raw:
        return raw_.front();
    }
    throw ParameterError("ChannelFamily: unknown kind");
}

namespace {

double get_param(const json& params, const std::string& key) {
    if (!params.contains(key) || !params[key].is_number()) {
        throw ParseError("channel spec: missing or non-numeric field params." + key);
    }
    return params[key].get<double>();
}

KrausSet parse_raw_kraus(const json& doc) {
    if (!doc.contains("dim") || !doc["dim"].is_number_unsigned()) {
        throw ParseError("channel spec: raw family requires an unsigned field 'dim'");
    }
    const Index dim = doc["dim"].get<Index>();
    if (!doc.contains("kraus") || !doc["kraus"].is_array() || doc["kraus"].empty()) {
        throw ParseError("channel spec: raw family requires a non-empty array field 'kraus'");
    }
    std::vector<Matrix> ops;
    for (const json& mat : doc["kraus"]) {
        if (!mat.is_array() || static_cast<Index>(mat.size()) != dim) {
            throw ParseError("channel spec: each kraus matrix must have 'dim' rows");
        }
        Matrix op(dim, dim);
        for (Index i = 0; i < dim; ++i) {
            const json& row = mat[static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<Index>(row.size()) != dim) {
                throw ParseError("channel spec: each kraus row must have 'dim' entries");
            }
            for (Index j = 0; j < dim; ++j) {
                const json& entry = row[static_cast<std::size_t>(j)];
                if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
                    !entry[1].is_number()) {
                    throw ParseError("channel spec: kraus entries must be [re, im] pairs");
                }
                op(i, j) = Complex{entry[0].get<double>(), entry[1].get<double>()};
            }
        }
        ops.push_back(std::move(op));
    }
    return KrausSet(dim, std::move(ops));
}

} // namespace

ChannelSpec parse_channel_spec(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("channel spec: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("family") || !doc["family"].is_string()) {
        throw ParseError("channel spec: expected an object with a string field 'family'");
    }
    const std::string family = doc["family"].get<std::string>();
    const json params = doc.value("params", json::object());

    auto finish = [](ChannelFamily fam, KrausSet set) {
        const CptpReport report = validate_cptp(set);
        if (!report.valid) {
            std::ostringstream msg;
            msg << "channel spec: Kraus set is not CPTP (deviation " << report.max_deviation
                << ")";
            throw ValidationError(msg.str());
        }
        return ChannelSpec{std::move(fam), std::move(set), report.max_deviation};
    };

    if (family == "qubit-extreme") {
        const double theta = get_param(params, "theta");
        const double phi = get_param(params, "phi");
        return finish(ChannelFamily::qubit_extreme(theta, phi), build_qubit_extreme(theta, phi));
    }
    if (family == "qubit-mixture") {
        const double lambda = get_param(params, "lambda");
        const double theta = get_param(params, "theta");
        const double phi = get_param(params, "phi");
        const double theta_prime = get_param(params, "theta_prime");
        const double phi_prime = get_param(params, "phi_prime");
        return finish(ChannelFamily::qubit_mixture(lambda, theta, phi, theta_prime, phi_prime),
                      build_qubit_mixture(lambda, theta, phi, theta_prime, phi_prime));
    }
    if (family == "qutrit-dephasing") {
        const double gamma = get_param(params, "gamma");
        return finish(ChannelFamily::qutrit_dephasing(gamma), build_qutrit_dephasing(gamma));
    }
    if (family == "qutrit-ad") {
        const double p = get_param(params, "p");
        return finish(ChannelFamily::qutrit_amplitude_damping(p),
                      build_qutrit_amplitude_damping(p));
    }
    if (family == "qutrit-ad-optimal") {
        const double p = get_param(params, "p");
        return finish(ChannelFamily::qutrit_amplitude_damping(p),
                      build_ad_optimal_decomposition(p));
    }
    if (family == "raw") {
        KrausSet set = parse_raw_kraus(doc);
        return finish(ChannelFamily::raw(set), std::move(set));
    }
    throw ParseError("channel spec: unknown family '" + family + "'");
}

ChannelSpec load_channel_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open channel spec file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_channel_spec(buffer.str());
}

std::string raw_channel_spec_json(const KrausSet& k) {
    json kraus = json::array();
    for (const Matrix& op : k.operators()) {
        json mat = json::array();
        for (Index i = 0; i < k.dim(); ++i) {
            json row = json::array();
            for (Index j = 0; j < k.dim(); ++j) {
                row.push_back({op(i, j).real(), op(i, j).imag()});
            }
            mat.push_back(std::move(row));
        }
        kraus.push_back(std::move(mat));
    }
    json doc;
    doc["family"] = "raw";
    doc["dim"] = k.dim();
    doc["kraus"] = std::move(kraus);
    return doc.dump(2);
}

} // namespace qfb
