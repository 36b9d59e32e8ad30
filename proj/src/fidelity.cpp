#include "qfb/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qfb {

namespace {

std::uint64_t saturating_pow(std::uint64_t base, int exp) {
    std::uint64_t result = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        result *= base;
    }
    return result;
}

void guard_term_count(const FeedbackPlan& plan, bool force) {
    if (!force && plan.term_count() > kMaxBruteTerms) {
        throw ResourceError("brute-force enumeration refused: " +
                            std::to_string(plan.term_count()) +
                            " outcome sequences exceed the guard (pass force to override)");
    }
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace

FeedbackPlan::FeedbackPlan(Strategy strategy, std::vector<KrausSet> sets)
    : strategy_(strategy), sets_(std::move(sets)) {
    if (sets_.empty()) {
        throw ParameterError("FeedbackPlan: at least one step required");
    }
    const Index d = sets_.front().dim();
    for (const KrausSet& set : sets_) {
        if (set.dim() != d) {
            throw DimensionError("FeedbackPlan: all steps must share one dimension");
        }
        require_cptp(set, "FeedbackPlan");
    }
    const Matrix reference = choi_matrix(sets_.front());
    for (std::size_t k = 1; k < sets_.size(); ++k) {
        if (max_abs_diff(choi_matrix(sets_[k]), reference) > kPlanChannelTol) {
            throw ValidationError(
                "FeedbackPlan: step " + std::to_string(k) +
                " is a decomposition of a different channel (Choi mismatch)");
        }
    }
}

FeedbackPlan FeedbackPlan::uniform(Strategy strategy, int steps, KrausSet set) {
    if (steps < 1) {
        throw ParameterError("FeedbackPlan: steps must be >= 1");
    }
    return FeedbackPlan(strategy, std::vector<KrausSet>(static_cast<std::size_t>(steps), set));
}

FeedbackPlan FeedbackPlan::per_step(Strategy strategy, std::vector<KrausSet> sets) {
    return FeedbackPlan(strategy, std::move(sets));
}

std::uint64_t FeedbackPlan::term_count() const {
    std::uint64_t count = 1;
    for (const KrausSet& set : sets_) {
        const std::uint64_t m = set.size();
        if (m != 0 && count > std::numeric_limits<std::uint64_t>::max() / m) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        count *= m;
    }
    return count;
}

KrausSet corrected_channel(const KrausSet& k) {
    require_cptp(k, "corrected_channel");
    std::vector<Matrix> abs_ops;
    abs_ops.reserve(k.size());
    for (const Matrix& op : k.operators()) {
        abs_ops.push_back(matrix_abs(op));
    }
    return KrausSet(k.dim(), std::move(abs_ops));
}

std::vector<Matrix> recovery_operators(const KrausSet& k) {
    require_cptp(k, "recovery_operators");
    std::vector<Matrix> recoveries;
    recoveries.reserve(k.size());
    for (const Matrix& op : k.operators()) {
        recoveries.push_back(polar_decompose(op).unitary.adjoint());
    }
    return recoveries;
}

namespace detail {

std::vector<Matrix> abs_operators(const KrausSet& k) {
    std::vector<Matrix> abs_ops;
    abs_ops.reserve(k.size());
    for (const Matrix& op : k.operators()) {
        abs_ops.push_back(matrix_abs(op));
    }
    return abs_ops;
}

namespace {

// Depth-first accumulation of left products |T^(k)| * prefix. StepFn maps the
// step index to that step's absolute-value operators.
template <typename StepFn>
double markovian_core(StepFn&& step, int steps, Index d) {
    double total = 0.0;
    std::vector<Matrix> prefix(static_cast<std::size_t>(steps) + 1);
    prefix[0] = Matrix::Identity(d, d);
    // Iterative DFS over outcome sequences, one counter per step.
    std::vector<std::size_t> outcome(static_cast<std::size_t>(steps), 0);
    int level = 0;
    while (level >= 0) {
        const std::vector<Matrix>& ops = step(level);
        std::size_t& x = outcome[static_cast<std::size_t>(level)];
        if (x == ops.size()) {
            x = 0;
            --level;
            if (level >= 0) {
                ++outcome[static_cast<std::size_t>(level)];
            }
            continue;
        }
        prefix[static_cast<std::size_t>(level) + 1].noalias() =
            ops[x] * prefix[static_cast<std::size_t>(level)];
        if (level + 1 == steps) {
            const Complex tr = prefix[static_cast<std::size_t>(steps)].trace();
            total += std::norm(tr);
            ++x;
        } else {
            ++level;
        }
    }
    return total / static_cast<double>(d * d);
}

template <typename StepFn>
double bayesian_core(StepFn&& step, int steps, Index d) {
    double total = 0.0;
    std::vector<Matrix> nested(static_cast<std::size_t>(steps) + 1);
    nested[0] = Matrix::Identity(d, d);
    std::vector<std::size_t> outcome(static_cast<std::size_t>(steps), 0);
    int level = 0;
    while (level >= 0) {
        const std::vector<Matrix>& ops = step(level);
        std::size_t& x = outcome[static_cast<std::size_t>(level)];
        if (x == ops.size()) {
            x = 0;
            --level;
            if (level >= 0) {
                ++outcome[static_cast<std::size_t>(level)];
            }
            continue;
        }
        // B_{x_1..x_k} = |T^(k)_{x_k} B_{x_1..x_{k-1}}|, with B_0 = I.
        nested[static_cast<std::size_t>(level) + 1] =
            matrix_abs(ops[x] * nested[static_cast<std::size_t>(level)]);
        if (level + 1 == steps) {
            // B is positive semidefinite, so the trace is real.
            const double tr = nested[static_cast<std::size_t>(steps)].trace().real();
            total += tr * tr;
            ++x;
        } else {
            ++level;
        }
    }
    return total / static_cast<double>(d * d);
}

Matrix transfer_map(const std::vector<Matrix>& abs_ops, Index d) {
    Matrix e = Matrix::Zero(d * d, d * d);
    for (const Matrix& a : abs_ops) {
        e += kron(a, a.conjugate());
    }
    return e;
}

} // namespace

double markovian_value(const std::vector<std::vector<Matrix>>& abs_per_step, Index d) {
    return markovian_core(
        [&](int k) -> const std::vector<Matrix>& {
            return abs_per_step[static_cast<std::size_t>(k)];
        },
        static_cast<int>(abs_per_step.size()), d);
}

double markovian_value_stationary(const std::vector<Matrix>& abs_ops, int steps, Index d) {
    return markovian_core([&](int) -> const std::vector<Matrix>& { return abs_ops; }, steps, d);
}

double markovian_value_transfer(const std::vector<std::vector<Matrix>>& abs_per_step, Index d) {
    Matrix product = Matrix::Identity(d * d, d * d);
    for (const std::vector<Matrix>& abs_ops : abs_per_step) {
        product = transfer_map(abs_ops, d) * product;
    }
    return product.trace().real() / static_cast<double>(d * d);
}

double bayesian_value(const std::vector<std::vector<Matrix>>& ops_per_step, Index d) {
    return bayesian_core(
        [&](int k) -> const std::vector<Matrix>& {
            return ops_per_step[static_cast<std::size_t>(k)];
        },
        static_cast<int>(ops_per_step.size()), d);
}

double bayesian_value_stationary(const std::vector<Matrix>& ops, int steps, Index d) {
    return bayesian_core([&](int) -> const std::vector<Matrix>& { return ops; }, steps, d);
}

} // namespace detail

FidelityReport fidelity_one_step(const KrausSet& k) {
    require_cptp(k, "fidelity_one_step");
    double total = 0.0;
    for (const Matrix& op : k.operators()) {
        const double tr = matrix_abs(op).trace().real();
        total += tr * tr;
    }
    const double raw = total / static_cast<double>(k.dim() * k.dim());
    return {clamp01(raw), raw, Strategy::Markovian, 1, k.size(), FidelityMethod::Brute};
}

FidelityReport fidelity_markovian(const FeedbackPlan& plan, std::optional<FidelityMethod> method,
                                  bool force) {
    if (plan.strategy() != Strategy::Markovian) {
        throw ParameterError("fidelity_markovian: plan strategy must be Markovian");
    }
    const FidelityMethod chosen = method.value_or(
        plan.term_count() <= 1000000 ? FidelityMethod::Brute : FidelityMethod::Transfer);
    std::vector<std::vector<Matrix>> abs_per_step;
    abs_per_step.reserve(static_cast<std::size_t>(plan.steps()));
    for (const KrausSet& set : plan.decompositions()) {
        abs_per_step.push_back(detail::abs_operators(set));
    }
    double raw = 0.0;
    if (chosen == FidelityMethod::Brute) {
        guard_term_count(plan, force);
        raw = detail::markovian_value(abs_per_step, plan.dim());
    } else {
        raw = detail::markovian_value_transfer(abs_per_step, plan.dim());
    }
    return {clamp01(raw),     raw, Strategy::Markovian, plan.steps(), plan.term_count(),
            chosen};
}

FidelityReport fidelity_bayesian(const FeedbackPlan& plan, bool force) {
    if (plan.strategy() != Strategy::Bayesian) {
        throw ParameterError("fidelity_bayesian: plan strategy must be Bayesian");
    }
    guard_term_count(plan, force);
    std::vector<std::vector<Matrix>> ops_per_step;
    ops_per_step.reserve(static_cast<std::size_t>(plan.steps()));
    for (const KrausSet& set : plan.decompositions()) {
        ops_per_step.push_back(set.operators());
    }
    const double raw = detail::bayesian_value(ops_per_step, plan.dim());
    return {clamp01(raw),          raw, Strategy::Bayesian, plan.steps(), plan.term_count(),
            FidelityMethod::Brute};
}

double fidelity_from_definition(const std::vector<Matrix>& kraus_terms, Index d) {
    if (d < 1 || d > 3) {
        throw ResourceError("fidelity_from_definition: oracle supports d <= 3 only");
    }
    if (kraus_terms.size() > 100000) {
        throw ResourceError("fidelity_from_definition: too many Kraus terms");
    }
    for (const Matrix& term : kraus_terms) {
        if (term.rows() != d || term.cols() != d) {
            throw DimensionError("fidelity_from_definition: Kraus terms must be d x d");
        }
    }
    // |Psi> = (1/sqrt d) sum_i |ii> on the d^2-dimensional doubled space.
    Vector psi = Vector::Zero(d * d);
    for (Index i = 0; i < d; ++i) {
        psi(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
    }
    const Matrix psi_proj = psi * psi.adjoint();
    const Matrix eye = Matrix::Identity(d, d);
    Matrix evolved = Matrix::Zero(d * d, d * d);
    for (const Matrix& term : kraus_terms) {
        const Matrix lifted = kron(eye, term);
        evolved += lifted * psi_proj * lifted.adjoint();
    }
    return (psi.adjoint() * evolved * psi)(0, 0).real();
}

namespace {

template <typename StepOpFn>
std::vector<Matrix> collect_terms(const FeedbackPlan& plan, bool force, StepOpFn&& combine) {
    if (!force && plan.term_count() > 100000) {
        throw ResourceError("kraus term enumeration refused: too many outcome sequences");
    }
    std::vector<Matrix> terms;
    terms.reserve(static_cast<std::size_t>(plan.term_count()));
    std::vector<Matrix> prefix(static_cast<std::size_t>(plan.steps()) + 1);
    prefix[0] = Matrix::Identity(plan.dim(), plan.dim());
    std::vector<std::size_t> outcome(static_cast<std::size_t>(plan.steps()), 0);
    int level = 0;
    while (level >= 0) {
        const std::vector<Matrix>& ops = plan.step(level).operators();
        std::size_t& x = outcome[static_cast<std::size_t>(level)];
        if (x == ops.size()) {
            x = 0;
            --level;
            if (level >= 0) {
                ++outcome[static_cast<std::size_t>(level)];
            }
            continue;
        }
        prefix[static_cast<std::size_t>(level) + 1] =
            combine(ops[x], prefix[static_cast<std::size_t>(level)], level);
        if (level + 1 == plan.steps()) {
            terms.push_back(prefix[static_cast<std::size_t>(plan.steps())]);
            ++x;
        } else {
            ++level;
        }
    }
    return terms;
}

} // namespace

std::vector<Matrix> markovian_kraus_terms(const FeedbackPlan& plan, bool force) {
    return collect_terms(plan, force, [](const Matrix& op, const Matrix& prefix, int) {
        return Matrix(matrix_abs(op) * prefix);
    });
}

std::vector<Matrix> bayesian_kraus_terms(const FeedbackPlan& plan, bool force) {
    return collect_terms(plan, force, [](const Matrix& op, const Matrix& prefix, int) {
        return matrix_abs(op * prefix);
    });
}

} // namespace qfb
