#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qfb/channels.hpp"

namespace qfb {

/// Choi tolerance when checking that every step of a plan is a decomposition
/// of one and the same channel.
inline constexpr double kPlanChannelTol = 1e-8;
/// Brute-force evaluators refuse more outcome sequences than this unless forced.
inline constexpr std::uint64_t kMaxBruteTerms = 100000000;

enum class Strategy { Markovian, Bayesian };
enum class FidelityMethod { Brute, Transfer };

/// An n-step feedback schedule: one Kraus decomposition per step, all
/// describing the same channel. The plan varies the measurement, not the map.
class FeedbackPlan {
  public:
    /// Same decomposition at every step.
    static FeedbackPlan uniform(Strategy strategy, int steps, KrausSet set);
    /// One decomposition per step; sizes may differ between steps.
    static FeedbackPlan per_step(Strategy strategy, std::vector<KrausSet> sets);

    Strategy strategy() const { return strategy_; }
    int steps() const { return static_cast<int>(sets_.size()); }
    Index dim() const { return sets_.front().dim(); }
    const KrausSet& step(int k) const { return sets_[static_cast<std::size_t>(k)]; }
    const std::vector<KrausSet>& decompositions() const { return sets_; }

    /// Number of outcome sequences, saturated at uint64 max.
    std::uint64_t term_count() const;

  private:
    FeedbackPlan(Strategy strategy, std::vector<KrausSet> sets);

    Strategy strategy_;
    std::vector<KrausSet> sets_;
};

struct FidelityReport {
    double value = 0.0;     // clamped to [0, 1]
    double raw_value = 0.0; // pre-clamp, for excursion diagnostics
    Strategy strategy = Strategy::Markovian;
    int steps = 1;
    std::uint64_t term_count = 0;
    FidelityMethod method = FidelityMethod::Brute;
};

/// The recovery-corrected map {|T_x|}: apply recovery V_x^dag after outcome x.
KrausSet corrected_channel(const KrausSet& k);

/// Recovery operators {V_x^dag}, one per Kraus operator, each unitary, with
/// R_x T_x = |T_x|.
std::vector<Matrix> recovery_operators(const KrausSet& k);

/// F_1 = (1/d^2) sum_x (tr |T_x|)^2.
FidelityReport fidelity_one_step(const KrausSet& k);

/// Markovian n-step fidelity
///   F_n = (1/d^2) sum_{x_1..x_n} |tr(|T^(n)_{x_n}| ... |T^(1)_{x_1}|)|^2.
/// Brute enumerates sequences depth-first with prefix reuse; transfer
/// multiplies the d^2 x d^2 step maps E_k = sum_x |T_x| (x) conj(|T_x|).
/// Default method: brute while the sequence count stays small, else transfer.
FidelityReport fidelity_markovian(const FeedbackPlan& plan,
                                  std::optional<FidelityMethod> method = std::nullopt,
                                  bool force = false);

/// Bayesian n-step fidelity with history-conditioned recovery:
///   F'_n = (1/d^2) sum (tr B_{x_1..x_n})^2,
///   B_{x_1} = |T^(1)_{x_1}|,  B_{x_1..x_k} = |T^(k)_{x_k} B_{x_1..x_{k-1}}|.
FidelityReport fidelity_bayesian(const FeedbackPlan& plan, bool force = false);

/// Definition-level oracle: builds the maximally entangled |Psi>, applies
/// (id x map) for the map given by explicit Kraus terms, and returns
/// <Psi| . |Psi>. Limited to d <= 3 and at most 1e5 terms.
double fidelity_from_definition(const std::vector<Matrix>& kraus_terms, Index d);

/// All n-fold products |T^(n)| ... |T^(1)| of a Markovian plan: the Kraus
/// terms of the composed corrected map, in depth-first outcome order.
std::vector<Matrix> markovian_kraus_terms(const FeedbackPlan& plan, bool force = false);

/// All nested-absolute-value operators B_{x_1..x_n} of a Bayesian plan.
std::vector<Matrix> bayesian_kraus_terms(const FeedbackPlan& plan, bool force = false);

namespace detail {

/// Raw evaluation cores shared with the optimizer; inputs are taken on faith
/// (no CPTP or same-channel validation).
double markovian_value(const std::vector<std::vector<Matrix>>& abs_per_step, Index d);
double markovian_value_stationary(const std::vector<Matrix>& abs_ops, int steps, Index d);
double markovian_value_transfer(const std::vector<std::vector<Matrix>>& abs_per_step, Index d);
double bayesian_value(const std::vector<std::vector<Matrix>>& ops_per_step, Index d);
double bayesian_value_stationary(const std::vector<Matrix>& ops, int steps, Index d);
std::vector<Matrix> abs_operators(const KrausSet& k);

} // namespace detail

} // namespace qfb
